"""Local explanations stay cheap while global extraction grows exponentially.

A local explanation only composes the layers along one input's activation
pattern. A global extraction has to visit every realisable pattern, and with
at least as many inputs as hidden units every one of the 2^n patterns is
realisable.

Run: python3 demos/local_and_scaling.py
"""

import time

import numpy as np

from relucid.ecdt import extract_ruleset, local_explain
from relucid.errors import CapacityError
from relucid.model import predict, random_network
from relucid.rules import render_rule_text

net = random_network(2, (5, 5), seed=4)
points = np.random.default_rng(0).uniform(-2, 2, size=(1000, 2))
start = time.perf_counter()
explanations = [local_explain(net, x) for x in points]
mean_ms = (time.perf_counter() - start) / len(points) * 1e3
agree = sum(r.label_for(x) == predict(net, x) for r, x in zip(explanations, points))
print(f"1000 local explanations: {mean_ms:.3f} ms each, {agree}/1000 agree with the network")
print(render_rule_text(explanations[0], ("x1", "x2"), x=points[0]))

print("\nhidden units   rules   seconds")
for n in (6, 8, 10, 12):
    wide = random_network(14, (n,), seed=n)
    start = time.perf_counter()
    rules = extract_ruleset(wide)
    print(f"{n:>12}   {len(rules):>5}   {time.perf_counter() - start:.3f}")

try:
    extract_ruleset(random_network(2, (16, 15)))
except CapacityError as exc:
    print(f"\n31 hidden units: {exc}")
