"""XOR by hand: four activation patterns, one impossible, three exact rules.

The network has two hidden units, h1 = relu(x1 + x2) and h2 = relu(x1 + x2 - 1),
and outputs h1 - 2*h2. Each on/off combination of the hidden units is a
candidate region; (h1 off, h2 on) would need x1 + x2 <= 0 and x1 + x2 > 1 at
the same time, so the pruner drops it.

Run: python3 demos/xor_walkthrough.py
"""

import numpy as np

from relucid.ecdt import extract_ruleset, leaf_patterns
from relucid.model import predict, xor_network
from relucid.rules import classify, render_rule_text

net = xor_network()
print("candidate patterns:", [p.flat for p in leaf_patterns(net.hidden_sizes)])

everything = extract_ruleset(net, prune=False)
rules = extract_ruleset(net)
dropped = {r.pattern.flat for r in everything.rules} - {r.pattern.flat for r in rules.rules}
print(f"{len(rules)} feasible rules; dropped {sorted(dropped)}\n")

for rule in rules.rules:
    print(f"rule {rule.id}, pattern {rule.pattern.flat}")
    print(render_rule_text(rule))
    print()

for x in ([0, 0], [0, 1], [1, 0], [1, 1]):
    label, rule_id = classify(rules, np.array(x, dtype=float))
    print(f"x={x}: rules say {label} (rule {rule_id}), network says {predict(net, np.array(x, dtype=float))}")
