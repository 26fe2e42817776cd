"""Train a 5+5 ReLU network on the P2 annulus task and convert it to exact rules.

P2 points lie in the ring 4 <= x1^2 + x2^2 <= 6 and are labelled 1 when
x1^2 + x2^2 >= 5. The script trains one network, extracts its exact
multivariate rule set, checks that the rules reproduce every prediction, and
writes the model, the rules, a report and two SVG figures.

Run: python3 demos/p2_pipeline.py [output-dir]
"""

import sys
import time
from pathlib import Path

from relucid.data import SplitSpec, generate_p2, split
from relucid.ecdt import extract_ruleset
from relucid.evaluation import compactness, fidelity, report_to_json, sample_state_space
from relucid.model import save_model
from relucid.rules import save_ruleset
from relucid.trainer import TrainConfig, evaluate_accuracy, train
from relucid.viz import SliceSpec, class_map, render_rule_regions, render_slice

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-output")
out.mkdir(parents=True, exist_ok=True)

train_set, test_set = split(generate_p2(5000, seed=0), SplitSpec(0.8, seed=0))
start = time.perf_counter()
net = train(train_set, TrainConfig(learning_rate=0.001, epochs=500, batch_size=128, seed=0, hidden_sizes=(5, 5)))
print(f"trained in {time.perf_counter() - start:.1f}s; test accuracy {evaluate_accuracy(net, test_set):.3f}")

start = time.perf_counter()
rules = extract_ruleset(net, feature_names=train_set.feature_names)
print(f"{len(rules)} feasible rules out of 1024 patterns in {time.perf_counter() - start:.2f}s")

on_test = fidelity(rules, net, test_set.features, "test-set")
on_box = fidelity(rules, net, sample_state_space([(-3, 3), (-3, 3)], 10_000, 1), "sampled-space")
print(f"fidelity: {on_test.fidelity} on the test set, {on_box.fidelity} on 10^4 random points")
size = compactness(rules, "with-output-threshold")
print(f"mean constraints per rule (counting the output test): {size.mean_constraints_per_rule}")

spec = SliceSpec((0, 1), ((-2.45, 2.45), (-2.45, 2.45)), resolution=300, feature_names=("x1", "x2"),
                 title="P2 network decision regions")
assert (class_map(net, spec) == class_map(rules, spec)).all()

save_model(net, out / "p2-model.json")
save_ruleset(rules, out / "p2-rules.json")
(out / "p2-report.json").write_text(report_to_json({"test": on_test, "sampled": on_box, "size": size}, seed=0))
(out / "p2-regions.svg").write_text(render_slice(rules, spec))
(out / "p2-rule-boundaries.svg").write_text(render_rule_regions(rules, spec))
print(f"wrote model, rules, report and figures to {out}/")
