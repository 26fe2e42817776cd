"""Compare the hybrid C-Net rules with a plain univariate tree on raw inputs.

Both surrogates are fitted to the network's own predictions on the training
set. C-Net fits its tree on the last hidden layer and projects each threshold
back into input space, so its rules are oblique and usually fewer.

Run: python3 demos/cnet_vs_tree.py
"""

import numpy as np

from relucid.cnet import extract_cnet, extract_udt_baseline
from relucid.data import SplitSpec, generate_p2, split
from relucid.evaluation import compactness, fidelity
from relucid.rules import render_rule_text
from relucid.trainer import TrainConfig, train

train_set, test_set = split(generate_p2(5000, seed=0), SplitSpec(0.8, seed=0))
print("seed  C-Net rules  fidelity   tree rules  fidelity")
for seed in range(3):
    net = train(train_set, TrainConfig(0.001, 500, 128, seed, (5, 5)))
    cnet = extract_cnet(net, train_set).ruleset
    tree_rules, _ = extract_udt_baseline(net, train_set)
    fc = fidelity(cnet, net, test_set.features).fidelity
    ft = fidelity(tree_rules, net, test_set.features).fidelity
    print(f"{seed:>4}  {len(cnet):>11}  {fc:>8.3f}   {len(tree_rules):>10}  {ft:>8.3f}")

print("\nlast C-Net rule set, mean constraints per rule:",
      round(compactness(cnet).mean_constraints_per_rule, 2))
shortest = min(cnet.rules, key=lambda r: len(r.constraints))
print(render_rule_text(shortest, ("x1", "x2"), class_names=("inside", "outside")))
print("\nexample of a univariate rule:")
print(render_rule_text(tree_rules.rules[int(np.argmin([len(r.constraints) for r in tree_rules.rules]))],
                       ("x1", "x2")))
