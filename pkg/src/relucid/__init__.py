"""Exact and approximate rule extraction from ReLU networks."""

__version__ = "0.1.0"

from .errors import (CapacityError, DivergenceError, InvariantViolation, NumericalFailure, ParseError,
                     RelucidError, ShapeError, TrainingError)
from .model import ActivationPattern, Layer, Mlp, activation_pattern, forward, load_model, predict, save_model
from .data import Dataset, SplitSpec, generate_p2, load_csv, split
from .trainer import TrainConfig, evaluate_accuracy, train
from .rules import (AffineConsequence, LinearConstraint, Rule, RuleSet, classify, classify_many, load_ruleset,
                    parse_ruleset, render_rule_text, rule_fires, save_ruleset, serialize_ruleset)
from .feasibility import ConstraintSystem, FeasibilityResult, check_feasible, witness_valid
from .ecdt import build_ecdt, extract_rule_for_leaf, extract_ruleset, local_explain
from .udt import UdtParams, UdtTree, fit_udt, predict_udt, prune_pessimistic, udt_rules
from .cnet import back_project_leaf, extract_cnet, extract_cnet_ruleset, hidden_features
from .evaluation import compactness, fidelity, sample_state_space, time_extraction
