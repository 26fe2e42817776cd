"""Command-line entry point: train, extract, evaluate, explain, render, bench.

Exit codes: 0 success, 1 usage error, 2 data/model error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .data import Dataset, MinMaxScaler, SplitSpec, fold_scaler, generate_p2, load_csv, split
from .errors import CapacityError, RelucidError
from .model import load_model, model_from_dict, save_model
from .rules import load_ruleset, render_rule_text, ruleset_from_dict, save_ruleset

log = logging.getLogger("relucid")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _ranges(text: str) -> list[tuple[float, float]]:
    """``lo:hi,lo:hi,...``"""
    out = []
    try:
        for part in text.split(","):
            lo, hi = part.split(":")
            out.append((float(lo), float(hi)))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi pairs separated by commas, got {text!r}") from exc
    return out


def _add_data_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--data", required=required,
                   help="CSV file, or p2:N to generate N points of the P2 task")
    p.add_argument("--label-column", default="-1", help="label column name or zero-based index (default: last)")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--data-seed", type=int, default=0, help="seed for generated data")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)


def _load_data(args) -> Dataset:
    if args.data.startswith("p2:"):
        return generate_p2(int(args.data[3:]), args.data_seed)
    return load_csv(args.data, args.label_column, not args.no_header)


def _split(args, data: Dataset) -> tuple[Dataset, Dataset]:
    return split(data, SplitSpec(args.train_fraction, args.split_seed))


def _add_udt_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-leaf", type=int, default=2)
    p.add_argument("--confidence-factor", type=float, default=0.25)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--no-tree-prune", action="store_true", help="skip pessimistic pruning of the tree")
    p.add_argument("--fit-on-ground-truth", action="store_true",
                   help="fit trees on dataset labels instead of the network's predictions")


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("RELUCID_THREADS", "1")))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relucid", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int, default=None, help="thread cap (default: $RELUCID_THREADS or 1)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a ReLU MLP")
    _add_data_args(p, required=True)
    p.add_argument("--arch", type=_ints, default=[5, 5], help="hidden sizes, e.g. 5,5")
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--normalize", action="store_true",
                   help="train on min-max scaled inputs, then fold the scaler into the first layer")
    p.add_argument("--repeats", type=int, default=1,
                   help="train this many models with seeds seed..seed+repeats-1 on the same split")
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract", help="extract a rule set from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("ecdt", "cnet", "udt"), default="ecdt")
    _add_data_args(p)
    p.add_argument("--no-prune", action="store_true", help="keep infeasible EC-DT rules")
    p.add_argument("--capacity-bits", type=int, default=30)
    p.add_argument("--materialize-tree", action="store_true", help="build the full EC-DT tree before filtering")
    p.add_argument("--bounds-from-data", action="store_true",
                   help="C-Net: restrict feasibility checks to the training data's bounding box")
    _add_udt_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="fidelity and compactness of a rule set against its model")
    p.add_argument("--model", required=True)
    p.add_argument("--rules", required=True)
    _add_data_args(p)
    p.add_argument("--bounds", type=_ranges, help="sampling box lo:hi,lo:hi,... when no data is given")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("explain", help="print the local EC-DT rule for one input")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, type=_floats, help="comma-separated input values")
    p.add_argument("--names", default=None, help="comma-separated feature names")

    p = sub.add_parser("render", help="render a 2-D decision-region slice as SVG")
    p.add_argument("--predictor", required=True, help="model file or rule-set file")
    p.add_argument("--dims", type=_ints, default=[0, 1])
    p.add_argument("--fixed", type=_floats, default=[], help="values for the non-free inputs, in index order")
    p.add_argument("--range", dest="ranges", type=_ranges, required=True, help="lo:hi,lo:hi for the two free dims")
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--regions", action="store_true", help="overlay rule boundaries (rule sets only)")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="time rule extraction")
    p.add_argument("--model", required=True)
    p.add_argument("--methods", default="ecdt", help="comma-separated subset of ecdt,cnet,udt")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--local-samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_data_args(p)
    p.add_argument("--out", default=None)
    return parser


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_train(args) -> int:
    from .trainer import TrainConfig, evaluate_accuracy, train

    data = _load_data(args)
    train_set, test_set = _split(args, data)
    scaler = MinMaxScaler.fit(train_set.features) if args.normalize else None
    fit_set = train_set
    if scaler is not None:
        fit_set = Dataset(scaler.transform(train_set.features), train_set.labels,
                          train_set.feature_names, train_set.class_count)
    out = Path(args.out)
    for r in range(args.repeats):
        seed = args.seed + r
        config = TrainConfig(args.lr, args.epochs, args.batch, seed, tuple(args.arch), args.optimizer)
        model = train(fit_set, config)
        if scaler is not None:
            model = fold_scaler(model, scaler)
        meta = dict(model.metadata)
        meta.update({"feature_names": list(data.feature_names), "train_seed": seed,
                     "train_accuracy": evaluate_accuracy(model, train_set),
                     "test_accuracy": evaluate_accuracy(model, test_set)})
        if data.class_names:
            meta["class_names"] = list(data.class_names)
        model = type(model)(model.input_dim, model.hidden_layers, model.output_layer, meta)
        path = out if args.repeats == 1 else out.with_name(f"{out.stem}-r{r}{out.suffix}")
        save_model(model, path)
        print(f"{path}: train accuracy {meta['train_accuracy']:.4f}, test accuracy {meta['test_accuracy']:.4f}")
    return EXIT_OK


def cmd_extract(args) -> int:
    from .cnet import extract_cnet, extract_udt_baseline
    from .ecdt import extract_ruleset
    from .udt import UdtParams

    model = load_model(args.model)
    names = tuple(model.metadata.get("feature_names", ()))
    if args.method == "ecdt":
        rs = extract_ruleset(model, prune=not args.no_prune, capacity_bits=args.capacity_bits,
                             materialize_tree=args.materialize_tree, n_jobs=_threads(args), feature_names=names)
    else:
        if not args.data:
            raise UsageError(f"extract --method {args.method} requires --data")
        train_set, _ = _split(args, _load_data(args))
        params = UdtParams(args.min_leaf, args.confidence_factor, args.max_depth)
        if args.method == "cnet":
            bounds = train_set.bounds() if args.bounds_from_data else None
            rs = extract_cnet(model, train_set, params, fit_on_ground_truth=args.fit_on_ground_truth,
                              prune_tree=not args.no_tree_prune, bounds=bounds,
                              capacity_bits=args.capacity_bits, n_jobs=_threads(args)).ruleset
        else:
            rs, _ = extract_udt_baseline(model, train_set, params, args.fit_on_ground_truth, not args.no_tree_prune)
    save_ruleset(rs, args.out)
    print(f"{args.out}: {len(rs)} {rs.kind} rules")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .evaluation import compactness, fidelity, report_to_json, sample_state_space

    model = load_model(args.model)
    rs = load_ruleset(args.rules)
    if args.data:
        _, test_set = _split(args, _load_data(args))
        fid = fidelity(rs, model, test_set.features, "test-set")
    elif args.bounds:
        fid = fidelity(rs, model, sample_state_space(args.bounds, args.samples, args.seed), "sampled-space")
    else:
        raise UsageError("evaluate needs --data or --bounds")
    reports = {"fidelity": fid,
               "compactness_hidden_only": compactness(rs, "hidden-only"),
               "compactness_with_output_threshold": compactness(rs, "with-output-threshold")}
    _write(args.out, report_to_json(reports, args.seed))
    print(f"fidelity {fid.fidelity:.4f} ({fid.matches}/{fid.total}), {len(rs)} rules", file=sys.stderr)
    return EXIT_OK


def cmd_explain(args) -> int:
    from .ecdt import local_explain

    model = load_model(args.model)
    x = np.asarray(args.input, dtype=np.float64)
    rule = local_explain(model, x)
    names = args.names.split(",") if args.names else model.metadata.get("feature_names")
    print(render_rule_text(rule, names, x=x, class_names=model.metadata.get("class_names", ())))
    return EXIT_OK


def _load_predictor(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "rules" in doc:
        return ruleset_from_dict(doc)
    return model_from_dict(doc)


def cmd_render(args) -> int:
    from .rules import RuleSet
    from .viz import SliceSpec, render_rule_regions, render_slice

    predictor = _load_predictor(args.predictor)
    if len(args.dims) != 2 or len(args.ranges) != 2:
        raise UsageError("render needs exactly two --dims and two --range pairs")
    if isinstance(predictor, RuleSet):
        names = predictor.feature_names
    else:
        names = tuple(predictor.metadata.get("feature_names", ()))
    spec = SliceSpec(tuple(args.dims), tuple(args.ranges), tuple(args.fixed), args.resolution,
                     feature_names=names, title=args.title)
    if args.regions:
        if not isinstance(predictor, RuleSet):
            raise UsageError("--regions needs a rule-set file")
        svg = render_rule_regions(predictor, spec)
    else:
        svg = render_slice(predictor, spec)
    _write(args.out, svg)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .evaluation import report_to_json, time_extraction

    model = load_model(args.model)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - {"ecdt", "cnet", "udt"}
    if unknown:
        raise UsageError(f"unknown methods: {', '.join(sorted(unknown))}")
    train_set = _split(args, _load_data(args))[0] if args.data else None
    reports = {}
    for method in methods:
        if method != "ecdt" and train_set is None:
            raise UsageError(f"bench method {method} requires --data")
        reports[method] = time_extraction(model, method, args.repeats, train_set, args.local_samples, args.seed)
    _write(args.out, report_to_json(reports, args.seed))
    return EXIT_OK


COMMANDS = {"train": cmd_train, "extract": cmd_extract, "evaluate": cmd_evaluate,
            "explain": cmd_explain, "render": cmd_render, "bench": cmd_bench}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"relucid {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"relucid {args.command}: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (RelucidError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"relucid {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
