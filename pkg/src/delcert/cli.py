"""Command-line surface: training, certification, cardinality analytics,
attack runs, and report emission.

Datasets are newline-delimited JSON ({"text": ..., "label": ...}) or CSV
with a text,label header.  Records and curves are emitted as CSV with a
header; attack reports as JSON.  Every command taking ``--seed`` is
bit-reproducible.  Flag values override config-file values, which
override defaults.  Exit codes: 0 success, 2 usage, 3 data error,
4 guard/scale error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

from . import attacks as atk
from .certify import BasePredictor, SmoothedPredictor, certify
from .classifier import BuiltinModel, LabeledDataset, train_builtin
from .edit_metrics import (
    ALL_OPS_SETS,
    CardinalityParams,
    EditOpsSet,
    hamming_ball_cardinality,
    lev_ball_cardinality_exact,
    lev_ball_cardinality_lower_bound,
)
from .errors import DataFormatError, DelcertError, GuardError
from .external import ExternalClassifier
from .mechanisms import MechanismKind, MechanismParams
from .rng import RandomStream
from .textcrs import deletion_cover_radii, insertion_cover_radii, max_certified_edit_radius
from .tokenization import Scheme, TokenSeq, tokenize

_OPS_COLUMNS = [(ops, f"radius_{ops.letters}") for ops in ALL_OPS_SETS]

DEFAULTS: dict[str, object] = {
    "mechanism": "deletion",
    "rate": 0.9,
    "n_pred": 1000,
    "n_cert": 4000,
    "alpha": 0.05,
    "prediction_samples": 100,
    "vocab_size": 50265,
    "seed": 0,
    "ops": "dis",
    "timeout_seconds": 600.0,
    "max_queries": 10000,
    "candidates_per_position": 8,
    "samples_per_instance": 8,
    "scheme": "whitespace",
    "bound_mode": "bonferroni-cp",
    "jobs": 1,
    "recipe": "greedy_substitute",
    "target": "smoothed",
    "num_classes": 2,
}


# ---------------------------------------------------------------------------
# config and dataset I/O
# ---------------------------------------------------------------------------


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Opts:
    """Resolves option values with precedence flag > config > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}

    def get(self, key: str, cast=None):
        v = self.args.get(key)
        if v is None and key in self.config:
            v = self.config[key]
        if v is None:
            v = DEFAULTS.get(key)
        if v is None:
            return None
        return cast(v) if cast else v


def load_dataset(path: str) -> LabeledDataset:
    """Read a JSONL or CSV dataset; malformed rows report their line number."""
    pairs: list[tuple[str, int]] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot open dataset {path}: {exc}") from exc
    with fh:
        if path.endswith(".csv"):
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"text", "label"} <= set(reader.fieldnames):
                raise DataFormatError(f"{path}: CSV needs a text,label header")
            for lineno, row in enumerate(reader, start=2):
                try:
                    pairs.append((row["text"], int(row["label"])))
                except (KeyError, TypeError, ValueError) as exc:
                    raise DataFormatError(f"{path}:{lineno}: bad row ({exc})") from exc
        else:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    pairs.append((str(obj["text"]), int(obj["label"])))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise DataFormatError(f"{path}:{lineno}: bad row ({exc})") from exc
    if not pairs:
        raise DataFormatError(f"{path}: dataset is empty")
    return LabeledDataset.from_pairs(pairs)


def _mechanism(opts: _Opts) -> MechanismParams:
    return MechanismParams(MechanismKind(opts.get("mechanism")), opts.get("rate", float))


def _make_target(opts: _Opts):
    """Build the attacked predictor and (when builtin) the model behind it."""
    external_cmd = opts.get("external_cmd")
    if external_cmd:
        model = ExternalClassifier(external_cmd, num_classes=opts.get("num_classes", int))
    else:
        model_path = opts.get("model")
        if not model_path:
            raise DataFormatError("either --model or --external-cmd is required")
        model = BuiltinModel.load(model_path)
    if opts.get("target") == "base":
        return BasePredictor(model), model
    predictor = SmoothedPredictor(
        model,
        _mechanism(opts),
        n_samples=opts.get("prediction_samples", int),
        stream=RandomStream(opts.get("seed", int)),
        scheme=Scheme(opts.get("scheme")),
    )
    return predictor, model


def _write_text(path: str | None, content: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(content)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_train(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    data = load_dataset(args.data)
    model = train_builtin(
        data,
        _mechanism(opts),
        samples_per_instance=opts.get("samples_per_instance", int),
        stream=RandomStream(opts.get("seed", int)),
        scheme=Scheme(opts.get("scheme")),
    )
    model.save(args.out)
    print(f"trained on {len(data)} instances; vocabulary {len(model.tokens)}; wrote {args.out}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    model = BuiltinModel.load(args.model)
    data = load_dataset(args.data)
    mech = _mechanism(opts)
    n_pred = opts.get("n_pred", int)
    stream = RandomStream(opts.get("seed", int))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["instance", "true_label", "predicted"])
    correct = 0
    from .certify import smoothed_predict

    for idx, (text, label) in enumerate(data.items):
        x = tokenize(text, model.scheme)
        pred, _ = smoothed_predict(model, x, mech, n_pred, stream.child(idx, 0).generator())
        correct += int(pred == label)
        writer.writerow([idx, label, pred])
    _write_text(args.out, buf.getvalue())
    print(f"accuracy={correct / len(data)!r}")
    return 0


def _certify_one(model, mech, opts, idx: int, text: str, label: int, stream: RandomStream):
    x = tokenize(text, model.scheme)
    cert = certify(
        model,
        x,
        mech,
        n_pred=opts.get("n_pred", int),
        n_cert=opts.get("n_cert", int),
        alpha=opts.get("alpha", float),
        stream=stream.child(idx),
        vocab_size=opts.get("vocab_size", int),
        bound_mode=opts.get("bound_mode"),
    )
    row = [idx, label, cert.predicted, int(cert.abstained)]
    row += [cert.radius_by_ops[ops] for ops, _ in _OPS_COLUMNS]
    row += [
        repr(cert.log10_cardinality_lb),
        repr(cert.bounds.mu_y),
        repr(cert.bounds.mu_yprime),
        opts.get("n_pred", int),
        opts.get("n_cert", int),
    ]
    return row, cert


def cmd_certify(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    model = BuiltinModel.load(args.model)
    data = load_dataset(args.data)
    mech = _mechanism(opts)
    stream = RandomStream(opts.get("seed", int))
    jobs = opts.get("jobs", int)
    ops_sel = EditOpsSet.from_letters(opts.get("ops"))

    def one(item):
        idx, (text, label) = item
        return _certify_one(model, mech, opts, idx, text, label, stream)

    work = list(enumerate(data.items))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, work))
    else:
        results = [one(w) for w in work]

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["instance", "true_label", "predicted", "abstained"]
        + [col for _, col in _OPS_COLUMNS]
        + ["log10_cc_lb", "mu_y", "mu_yprime", "n_pred", "n_cert"]
    )
    for row, _ in results:
        writer.writerow(row)
    _write_text(args.out, buf.getvalue())

    sel_col = f"radius_{ops_sel.letters}"
    radii = [cert.radius_by_ops[ops_sel] for _, cert in results]
    correct = [int(cert.predicted == label) for (_, label), (_, cert) in zip(data.items, results)]
    log_ccs = [cert.log10_cardinality_lb for _, cert in results]
    print(f"instances={len(results)}")
    print(f"clean_accuracy={sum(correct) / len(results)!r}")
    print(f"median_radius[{sel_col}]={statistics.median(radii)!r}")
    print(f"median_log10_cc={statistics.median(log_ccs)!r}")
    print(f"abstained={sum(1 for _, c in results if c.abstained)}")
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    with open(args.records, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataFormatError(f"{args.records}: no records")
    correct = [r["predicted"] == r["true_label"] for r in rows]
    log_cc = [float(r["log10_cc_lb"]) for r in rows]
    if args.thresholds:
        thresholds = [float(t) for t in args.thresholds.split(",")]
    else:
        top = max(log_cc)
        count = args.grid or 21
        thresholds = [top * i / (count - 1) for i in range(count)] if count > 1 else [0.0]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["threshold_log10_cc", "certified_accuracy"])
    for c in thresholds:
        frac = sum(1 for ok, cc in zip(correct, log_cc) if ok and cc >= c) / len(rows)
        writer.writerow([repr(c), repr(frac)])
    _write_text(args.out, buf.getvalue())
    return 0


def cmd_cardinality(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    n = args.length
    v = opts.get("vocab_size", int)
    r = args.radius
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["measure", "length", "vocab_size", "radius", "count", "log10"])

    def emit(measure: str, count: int) -> None:
        import math

        writer.writerow([measure, n, v, r, count, repr(math.log10(count)) if count else ""])

    which = args.which
    lower = None
    exact = None
    if which in ("hamming", "all"):
        emit("hamming_exact", hamming_ball_cardinality(CardinalityParams(n, r, v)))
    if which in ("lower", "all"):
        lower = lev_ball_cardinality_lower_bound(CardinalityParams(n, r, v))
        emit("levenshtein_lower_bound", lower)
    if which == "exact" or (which == "all" and args.exact):
        tokens = args.tokens.split() if args.tokens else [f"t{i}" for i in range(n)]
        if len(tokens) != n:
            raise DataFormatError(f"--tokens has {len(tokens)} tokens but --length is {n}")
        x = TokenSeq(tuple(tokens), Scheme.WHITESPACE)
        exact = lev_ball_cardinality_exact(x, v, r)
        emit("levenshtein_exact", exact)
    if lower is not None and exact is not None:
        import math

        ratio = math.exp(math.log(exact) - math.log(lower))  # safe for huge counts
        writer.writerow(["exact_to_lower_ratio", n, v, r, "", repr(ratio)])
    _write_text(args.out, buf.getvalue())
    return 0


def cmd_textcrs(args: argparse.Namespace) -> int:
    n = args.length
    kind = args.kind
    r_R_cap = args.r_r_cap if args.r_r_cap is not None else float(n)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["kind", "length", "r_R_cap", "r_I_cap", "d_star", "max_edit_radius", "r_R_min_at_max"]
    )
    kinds = ["deletion", "insertion"] if kind == "both" else [kind]
    for k in kinds:
        if k == "insertion":
            r_star = max_certified_edit_radius(n, k, r_R_cap, args.r_i_cap, args.d_star)
            req = insertion_cover_radii(n, r_star, args.d_star) if r_star else None
            writer.writerow(
                [k, n, r_R_cap, args.r_i_cap, args.d_star, r_star, str(req.r_R_min) if req else "0"]
            )
        else:
            r_star = max_certified_edit_radius(n, k, r_R_cap)
            req = deletion_cover_radii(n, r_star)
            writer.writerow([k, n, r_R_cap, "", "", r_star, str(req.r_R_min)])
    _write_text(args.out, buf.getvalue())
    return 0


def _report_to_json(report: atk.AttackReport, meta: dict) -> str:
    payload = dict(meta)
    payload.update(
        {
            "clean_accuracy": report.clean_accuracy,
            "robust_accuracy": report.robust_accuracy,
            "mean_queries": report.mean_queries,
            "counts": {s: report.count(s) for s in (atk.SUCCESS, atk.FAIL, atk.SKIPPED, atk.TIMEOUT)},
            "outcomes": [asdict(o) for o in report.outcomes],
            "harness_errors": [list(e) for e in report.harness_errors],
        }
    )
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_attack(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    data = load_dataset(args.data)
    target, model = _make_target(opts)
    recipe = atk.AttackRecipe(
        kind=opts.get("recipe"),
        candidates_per_position=opts.get("candidates_per_position", int),
        max_queries=opts.get("max_queries", int),
        timeout_seconds=opts.get("timeout_seconds", float),
    )
    if args.lexicon:
        lexicon = atk.load_lexicon(args.lexicon)
    elif isinstance(model, BuiltinModel):
        lexicon = atk.lexicon_from_model(model)
    else:
        lexicon = atk.lexicon_from_dataset(data, scheme=Scheme(opts.get("scheme")))
    report = atk.run_attack(
        target, data, recipe, lexicon, scheme=Scheme(opts.get("scheme")), jobs=opts.get("jobs", int)
    )
    meta = {
        "mode": "direct",
        "recipe": asdict(recipe),
        "seed": opts.get("seed", int),
        "target": opts.get("target"),
        "mechanism": opts.get("mechanism"),
        "rate": opts.get("rate", float),
        "prediction_samples": opts.get("prediction_samples", int),
    }
    _write_text(args.out, _report_to_json(report, meta))
    print(f"clean_accuracy={report.clean_accuracy!r}")
    print(f"robust_accuracy={report.robust_accuracy!r}")
    print(f"mean_queries={report.mean_queries!r}")
    return 0


def _report_from_json(path: str) -> atk.AttackReport:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    outcomes = [atk.AttackOutcome(**o) for o in payload["outcomes"]]
    return atk.AttackReport(
        outcomes=tuple(outcomes),
        clean_accuracy=payload["clean_accuracy"],
        robust_accuracy=payload["robust_accuracy"],
        mean_queries=payload["mean_queries"],
        harness_errors=tuple(tuple(e) for e in payload.get("harness_errors", [])),
    )


def cmd_transfer(args: argparse.Namespace) -> int:
    opts = _Opts(args)
    source = _report_from_json(args.source_report)
    target, _ = _make_target(opts)
    report = atk.transfer_attack(source, target)
    meta = {
        "mode": "transfer",
        "source_report": args.source_report,
        "seed": opts.get("seed", int),
        "target": opts.get("target"),
    }
    _write_text(args.out, _report_to_json(report, meta))
    print(f"transferred={len(report.outcomes)}")
    print(f"clean_accuracy={report.clean_accuracy!r}")
    print(f"robust_accuracy={report.robust_accuracy!r}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--mechanism", choices=["deletion", "masking"])
    p.add_argument("--rate", type=float, help="p_del or p_mask")
    p.add_argument("--n-pred", dest="n_pred", type=int)
    p.add_argument("--n-cert", dest="n_cert", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--ops", choices=["dis", "d", "i", "s", "di", "ds", "is"])
    p.add_argument("--vocab-size", dest="vocab_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout-seconds", dest="timeout_seconds", type=float)
    p.add_argument("--max-queries", dest="max_queries", type=int)
    p.add_argument("--external-cmd", dest="external_cmd", help="spawn a line-protocol classifier")
    p.add_argument("--scheme", choices=["whitespace", "character"])
    p.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delcert",
        description="Certified edit-distance robustness via randomized token deletion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the built-in model under smoothing noise")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--samples-per-instance", dest="samples_per_instance", type=int)
    _add_shared(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="smoothed predictions for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    _add_shared(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("certify", help="certified radii and cardinalities per instance")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--bound-mode", dest="bound_mode", choices=["bonferroni-cp", "complement"])
    _add_shared(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("curve", help="certified accuracy vs log-cardinality threshold")
    p.add_argument("--records", required=True, help="CSV written by `certify`")
    p.add_argument("--thresholds", help="comma-separated log10 thresholds")
    p.add_argument("--grid", type=int, help="number of evenly spaced thresholds")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("cardinality", help="edit/substitution ball cardinalities")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--which", choices=["hamming", "lower", "exact", "all"], default="all")
    p.add_argument("--exact", action="store_true", help="include the automaton exact count")
    p.add_argument("--tokens", help="whitespace-separated pattern for the exact count")
    p.add_argument("--out", default="-")
    _add_shared(p)
    p.set_defaults(func=cmd_cardinality)

    p = sub.add_parser("textcrs", help="edit-radius coverage of reordering-style certificates")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--kind", choices=["deletion", "insertion", "both"], default="deletion")
    p.add_argument("--r-r-cap", dest="r_r_cap", type=float)
    p.add_argument("--r-i-cap", dest="r_i_cap", type=float, default=0.99)
    p.add_argument("--d-star", dest="d_star", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_textcrs)

    p = sub.add_parser("attack", help="greedy black-box attack under the outcome protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--model")
    p.add_argument("--num-classes", dest="num_classes", type=int)
    p.add_argument("--target", choices=["smoothed", "base"])
    p.add_argument("--recipe", choices=["greedy_substitute", "greedy_edit", "char_perturb"])
    p.add_argument("--candidates-per-position", dest="candidates_per_position", type=int)
    p.add_argument("--prediction-samples", dest="prediction_samples", type=int)
    p.add_argument("--lexicon")
    p.add_argument("--out", default="-")
    _add_shared(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("transfer", help="replay source successes against a target")
    p.add_argument("--source-report", dest="source_report", required=True)
    p.add_argument("--model")
    p.add_argument("--num-classes", dest="num_classes", type=int)
    p.add_argument("--target", choices=["smoothed", "base"])
    p.add_argument("--prediction-samples", dest="prediction_samples", type=int)
    p.add_argument("--out", default="-")
    _add_shared(p)
    p.set_defaults(func=cmd_transfer)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DelcertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
