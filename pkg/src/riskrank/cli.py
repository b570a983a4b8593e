"""Command-line entry point: ``riskrank <command> [options]``.

Data files (sample runs, TREC runs, features, qrels, checkpoints) keep their
interchange formats. Reports are TSV files whose leading ``#`` lines record
the command, every resolved option and the SHA-256 of each input, so a
report can be reproduced from itself. Outputs are written to a temporary
file and renamed into place. Exit status: 0 success, 1 domain error (bad
input, missing file), 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from collections.abc import Callable

import numpy as np

from . import __version__
from .calibration import DEFAULT_BINS, DEFAULT_PAIR_CAP, build_pairs, ece, erce, pointwise_predictions
from .core import (
    RankedList,
    SampleRun,
    binarize,
    looks_like_trec_run,
    mean_ranking,
    parse_qrels,
    parse_sample_run,
    parse_trec_run,
    write_qrels,
    write_sample_run,
    write_trec_run,
)
from .errors import DomainError
from .fileio import atomic_write
from .metrics import ap_per_query, cutoff_features, f1_curve, ndcg_per_query, oracle_cutoff, reciprocal_ranks
from .rerank import DEFAULT_ALPHA, RerankPolicy, rerank
from .stats import DEFAULT_ENTROPY_BINS, describe

log = logging.getLogger("riskrank")

# Options naming files; they are recorded by content digest, not by path.
PATH_OPTIONS = {"run", "qrels", "model", "features", "pairs", "ranking", "cutoffs", "out", "out_dir", "figure", "trace"}
# Options that must not influence any output.
UNRECORDED = {"command", "handler", "threads", "verbose"}


class Context:
    """Per-invocation state: resolved options and digests of the inputs read."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.inputs: dict[str, str] = {}

    def read(self, option: str) -> str:
        path = getattr(self.args, option)
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except FileNotFoundError:
            raise DomainError(f"{path}: no such file") from None
        except OSError as exc:
            raise DomainError(f"{path}: {exc.strerror}") from None
        self.inputs[option] = hashlib.sha256(data).hexdigest()
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError:
            raise DomainError(f"{path}: not UTF-8 text") from None

    def config(self) -> dict[str, object]:
        skip = PATH_OPTIONS | UNRECORDED
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in skip}

    def header(self) -> str:
        lines = [f"# riskrank {self.args.command}"]
        for key, value in self.config().items():
            lines.append(f"# config\t{key}\t{_value(value)}")
        for name in sorted(self.inputs):
            lines.append(f"# input\t{name}\tsha256:{self.inputs[name]}")
        return "\n".join(lines) + "\n"


def _value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_value(x) for x in v)
    return str(v)


def _num(v: float) -> str:
    return repr(float(v))


def _emit(ctx: Context, text: str) -> bool:
    """Write the main output to --out, or stdout; True if stdout was used."""
    out = getattr(ctx.args, "out", None)
    if out:
        atomic_write(out, text)
        return False
    sys.stdout.write(text)
    return True


def _table(header: list[str], rows: list[list[str]]) -> str:
    return "\n".join("\t".join(r) for r in [header, *rows]) + "\n"


def _read_run(ctx: Context) -> SampleRun | RankedList:
    text = ctx.read("run")
    return parse_trec_run(text) if looks_like_trec_run(text) else parse_sample_run(text)


def _read_sample_run(ctx: Context) -> SampleRun:
    text = ctx.read("run")
    if looks_like_trec_run(text):
        raise DomainError(f"{ctx.args.run}: expected a sample run, got a TREC run")
    return parse_sample_run(text)


def _read_qrels(ctx: Context):
    qrels, _ = parse_qrels(ctx.read("qrels"))
    return qrels


def _csv(cast: Callable):
    def parse(text: str):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None

    return parse


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


# --- synth / train / score -----------------------------------------------------


def cmd_synth(ctx: Context) -> str:
    from .ranker.synth import SynthConfig, synth_dataset, write_features, write_pairs

    a = ctx.args
    config = SynthConfig(
        dim=a.dim,
        n_queries=a.queries,
        docs_per_query=a.docs,
        train_queries=a.train_queries,
        pairs_per_query=a.pairs_per_query,
        noise=a.noise,
        feature_noise=a.feature_noise,
        hetero=a.hetero,
        shift=a.shift,
        seed=a.seed,
    )
    ds = synth_dataset(config)
    os.makedirs(a.out_dir, exist_ok=True)
    files = {
        "train_pairs.tsv": write_pairs(ds.x_pos, ds.x_neg),
        "eval_features.tsv": write_features(ds.eval),
        "shifted_features.tsv": write_features(ds.shifted),
        "qrels.txt": write_qrels(ds.qrels),
    }
    for name, text in files.items():
        atomic_write(os.path.join(a.out_dir, name), text)
    rows = [[name, hashlib.sha256(text.encode()).hexdigest()] for name, text in files.items()]
    atomic_write(os.path.join(a.out_dir, "synth_report.tsv"), ctx.header() + _table(["file", "sha256"], rows))
    return f"synth: {ds.x_pos.shape[0]} training pairs, {config.n_queries} x {config.docs_per_query} evaluation documents -> {a.out_dir}"


def cmd_train(ctx: Context) -> str:
    from .ranker.model import init_ranker, save_checkpoint
    from .ranker.synth import parse_pairs
    from .ranker.train import TrainConfig, train

    a = ctx.args
    x_pos, x_neg = parse_pairs(ctx.read("pairs"))
    config = TrainConfig(
        loss=a.loss,
        learning_rate=a.learning_rate,
        epochs=a.epochs,
        batch_size=a.batch_size,
        temperature=a.temperature,
        dropout_reg=a.dropout_reg,
        weight_decay=a.weight_decay,
        tau=a.tau,
        seed=a.seed,
        dropout=not a.no_dropout,
        learn_rates=not a.fixed_rates,
        clip_norm=a.clip_norm,
    )
    model = init_ranker(x_pos.shape[1], a.hidden, a.depth, a.drop_rate, a.seed)
    model, trace = train(model, x_pos, x_neg, config)
    meta = {f"config.{k}": _value(v) for k, v in ctx.config().items()}
    meta.update({f"input.{k}": f"sha256:{v}" for k, v in ctx.inputs.items()})
    atomic_write(a.out, save_checkpoint(model, meta))
    if a.trace:
        rows = [[str(i), _num(v)] for i, v in enumerate(trace)]
        atomic_write(a.trace, ctx.header() + _table(["epoch", "loss"], rows))
    rates = " ".join(f"{p:.4f}" for p in model.drop_rates)
    return f"train: final loss {trace[-1]:.6f}, drop rates {rates} -> {a.out}"


def _load_model(ctx: Context):
    from .ranker.model import load_checkpoint

    return load_checkpoint(ctx.read("model"))


def cmd_score(ctx: Context) -> str:
    from .ranker.infer import score_features
    from .ranker.synth import parse_features

    a = ctx.args
    model = _load_model(ctx)
    fs = parse_features(ctx.read("features"))
    run = score_features(model, fs, a.samples, a.seed, a.threads, a.deterministic)
    to_stdout = _emit(ctx, write_sample_run(run))
    n = 1 if a.deterministic else a.samples
    return f"score: {len(fs)} documents in {len(run.queries)} queries, {n} samples each" + (
        "" if to_stdout else f" -> {a.out}"
    )


# --- run analysis ----------------------------------------------------------------


def cmd_stats(ctx: Context) -> str:
    a = ctx.args
    run = _read_sample_run(ctx)
    rows, means, stds = [], [], []
    for qid, docs in run.queries.items():
        for docid, samples in docs:
            st = describe(samples, a.bins)
            rows.append([qid, docid, _num(st.mean), _num(st.variance), _num(st.skew), _num(st.entropy)])
            means.append(st.mean)
            stds.append(st.std)
    _emit(ctx, ctx.header() + _table(["qid", "docid", "mean", "variance", "skew", "entropy"], rows))
    if a.figure:
        from .plots import mean_std_scatter

        mean_std_scatter(means, stds, a.figure)
    return f"stats: {len(rows)} documents, mean sample std {np.mean(stds):.6g}"


def cmd_rerank(ctx: Context) -> str:
    a = ctx.args
    run = _read_sample_run(ctx)
    policy = RerankPolicy(a.direction, a.alpha)
    ranking = rerank(run, policy, a.threads)
    to_stdout = _emit(ctx, write_trec_run(ranking, a.tag))
    summary = f"rerank: {len(ranking.queries)} queries by {policy.direction.value}"
    if policy.direction.value != "mean":
        summary += f" CVaR at alpha {policy.alpha}"
    return summary + ("" if to_stdout else f" -> {a.out}")


def cmd_calibrate(ctx: Context) -> str:
    a = ctx.args
    run = _read_run(ctx)
    qrels = binarize(_read_qrels(ctx), a.binarize_threshold)
    if a.metric == "erce":
        pairs = build_pairs(run, qrels, a.pair_cap, a.seed)
        report, unit = erce(pairs, a.bins), "pairs"
    else:
        if isinstance(run, RankedList):
            run = SampleRun({q: [(d, [s]) for d, s in docs] for q, docs in run.queries.items()})
        report, unit = ece(pointwise_predictions(run, qrels), a.bins), "documents"
    header = ["bin", "lower", "upper", "count", "confidence", "accuracy", "gap"]
    rows = [
        [str(i), _num(b.lower), _num(b.upper), str(b.count), _num(b.confidence), _num(b.accuracy), _num(b.gap)]
        for i, b in enumerate(report.bins)
    ]
    pretty = [f"# {a.metric.upper()} = {report.value:.6f} over {report.n} {unit}"]
    pretty.append("# " + " ".join(f"{h:>10}" for h in header))
    for b, row in zip(report.bins, rows):
        cells = [row[0], f"{b.lower:.4f}", f"{b.upper:.4f}", row[3], f"{b.confidence:.4f}", f"{b.accuracy:.4f}", f"{b.gap:.4f}"]
        pretty.append("# " + " ".join(f"{c:>10}" for c in cells))
    text = ctx.header() + "\n".join(pretty) + "\n" + _table(header, rows) + f"{a.metric}\t{_num(report.value)}\n"
    _emit(ctx, text)
    return f"calibrate: {a.metric.upper()} {report.value:.6f} over {report.n} {unit} in {len(report.bins)} bins"


def _split_metric(name: str) -> tuple[str, int | None]:
    base, sep, k = name.lower().partition("@")
    if not sep and base in ("mrr", "map", "f1-ratio"):
        return base, None
    if sep and base in ("ndcg", "f1") and k.isdigit() and int(k) >= 1:
        return base, int(k)
    raise DomainError(f"unknown metric {name!r}")


def _metric_name(name: str) -> str:
    try:
        base, k = _split_metric(name)
    except DomainError:
        raise argparse.ArgumentTypeError(f"unknown metric {name!r}; use mrr, map, ndcg@K, f1@K or f1-ratio") from None
    return base if k is None else f"{base}@{k}"


def _read_cutoffs(ctx: Context) -> dict[str, int]:
    out = {}
    for n, line in enumerate(ctx.read("cutoffs").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"{ctx.args.cutoffs}: line {n}: expected qid and cutoff")
        try:
            out[parts[0]] = int(parts[1])
        except ValueError:
            raise DomainError(f"{ctx.args.cutoffs}: line {n}: bad cutoff {parts[1]!r}") from None
    return out


def cmd_evaluate(ctx: Context) -> str:
    a = ctx.args
    run = _read_run(ctx)
    ranking = run if isinstance(run, RankedList) else mean_ranking(run)
    graded = _read_qrels(ctx)
    qrels = binarize(graded, a.binarize_threshold)
    judged = [q for q in ranking if q in graded.query_ids()]
    rows, summary = [], []
    for label in a.metric:
        base, k = _split_metric(label)
        if base == "mrr":
            per_query = reciprocal_ranks(ranking, qrels)
        elif base == "map":
            per_query = ap_per_query(ranking, qrels)
        elif base == "ndcg":
            per_query = ndcg_per_query(ranking, graded, k)
        elif base == "f1":
            per_query = {}
            for q in judged:
                curve = f1_curve(ranking, qrels, q)
                per_query[q] = float(curve[min(k, curve.size) - 1])
        else:
            if not a.cutoffs:
                raise DomainError("f1-ratio needs --cutoffs")
            predicted = _read_cutoffs(ctx)
            oracle = oracle_cutoff(ranking, qrels)
            per_query = {}
            for q, best in oracle.items():
                if best.f1 == 0.0:
                    continue
                if q not in predicted:
                    raise DomainError(f"no predicted cutoff for query {q!r}")
                curve = f1_curve(ranking, qrels, q)
                if not 1 <= predicted[q] <= curve.size:
                    raise DomainError(f"predicted cutoff {predicted[q]} out of range for query {q!r}")
                per_query[q] = float(curve[predicted[q] - 1] / best.f1)
        if not per_query:
            raise DomainError(f"{label}: every query was skipped (no relevant judgments)")
        value = float(np.mean(list(per_query.values())))
        rows.append([label, _num(value), str(len(per_query)), str(len(judged) - len(per_query))])
        summary.append(f"{label} {value:.4f}")
    _emit(ctx, ctx.header() + _table(["metric", "value", "queries", "skipped"], rows))
    return "evaluate: " + ", ".join(summary)


def cmd_cutoff_features(ctx: Context) -> str:
    a = ctx.args
    run = _read_sample_run(ctx)
    ranking = parse_trec_run(ctx.read("ranking")) if a.ranking else mean_ranking(run)
    rows = cutoff_features(run, ranking)
    table = [
        [r.query_id, r.doc_id, str(r.rank), _num(r.mean), _num(r.std), _num(r.skew), _num(r.entropy)] for r in rows
    ]
    _emit(ctx, ctx.header() + _table(["qid", "docid", "rank", "mean", "std", "skew", "entropy"], table))
    if a.figure:
        from .plots import std_by_rank

        std_by_rank([r.rank for r in rows], [r.std for r in rows], a.figure)
    return f"cutoff-features: {len(rows)} rows for {len(ranking.queries)} queries"


# --- model probes ------------------------------------------------------------------


def cmd_bound_check(ctx: Context) -> str:
    from .ranker.bound import bound_probe
    from .ranker.synth import parse_features

    a = ctx.args
    model = _load_model(ctx)
    rng = np.random.default_rng(a.seed)
    if a.features:
        directions = parse_features(ctx.read("features")).features[: a.directions]
    else:
        directions = rng.normal(size=(a.directions, model.input_dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    rows, conf, bound = [], [], float("nan")
    for i, x in enumerate(directions):
        probe = bound_probe(model, x, a.deltas, a.samples, rng)
        conf.append([p.confidence for p in probe])
        for p in probe:
            bound = p.bound
            rows.append([str(i), _num(p.delta), _num(p.confidence), _num(p.bound), _num(p.confidence - p.bound)])
    _emit(ctx, ctx.header() + _table(["direction", "delta", "confidence", "bound", "excess"], rows))
    if a.figure:
        from .plots import bound_curves

        bound_curves(a.deltas, np.array(conf), bound, a.figure)
    worst = float(np.max(np.array(conf) - bound))
    verdict = "within" if worst <= a.tolerance else "EXCEEDS"
    return f"bound-check: bound {bound:.6f}, max confidence {np.max(conf):.6f}, excess {worst:+.6f} ({verdict} tolerance {a.tolerance})"


def cmd_bench(ctx: Context) -> str:
    from .ranker.infer import sampling_overhead

    a = ctx.args
    rows = sampling_overhead(a.depths, a.extra, a.docs, a.dim, a.hidden, a.repeats, a.seed)
    table = [[str(r.depth), f"{r.base_us:.3f}", f"{r.overhead_us:.3f}"] for r in rows]
    _emit(ctx, ctx.header() + _table(["depth", "base_us_per_doc", "overhead_us_per_doc"], table))
    ratio = rows[-1].overhead_us / rows[0].overhead_us
    worst = max(r.overhead_us for r in rows)
    return (
        f"bench: {a.extra} extra samples cost {worst:.1f} us/doc at most; "
        f"overhead ratio depth {rows[-1].depth} / depth {rows[0].depth} = {ratio:.3f}"
    )


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1, help="parallelism cap; never changes results")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="riskrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"riskrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def command(name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        return p

    p = command("synth", cmd_synth, "write a seeded synthetic corpus (pairs, features, qrels)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dim", type=_positive_int, default=16)
    p.add_argument("--queries", type=_positive_int, default=200)
    p.add_argument("--docs", type=_positive_int, default=100)
    p.add_argument("--train-queries", type=_positive_int, default=200)
    p.add_argument("--pairs-per-query", type=_positive_int, default=50)
    p.add_argument("--noise", type=float, default=0.3, help="label noise std")
    p.add_argument("--feature-noise", type=float, default=1.0)
    p.add_argument("--hetero", type=float, default=4.0, help="growth of feature noise as relevance falls")
    p.add_argument("--shift", type=float, default=8.0, help="length of the shift applied to the shifted split")
    p.add_argument("--seed", type=int, default=0)

    p = command("train", cmd_train, "train the ranker on feature pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="optional per-epoch loss report")
    p.add_argument("--hidden", type=_positive_int, default=32)
    p.add_argument("--depth", type=_positive_int, default=2, help="trunk layers")
    p.add_argument("--drop-rate", type=float, default=0.1, help="initial drop rate of both gates")
    p.add_argument("--loss", choices=("relaxed_hinge", "pairwise_ce"), default="relaxed_hinge")
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--epochs", type=_positive_int, default=30)
    p.add_argument("--batch-size", type=_positive_int, default=64)
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--dropout-reg", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=1e-5)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--clip-norm", type=float, default=10.0)
    p.add_argument("--no-dropout", action="store_true", help="train a plain deterministic network")
    p.add_argument("--fixed-rates", action="store_true", help="keep drop rates at their initial value")
    p.add_argument("--seed", type=int, default=0)

    p = command("score", cmd_score, "score a feature file into a sample run")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out")
    p.add_argument("--samples", type=_positive_int, default=150)
    p.add_argument("--deterministic", action="store_true", help="one mean-network score per document")
    p.add_argument("--seed", type=int, default=0)

    p = command("stats", cmd_stats, "per-document mean, variance, skew and entropy of a sample run")
    p.add_argument("--run", required=True)
    p.add_argument("--out")
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_ENTROPY_BINS, help="entropy histogram bins")
    p.add_argument("--figure", help="also draw mean against std")

    p = command("rerank", cmd_rerank, "rank a sample run by mean or CVaR")
    p.add_argument("--run", required=True)
    p.add_argument("--out")
    p.add_argument("--direction", choices=("mean", "optimistic", "pessimistic", "opt", "pess"), default="mean")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--tag", default="riskrank")

    p = command("calibrate", cmd_calibrate, "ERCE or ECE report of a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out")
    p.add_argument("--metric", choices=("erce", "ece"), default="erce")
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    p.add_argument("--binarize-threshold", type=_positive_int, default=1)
    p.add_argument("--pair-cap", type=_positive_int, default=DEFAULT_PAIR_CAP)
    p.add_argument("--seed", type=int, default=0)

    p = command("evaluate", cmd_evaluate, "ranking metrics of a TREC run or sample run (mean order)")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out")
    p.add_argument("--metric", type=_metric_name, action="append", help="mrr, map, ndcg@K, f1@K or f1-ratio; repeatable")
    p.add_argument("--binarize-threshold", type=_positive_int, default=1)
    p.add_argument("--cutoffs", help="qid and predicted cutoff per line, for f1-ratio")

    p = command("cutoff-features", cmd_cutoff_features, "rank-ordered <mean, std, skew, entropy> rows")
    p.add_argument("--run", required=True)
    p.add_argument("--ranking", help="TREC run giving the order (default: mean order)")
    p.add_argument("--out")
    p.add_argument("--figure", help="also draw std against rank")

    p = command("bound-check", cmd_bound_check, "probe the output-layer confidence ceiling")
    p.add_argument("--model", required=True)
    p.add_argument("--features", help="probe these rows instead of random unit directions")
    p.add_argument("--out")
    p.add_argument("--directions", type=_positive_int, default=50)
    p.add_argument("--deltas", type=_csv(float), default=[1.0, 10.0, 100.0, 1000.0, 10000.0])
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figure", help="also draw confidence against input scale")

    p = command("bench", cmd_bench, "time the per-document cost of extra samples")
    p.add_argument("--out")
    p.add_argument("--depths", type=_csv(_positive_int), default=[2, 8])
    p.add_argument("--extra", type=_positive_int, default=100)
    p.add_argument("--docs", type=_positive_int, default=300)
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--dim", type=_positive_int, default=16)
    p.add_argument("--hidden", type=_positive_int, default=32)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _check_no_overwrite(args: argparse.Namespace) -> None:
    outputs = {os.path.realpath(getattr(args, k)) for k in ("out", "figure", "trace") if getattr(args, k, None)}
    for k in ("run", "qrels", "model", "features", "pairs", "ranking", "cutoffs"):
        path = getattr(args, k, None)
        if path and os.path.realpath(path) in outputs:
            raise DomainError(f"{path}: output would overwrite an input")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "evaluate" and not args.metric:
        args.metric = ["ndcg@20", "map", "mrr"]
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="riskrank: %(message)s")
    ctx = Context(args)
    try:
        _check_no_overwrite(args)
        summary = args.handler(ctx)
    except DomainError as exc:
        print(f"riskrank {args.command}: error: {exc}", file=sys.stderr)
        return 1
    to_stderr = getattr(args, "out", None) is None and args.command not in ("synth", "train")
    print(summary, file=sys.stderr if to_stderr else sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
