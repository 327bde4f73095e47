"""``graphlet-lp`` command line.

Exit codes: 0 success, 1 usage, 2 data error, 3 validation failure.
Every artifact-producing command writes ``manifest.json`` next to its
outputs; everything except the ``timings`` block is reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import domains as dom
from .atlas import FEATURE_NAMES
from .boosting import BoostedModel, Hyperparameters
from .errors import AnalysisError, ConfigurationError, DataError, ValidationError
from .explain import aggregate_importance, audit_local_accuracy
from .graph import Graph, load_edge_list, parse_edge_list
from .metrics import MetricSet, summarize_runs
from .oracle import brute_force_orbit_census
from .orbits import edge_orbit_table, node_orbit_table
from .pipeline import ModelSpec, explain_run, run_once
from .predictors import KatzConfig
from .protocol import FeatureMatrix, SplitPlan, audit_split, build_phase_matrices, make_split

THREADS_ENV = "GRAPHLET_LP_THREADS"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- helpers -----------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _versions() -> dict:
    def v(name):
        try:
            return metadata.version(name)
        except metadata.PackageNotFoundError:
            return None
    return {"graphlet_lp": v("artifact"), "numpy": np.__version__, "scipy": v("scipy"),
            "python": platform.python_version()}


def _write(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return str(path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


class Manifest:
    """Collects what a command read, how it was configured and what it wrote."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.config = {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func", "config") and not callable(v)}
        self.config["threads"] = _threads(args)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.seeds: list[int] = []
        self.notes: dict = {}
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def add_input(self, path):
        self.inputs[str(path)] = _sha256(path)

    def tick(self, label: str):
        self.timings[label] = round(time.perf_counter() - self._t0, 6)

    def write(self, out_dir: Path):
        self.tick("total")
        body = {"command": self.command, "config": self.config, "seeds": self.seeds,
                "inputs": self.inputs, "versions": _versions(), "outputs": sorted(self.outputs),
                "notes": self.notes, "timings": self.timings}
        _write(out_dir / "manifest.json", _dump(body))


def _threads(args) -> int:
    if args.threads:
        return max(1, int(args.threads))
    raw = os.environ.get(THREADS_ENV, "") or "1"
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV}={raw!r} is not an integer") from None


def _load_graph(path) -> Graph:
    if not os.path.isfile(path):
        raise DataError(f"cannot read graph file {path}")
    return load_edge_list(path)


def _hp(args) -> Hyperparameters:
    try:
        return Hyperparameters(args.max_trees, args.max_depth, args.learning_rate, args.l2,
                               args.min_split_gain, args.early_stopping_rounds)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _katz(args) -> KatzConfig:
    try:
        return KatzConfig(args.katz_beta, args.katz_length)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _labels_csv(g: Graph, header, pairs, table) -> str:
    lines = [",".join(header)]
    for (x, y), row in zip(pairs.tolist(), table.tolist()):
        lines.append(",".join(map(str, [g.label_of(x), g.label_of(y), *row])))
    return "\n".join(lines) + "\n"


# -- orbits ------------------------------------------------------------------

def cmd_orbits(args) -> int:
    man = Manifest("orbits", args)
    g = _load_graph(args.graph)
    man.add_input(args.graph)
    out = Path(args.out)
    workers = _threads(args)
    want_nodes = args.nodes or not (args.edges or args.pairs)

    pairs = None
    if args.pairs:
        if not os.path.isfile(args.pairs):
            raise DataError(f"cannot read pair list {args.pairs}")
        man.add_input(args.pairs)
        raw = parse_edge_list(args.pairs)
        try:
            pairs = np.array([[g.index_of(a), g.index_of(b)] for a, b in raw], dtype=np.int64).reshape(-1, 2)
        except (KeyError, IndexError, ValueError) as exc:
            raise DataError(f"pair list names a node absent from the graph: {exc}") from None
        if (pairs[:, 0] == pairs[:, 1]).any():
            raise DataError("pair list contains a self-pair")
    elif args.edges:
        pairs = g.edges()

    node_table = None
    if want_nodes:
        node_table = node_orbit_table(g, workers=workers)
        lines = ["node_id," + ",".join(FEATURE_NAMES[:15])]
        lines += [",".join(map(str, [g.label_of(i), *row])) for i, row in enumerate(node_table.tolist())]
        man.outputs.append(_write(out / "nodes.csv", "\n".join(lines) + "\n"))
    edge_table = None
    if pairs is not None:
        edge_table = edge_orbit_table(g, pairs, workers=workers)
        man.outputs.append(_write(out / "pairs.csv",
                                  _labels_csv(g, ["x", "y", *FEATURE_NAMES[15:]], pairs, edge_table)))
    man.tick("count")

    if args.oracle:
        census = brute_force_orbit_census(g, pairs if pairs is not None else g.edges())
        if node_table is None:
            node_table = node_orbit_table(g, workers=workers)
        if edge_table is None:
            edge_table = edge_orbit_table(g, census.pairs, workers=workers)
        node_bad = int((node_table != census.node).any(axis=1).sum())
        edge_bad = int((edge_table != census.edge).any(axis=1).sum())
        man.notes["oracle"] = {"node_mismatches": node_bad, "pair_mismatches": edge_bad}
        man.tick("oracle")
        man.write(out)
        if node_bad or edge_bad:
            raise ValidationError(f"oracle mismatch: {node_bad} node rows, {edge_bad} pair rows")
        print(f"oracle: {g.node_count} nodes and {len(census.pairs)} pairs agree")
        return EXIT_OK
    man.write(out)
    return EXIT_OK


# -- run ---------------------------------------------------------------------

def _violin_csv(test: FeatureMatrix) -> str:
    lines = ["predictor,group,x,y,score,normalized,degenerate"]
    for j, name in enumerate(test.feature_names):
        for group, lab in (("existent", 1), ("nonexistent", 0)):
            mask = test.labels == lab
            scores = test.values[mask, j]
            norm, flat = dom.violin_data(scores)
            for (x, y), s, v in zip(test.pairs[mask].tolist(), scores.tolist(), norm.tolist()):
                lines.append(f"{name},{group},{x},{y},{s!r},{v!r},{int(flat)}")
    return "\n".join(lines) + "\n"


def _predictions_csv(test: FeatureMatrix, prob) -> str:
    lines = ["x,y,label,probability"]
    lines += [f"{x},{y},{lab},{p!r}" for (x, y), lab, p in
              zip(test.pairs.tolist(), test.labels.tolist(), prob.tolist())]
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    if args.runs < 1:
        raise ConfigurationError("--runs must be at least 1")
    man = Manifest("run", args)
    spec = ModelSpec.parse(args.model)
    g = _load_graph(args.graph)
    man.add_input(args.graph)
    out = Path(args.out)
    hp, katz, workers = _hp(args), _katz(args), _threads(args)
    man.notes["training_negatives"] = "independent draw, disjoint from validation and test negatives"
    man.notes["katz"] = {"beta": katz.beta, "max_length": katz.max_length, "converges": katz.converges_on(g)}

    per_run = []
    for i in range(args.runs):
        seed = args.seed + i
        man.seeds.append(seed)
        plan = make_split(g, seed)
        audit_split(g, plan)
        orbit = build_phase_matrices(g, plan, workers=workers)
        res = run_once(g, spec.model_id, seed, hp, args.threshold, katz, workers, orbit=orbit, plan=plan)
        rd = out / f"run_{i:03d}"
        man.outputs += [
            _write(rd / "split.json", plan.to_json() + "\n"),
            _write(rd / "train.csv", res.matrices.train.to_csv()),
            _write(rd / "validation.csv", res.matrices.validation.to_csv()),
            _write(rd / "test.csv", res.matrices.test.to_csv()),
            _write(rd / "model.json", res.model.to_json() + "\n"),
            _write(rd / "predictions.csv", _predictions_csv(res.matrices.test, res.probabilities)),
        ]
        if i == 0:
            man.outputs.append(_write(out / "violin.csv", _violin_csv(res.matrices.test)))
        c = res.confusion
        per_run.append({"run": i, "seed": seed, **res.metrics.as_dict(),
                        "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "trees": len(res.model.trees)})
        man.tick(f"run_{i:03d}")

    sets = [MetricSet(r["auc"], r["precision"], r["recall"], r["f1"]) for r in per_run]
    metrics = {"model": spec.model_id, "features": list(spec.features), "threshold": args.threshold,
               "runs": per_run, "aggregate": summarize_runs(sets)}
    man.outputs.append(_write(out / "metrics.json", _dump(metrics)))
    man.write(out)
    agg = metrics["aggregate"]
    print(f"{spec.model_id}: AUC {agg['auc']['mean']:.4f} +/- {agg['auc']['std']:.4f} over {args.runs} run(s)")
    return EXIT_OK


# -- explain -----------------------------------------------------------------

def _run_dirs(path: Path) -> list[Path]:
    if (path / "model.json").is_file():
        return [path]
    found = sorted(p for p in path.glob("run_*") if (p / "model.json").is_file())
    if not found:
        raise DataError(f"{path} holds no model.json (expected a run directory from 'run')")
    return found


def cmd_explain(args) -> int:
    man = Manifest("explain", args)
    src, out = Path(args.run_dir), Path(args.out)
    dirs = _run_dirs(src)
    for rd in dirs:
        for name in ("model.json", "train.csv", "test.csv"):
            if not (rd / name).is_file():
                raise DataError(f"{rd} is missing {name}")
            man.add_input(rd / name)
        model = BoostedModel.from_json((rd / "model.json").read_text(encoding="utf-8"))
        train_m = FeatureMatrix.from_csv(str(rd / "train.csv"))
        test_m = FeatureMatrix.from_csv(str(rd / "test.csv"))
        seed = SplitPlan.from_json((rd / "split.json").read_text()).seed if (rd / "split.json").is_file() else 0
        man.seeds.append(seed)
        if tuple(train_m.feature_names) != tuple(model.feature_names):
            raise DataError(f"{rd}: matrix columns do not match the model's features")
        report = explain_run(model, test_m, train_m, args.background, seed)
        audit_local_accuracy(report)
        try:
            summary = json.loads(aggregate_importance(report).to_json(top_k=args.top_k))
        except ConfigurationError:
            summary = {"base_value": report.base_value,
                       "mean_abs": dict(zip(report.feature_names, report.mean_abs.tolist())),
                       "mean_signed": dict(zip(report.feature_names, report.mean_signed.tolist())),
                       "category_shares": None, "top": None}
        summary["background_size"] = report.background_size
        summary["convention"] = "interventional, margin scale"
        summary["local_accuracy_gap"] = report.local_accuracy_gap()
        od = out / rd.name if len(dirs) > 1 or rd != src else out
        man.outputs += [_write(od / "shap.csv", report.to_csv(test_m.pairs, test_m.labels)),
                        _write(od / "shap_summary.json", _dump(summary))]
        man.tick(rd.name)
    man.write(out)
    print(f"explained {len(dirs)} run(s)")
    return EXIT_OK


# -- domains -----------------------------------------------------------------

def _network_job(job):
    entry, seed, runs, hp, background = job
    try:
        g = load_edge_list(entry.path)
        sets, mean_abs, signed = [], None, None
        for i in range(runs):
            res = run_once(g, "od", seed + i, hp)
            sets.append(res.metrics)
            if i == 0:
                report = explain_run(res.model, res.matrices.test, res.matrices.train, background, seed)
                audit_local_accuracy(report)
                mean_abs, signed = report.mean_abs.tolist(), report.mean_signed.tolist()
        return dom.NetworkRecord(entry.name, entry.path, entry.domain, entry.subdomain, signed, mean_abs,
                                 summarize_runs(sets)), None
    except (DataError, ValidationError, OSError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_domains(args) -> int:
    man = Manifest("domains", args)
    if not os.path.isfile(args.index):
        raise DataError(f"cannot read corpus index {args.index}")
    man.add_input(args.index)
    entries = dom.read_corpus_index(args.index)
    for e in entries:
        if os.path.isfile(e.path):
            man.add_input(e.path)
    out = Path(args.out)
    hp, workers = _hp(args), _threads(args)
    man.seeds = [args.seed + i for i in range(args.runs)]
    jobs = [(e, args.seed, args.runs, hp, args.background) for e in entries]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_network_job, jobs))
    else:
        results = [_network_job(j) for j in jobs]
    records = [r for r, _ in results if r is not None]
    failures = {e.name: err for e, (_, err) in zip(entries, results) if err}
    man.notes["failures"] = failures
    man.notes["signature"] = args.signature
    man.tick("networks")
    if len(records) < 3:
        man.write(out)
        raise AnalysisError(f"only {len(records)} network(s) succeeded; domain analysis needs 3")

    man.outputs.append(_write(out / "records.jsonl", "".join(r.to_json() + "\n" for r in records)))
    sig = np.array([r.shap_signature if args.signature == "signed" else r.mean_abs for r in records])
    pca = dom.pca_2d(sig)
    man.notes["explained_variance_ratio"] = pca.explained_variance_ratio.tolist()
    man.outputs.append(_write(out / "pca.csv", dom.pca_csv(records, pca)))

    labels = [r.domain for r in records]
    stats = []
    for d in sorted(set(labels)):
        if labels.count(d) >= 2:
            stats.append(dom.clustering_stat(pca.coords, labels, d, args.S, args.seed))
    man.outputs.append(_write(out / "clustering.csv", dom.clustering_csv(stats)))

    lines = ["granularity,group_by,group,item,rate"]
    for gran in ("feature", "category"):
        for by in ("domain", "subdomain"):
            for grp, table in dom.winning_rates(records, granularity=gran, group_by=by).items():
                lines += [f"{gran},{by},{grp},{item},{rate!r}" for item, rate in table.items()]
    man.outputs.append(_write(out / "winning_rates.csv", "\n".join(lines) + "\n"))
    man.tick("analysis")
    man.write(out)
    for s in stats:
        p = s.p_value if isinstance(s.p_value, str) else f"{s.p_value:.3f}"
        print(f"{s.domain}: D={s.d_bar:.4g} null={s.d_tilde_mean:.4g} p={p}")
    if failures:
        print(f"{len(failures)} network(s) failed; see manifest.json", file=sys.stderr)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _model_id(text: str) -> str:
    try:
        return ModelSpec.parse(text).model_id
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _hp_flags(p):
    d = Hyperparameters()
    p.add_argument("--max-trees", type=int, default=d.max_trees, help="boosting rounds (default %(default)s)")
    p.add_argument("--max-depth", type=int, default=d.max_depth, help="tree depth (default %(default)s)")
    p.add_argument("--learning-rate", type=float, default=d.learning_rate, help="shrinkage (default %(default)s)")
    p.add_argument("--l2", type=float, default=d.l2_leaf_regularization,
                   help="L2 penalty on leaf weights (default %(default)s)")
    p.add_argument("--min-split-gain", type=float, default=d.min_split_gain,
                   help="gain a split must exceed (default %(default)s)")
    p.add_argument("--early-stopping-rounds", type=int, default=d.early_stopping_rounds,
                   help="rounds without validation AUC gain before stopping (default %(default)s)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker processes (default: ${THREADS_ENV} or 1); output does not depend on it")
    common.add_argument("--config", default=None,
                        help="JSON file of flag defaults (flat keys, e.g. {\"runs\": 10}); flags override it")

    parser = _Parser(prog="graphlet-lp", description="Graphlet orbit degrees for link prediction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("orbits", parents=[common], help="node and pair orbit degree tables")
    p.add_argument("graph", help="edge list file")
    p.add_argument("--out", required=True, help="output directory (nodes.csv, pairs.csv)")
    p.add_argument("--nodes", action="store_true", help="write the node table (default when nothing else is asked)")
    p.add_argument("--edges", action="store_true", help="write the pair table for every edge")
    p.add_argument("--pairs", default=None, help="file of node-label pairs to score instead of the edges")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force (graphs <= 200 nodes)")
    p.set_defaults(func=cmd_orbits)
    subs["orbits"] = p

    p = sub.add_parser("run", parents=[common], help="split, train and evaluate a model")
    p.add_argument("graph", help="edge list file")
    p.add_argument("--model", type=_model_id, default="od",
                   help="od | n-only | m-only | single:<N1..M12> | classical:<PA,CN,AA,RA,CAR,CN_L3,RA_L3,KATZ,MS>")
    p.add_argument("--runs", type=int, default=10, help="independent runs (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="run i uses seed + i (default %(default)s)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threshold", type=float, default=0.5, help="probability cut for precision/recall/F1")
    p.add_argument("--katz-beta", type=float, default=KatzConfig().beta, help="Katz damping")
    p.add_argument("--katz-length", type=int, default=KatzConfig().max_length, help="longest Katz walk")
    _hp_flags(p)
    p.set_defaults(func=cmd_run)
    subs["run"] = p

    p = sub.add_parser("explain", parents=[common], help="SHAP values for trained runs")
    p.add_argument("run_dir", help="output of 'run' or one of its run_NNN directories")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--background", type=int, default=100, help="background rows from the training matrix")
    p.add_argument("--top-k", type=int, default=10, help="rows in the summary's top table")
    p.set_defaults(func=cmd_explain)
    subs["explain"] = p

    p = sub.add_parser("domains", parents=[common], help="corpus PCA, clustering and winning rates")
    p.add_argument("index", help="CSV with columns path,name,domain,subdomain")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--S", type=int, default=100, help="null-model runs (default %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1, help="runs per network for the metric aggregate")
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--signature", choices=("signed", "abs"), default="signed",
                   help="mean signed or mean absolute SHAP as the PCA input")
    _hp_flags(p)
    p.set_defaults(func=cmd_domains)
    subs["domains"] = p
    return parser, subs


def _apply_config(argv, parser, subs):
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("--config")
    pre, rest = peek.parse_known_args(argv)
    command = next((a for a in rest if a in subs), None)
    if not pre.config or command is None:
        return
    try:
        with open(pre.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {pre.config}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"config {pre.config} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise DataError("config file must hold a JSON object")
    sp = subs[command]
    known = {a.dest for a in sp._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - known)
    if unknown:
        sp.error(f"unknown config keys: {', '.join(unknown)}")
    sp.set_defaults(**cfg)
    for a in sp._actions:
        if a.dest in cfg:
            a.required = False


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        _apply_config(argv, parser, subs)
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
