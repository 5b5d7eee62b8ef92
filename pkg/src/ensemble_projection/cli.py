"""Command-line entry point: ``ensproj <subcommand> [flags]``.

Every subcommand writes a JSON report (with ``schema_version``) and, where
it produces curves, headerless CSV files into ``--out``.  Output depends
only on the flags and ``--seed``; ``--threads`` changes speed, not results,
and is therefore not echoed into reports.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, clustering, ensemble, evaluation
from .dataset_io import FORMATS, Dataset, load_dataset, load_features, save_dataset, save_features
from .errors import EPError, InvalidConfig
from .geometry import normalize_rows
from .sampling import DESK_PARAMS, EPParams
from .synth import BlobSpec, make_blobs

SCHEMA_VERSION = 1
PRESETS = {"paper": dict(T=100, r=30, n=6, m=50), "desk": DESK_PARAMS}


# --- argument helpers ----------------------------------------------------------

def _int_list(text: str):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _per_class(text: str):
    if text in evaluation.PER_CLASS_PRESETS:
        return list(evaluation.PER_CLASS_PRESETS[text])
    return _int_list(text)


def _choice_list(choices):
    def parse(text):
        vals = [v.strip() for v in text.split(",") if v.strip()]
        bad = [v for v in vals if v not in choices]
        if bad or not vals:
            raise argparse.ArgumentTypeError(f"choose from {','.join(choices)}; got {text!r}")
        return vals
    return parse


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("EP_THREADS", "1")))
    except ValueError:
        return 1


def _add_common(p, features=True, labels=False):
    if features:
        p.add_argument("--features", required=True, help="feature matrix file")
    if labels:
        p.add_argument("--labels", required=True, help="label file, one 0-based id per line")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: $EP_THREADS or 1)")
    p.add_argument("--l2-normalize", action="store_true",
                   help="scale input feature rows to unit length first")


def _add_ep(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default="paper")
    for name in ("T", "r", "n", "m"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--c-reg", type=float, default=15.0,
                   help="inverse L2 strength for base learners and downstream LR")
    p.add_argument("--ep-normalize", choices=("none", "l2"), default="none")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensproj", description="Ensemble Projection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an EP model and save it")
    _add_common(p)
    _add_ep(p)

    p = sub.add_parser("project", help="map features through a saved EP model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--ep-normalize", choices=("none", "l2"), default="none")

    for name, help_ in (("ssl", "transductive semi-supervised evaluation"),
                        ("selftaught", "EP fitted on --pool, evaluated on --features")):
        p = sub.add_parser(name, help=help_)
        _add_common(p, labels=True)
        _add_ep(p)
        if name == "selftaught":
            p.add_argument("--pool", required=True, help="unlabelled feature matrix for fitting")
        p.add_argument("--per-class", type=_per_class, default=[1, 2, 5, 10],
                       help="comma list or preset name (" + ",".join(evaluation.PER_CLASS_PRESETS) + ")")
        p.add_argument("--runs", type=int, default=5)
        p.add_argument("--classifier", type=_choice_list(evaluation.CLASSIFIERS), default=["logreg"])
        p.add_argument("--feature", type=_choice_list(evaluation.FEATURES), default=["raw", "ep"])

    p = sub.add_parser("cluster", help="k-means purity on raw and/or EP features")
    _add_common(p, labels=True)
    _add_ep(p)
    p.add_argument("--k", type=int, default=None, help="clusters (default: number of classes)")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--feature", type=_choice_list(evaluation.FEATURES), default=["raw", "ep"])

    p = sub.add_parser("observe1", help="label co-occurrence curve p(k)")
    _add_common(p, labels=True)
    p.add_argument("--k", type=int, default=20, help="largest neighbour rank")
    p.add_argument("--averaging", choices=("class", "image"), default="class")

    p = sub.add_parser("observe2", help="majority vote over label-corrupted weak learners")
    _add_common(p, labels=True)
    p.add_argument("--noise", type=_float_list, default=[0.0, 0.4, 0.8])
    p.add_argument("--t-grid", type=_int_list, default=[1, 10, 100, 500])
    p.add_argument("--subsample", type=float, default=0.3)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--relabel", choices=analysis.RELABEL_MODES, default="other")
    p.add_argument("--c-reg", type=float, default=15.0)

    p = sub.add_parser("synth", help="write a Gaussian blob dataset")
    _add_common(p, features=False)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--samples-per-class", type=int, default=50)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--spread", type=float, default=10.0)
    p.add_argument("--std", type=float, default=1.0)
    return parser


# --- shared plumbing -----------------------------------------------------------

def _params(args) -> EPParams:
    base = dict(PRESETS[args.preset])
    for name in ("T", "r", "n", "m"):
        if getattr(args, name) is not None:
            base[name] = getattr(args, name)
    return EPParams(seed=args.seed, c_reg=args.c_reg, **base)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "threads"}


def _load(args, labels=True) -> Dataset:
    d = load_dataset(args.features, args.labels if labels else None, args.format)
    if args.l2_normalize:
        d = Dataset(normalize_rows(d.features, "l2"), d.labels, d.n_classes)
    return d


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, rows) -> None:
    path.write_text("".join(",".join(_fmt(v) for v in row) + "\n" for row in rows), encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(args, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _config(args), **body}


def _ep_model(args, d: Dataset, params: EPParams):
    return ensemble.fit(d.without_labels(), params, threads=args.threads)


# --- subcommands -----------------------------------------------------------------

def cmd_fit(args) -> None:
    d = _load(args, labels=False)
    model = ensemble.fit(d, _params(args), threads=args.threads)
    ensemble.save_model(model, args.out)


def cmd_project(args) -> None:
    model = ensemble.load_model(args.model)
    X = load_features(args.features, args.format)
    if args.l2_normalize:
        X = normalize_rows(X, "l2")
    F = normalize_rows(ensemble.project_all(model, X), args.ep_normalize)
    save_features(F, args.out, args.format)


def _ssl_like(args, target: Dataset, model) -> None:
    out = _outdir(args)
    results = []
    for feature in args.feature:
        if feature == "ep":
            F = evaluation.ep_features(model, target.features, args.ep_normalize)
        else:
            F = target.features
        for classifier in args.classifier:
            rows = []
            for pc in args.per_class:
                rep = evaluation.evaluate_features(
                    F, target.labels, target.n_classes, pc, args.runs, classifier, args.seed,
                    args.c_reg, args.threads, {"feature": feature})
                results.append(rep.to_dict())
                rows.append((pc, rep.mean, rep.std))
            _write_csv(out / f"curve_{feature}_{classifier}.csv", rows)
    _write_json(out / "report.json", _report(args, results=results))


def cmd_ssl(args) -> None:
    d = _load(args)
    params = _params(args)
    model = _ep_model(args, d, params) if "ep" in args.feature else None
    _ssl_like(args, d, model)


def cmd_selftaught(args) -> None:
    target = _load(args)
    pool = Dataset(load_features(args.pool, args.format))
    if args.l2_normalize:
        pool = Dataset(normalize_rows(pool.features, "l2"))
    if pool.n_dims != target.n_dims:
        raise InvalidConfig(f"pool has {pool.n_dims} dims, target has {target.n_dims}")
    model = _ep_model(args, pool, _params(args)) if "ep" in args.feature else None
    _ssl_like(args, target, model)


def cmd_cluster(args) -> None:
    d = _load(args)
    params = _params(args)
    out = _outdir(args)
    model = _ep_model(args, d, params) if "ep" in args.feature else None
    results = []
    for feature in args.feature:
        rep = clustering.run_clustering_experiment(
            d, params, feature, restarts=args.restarts, seeds=args.seeds, k=args.k,
            model=model, ep_normalize=args.ep_normalize)
        results.append(rep.to_dict())
        _write_csv(out / f"assignments_{feature}.csv", enumerate(rep.assignments))
    _write_json(out / "report.json", _report(args, results=results))


def cmd_observe1(args) -> None:
    d = _load(args)
    curve = analysis.label_cooccurrence_curve(d, args.k, args.averaging)
    out = _outdir(args)
    _write_csv(out / "curve.csv", curve.rows())
    _write_json(out / "report.json", _report(args, p=[float(v) for v in curve.p]))


def cmd_observe2(args) -> None:
    d = _load(args)
    out = _outdir(args)
    curves = []
    for R in args.noise:
        cfg = analysis.NoiseSimConfig(noise_rate=R, T_max=max(args.t_grid),
                                      subsample_fraction=args.subsample,
                                      train_fraction=args.train_fraction, seed=args.seed,
                                      c_reg=args.c_reg, relabel=args.relabel)
        curve = analysis.ensemble_noise_simulation(d, cfg, args.t_grid)
        _write_csv(out / f"curve_R{R:g}.csv", curve.rows())
        curves.append({"noise_rate": R, "T": list(curve.T_grid), "accuracy": list(curve.accuracy)})
    _write_json(out / "report.json", _report(args, curves=curves))


def cmd_synth(args) -> None:
    spec = BlobSpec(args.classes, args.samples_per_class, args.dims, args.spread, args.std, args.seed)
    d = make_blobs(spec)
    out = _outdir(args)
    save_dataset(d, out / f"features.{args.format}", out / "labels.csv", args.format)
    _write_json(out / "report.json", _report(args, n_samples=d.n_samples, n_dims=d.n_dims,
                                             n_classes=d.n_classes))


COMMANDS = {
    "fit": cmd_fit, "project": cmd_project, "ssl": cmd_ssl, "selftaught": cmd_selftaught,
    "cluster": cmd_cluster, "observe1": cmd_observe1, "observe2": cmd_observe2, "synth": cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = _default_threads()
    try:
        COMMANDS[args.command](args)
    except (EPError, OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"ensproj {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
