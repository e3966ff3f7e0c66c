"""Command-line interface: ``gblstsvm {gen-data,train,predict,benchmark,stats}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _accel
from .dataset import (
    DataError,
    Dataset,
    gen_crossplane,
    gen_ndc,
    inject_label_noise,
    load_csv,
    minmax_normalize,
    train_test_split,
    write_csv,
)
from .eval import (
    AccuracyTable,
    StatsError,
    derived_seed,
    accuracy,
    average_ranks,
    friedman,
    kfold_grid_search,
    full_grid,
    quick_grid,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from .kernel import KernelSpec
from .models import VARIANTS, HyperParams, TrainedModel, train_pipeline

log = logging.getLogger("gblstsvm")

RESULT_FIELDS = [
    "dataset", "noise", "variant", "kernel", "accuracy", "k", "fit_ms",
    "c1", "c2", "c3", "c4", "sigma", "pur", "num", "cv_accuracy",
]


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------


def read_config(path) -> dict[str, list[str]]:
    """Flat ``key = value`` lines; repeated keys build lists; ``#`` starts a comment."""
    out: dict[str, list[str]] = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out.setdefault(key.replace("-", "_"), []).append(val)
    return out


def _config_defaults(sub: argparse.ArgumentParser, cfg: dict[str, list[str]]) -> dict:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, vals in cfg.items():
        a = actions.get(key)
        if a is None or key in ("help", "config"):
            raise ValueError(f"unknown config key {key!r}")
        conv = a.type or str
        if isinstance(a, argparse._AppendAction):
            defaults[key] = [conv(v) for v in vals]
        elif isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = vals[-1].lower() in ("1", "true", "yes", "on")
        else:
            v = conv(vals[-1])
            if a.choices is not None and v not in a.choices:
                raise ValueError(f"config key {key!r}: {v!r} not in {sorted(a.choices)}")
            defaults[key] = v
    return defaults


# ---------------------------------------------------------------------------
# data sources
# ---------------------------------------------------------------------------


def resolve_dataset(src: str, seed: int = 0) -> tuple[str, Dataset]:
    """A CSV path, or ``synthetic:crossplane[:n]`` / ``synthetic:ndc[:n[:dim[:separation]]]``."""
    if src.startswith("synthetic:"):
        parts = src.split(":")[1:]
        kind, args = parts[0], parts[1:]
        if kind == "crossplane":
            n = int(args[0]) if args else 130
            return f"crossplane{n}", gen_crossplane(n, 0.01, seed)
        if kind == "ndc":
            n = int(args[0]) if args else 1000
            dim = int(args[1]) if len(args) > 1 else 32
            sep = float(args[2]) if len(args) > 2 else 4.0
            return f"ndc{n}", gen_ndc(n, dim, sep, seed)
        raise DataError(f"unknown synthetic dataset {kind!r}")
    p = Path(src)
    return p.stem, load_csv(p)


def _hp_from_args(a) -> HyperParams:
    hp = HyperParams(a.c1, a.c2 if a.c2 is not None else a.c1, a.c3, a.c4 if a.c4 is not None else a.c3,
                     a.sigma, a.pur, a.num)
    return hp


def _grid(name: str, tie: bool):
    return {"quick": quick_grid, "full": full_grid}[name](tie=tie)


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    data: list = field(default_factory=list)
    variants: list = field(default_factory=lambda: list(VARIANTS))
    kernel: str = "linear"
    noise: list = field(default_factory=lambda: [0.0])
    seed: int = 0
    grid: str = "quick"
    fixed: Optional[HyperParams] = None
    tie: bool = True
    folds: int = 5
    train_fraction: float = 0.7
    noise_target: str = "train"
    normalize: bool = True
    workers: int = 1
    out: Path = Path("results")

    def __post_init__(self):
        if not self.data:
            raise ValueError("at least one dataset is required")
        if not self.variants:
            raise ValueError("at least one variant is required")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}")
        for r in self.noise:
            if not 0.0 <= r <= 0.5:
                raise ValueError(f"noise level {r} outside [0, 0.5]")
        if self.noise_target not in ("train", "both"):
            raise ValueError("noise_target must be 'train' or 'both'")


def _run_cell(cfg: RunConfig, name: str, d: Dataset, di: int, ni: int, rate: float, variant: str) -> dict:
    if cfg.normalize:
        d, _ = minmax_normalize(d)
    train, test = train_test_split(d, cfg.train_fraction, derived_seed(cfg.seed, di))
    noise_seed = derived_seed(cfg.seed, di, ni)
    train = inject_label_noise(train, rate, noise_seed)
    if cfg.noise_target == "both":
        test = inject_label_noise(test, rate, noise_seed + 1)
    if cfg.fixed is not None:
        hp, cv = cfg.fixed, float("nan")
    else:
        res = kfold_grid_search(train, _grid(cfg.grid, cfg.tie), cfg.folds, variant, cfg.kernel, cfg.seed)
        hp, cv = res.best, res.score
    spec = KernelSpec.gaussian(hp.sigma) if cfg.kernel == "gaussian" else KernelSpec.linear()
    t0 = time.perf_counter()
    model = train_pipeline(train, hp, variant, spec, cfg.seed)
    fit_ms = (time.perf_counter() - t0) * 1000.0
    acc = accuracy(model.predict(test.features), test.labels)
    return {
        "dataset": name, "noise": rate, "variant": variant, "kernel": cfg.kernel,
        "accuracy": acc, "k": model.n_balls, "fit_ms": fit_ms, **hp.to_dict(), "cv_accuracy": cv,
    }


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_benchmark(cfg: RunConfig) -> list[dict]:
    """Run every (dataset, noise, variant) cell and write the report files.

    Returns the result rows; datasets that fail to load or fit are logged
    and skipped.
    """
    cfg.out.mkdir(parents=True, exist_ok=True)
    datasets = []
    for di, src in enumerate(cfg.data):
        try:
            name, d = resolve_dataset(src, cfg.seed)
        except (OSError, DataError) as exc:
            log.error("skipping %s: %s", src, exc)
            continue
        datasets.append((di, name, d))
    cells = [
        (name, d, di, ni, rate, v)
        for (di, name, d), (ni, rate), v in itertools.product(datasets, enumerate(cfg.noise), cfg.variants)
    ]

    def run(cell):
        name, d, di, ni, rate, v = cell
        try:
            return _run_cell(cfg, name, d, di, ni, rate, v)
        except Exception as exc:  # noqa: BLE001 - per-cell failures are reported, not fatal
            log.error("%s noise=%g %s failed: %s", name, rate, v, exc)
            return None

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(run, cells))
    else:
        results = [run(c) for c in cells]
    rows = [r for r in results if r is not None]

    with (cfg.out / "results.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in RESULT_FIELDS])

    for rate in cfg.noise:
        at_rate = [r for r in rows if r["noise"] == rate]
        names = list(dict.fromkeys(r["dataset"] for r in at_rate))
        complete = [n for n in names if sum(r["dataset"] == n for r in at_rate) == len(cfg.variants)]
        if not complete:
            continue
        acc = np.array(
            [[next(r["accuracy"] for r in at_rate if r["dataset"] == n and r["variant"] == v) for v in cfg.variants]
             for n in complete]
        )
        AccuracyTable(tuple(cfg.variants), tuple(complete), acc).to_csv(cfg.out / f"accuracy_noise{rate:g}.csv")
    return rows


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def run_stats(table: AccuracyTable, out: Path, critical: Optional[float] = None) -> bool:
    """Write ``stats.txt`` and ``stats.json``; return False if any statistic failed."""
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    ranks = average_ranks(table)
    rec: dict = {"M": table.M, "l": table.l, "average_ranks": dict(zip(table.models, ranks.round(6).tolist()))}
    lines = [f"datasets: {table.M}  models: {table.l}", "", "average ranks"]
    lines += [f"  {m:<16} {r:8.4f}" for m, r in zip(table.models, ranks)]
    try:
        fr = friedman(ranks, table.M, critical)
        rec["friedman"] = {"chi2": round(fr.chi2, 6), "ff": round(fr.ff, 6), "critical": round(fr.critical, 6),
                           "reject": fr.reject}
        lines += ["", f"friedman  chi2 = {fr.chi2:.4f}  F_F = {fr.ff:.4f}  critical = {fr.critical:.4f}  "
                      f"reject = {'yes' if fr.reject else 'no'}"]
    except StatsError as exc:
        ok = False
        rec["friedman"] = {"error": str(exc)}
        lines += ["", f"friedman  error: {exc}"]

    pairs = []
    lines += ["", f"{'model a':<16} {'model b':<16} {'R+':>8} {'R-':>8} {'p':>12} {'win':>4} {'tie':>4} {'loss':>4}"]
    for i, j in itertools.combinations(range(table.l), 2):
        a, b = table.acc[:, i], table.acc[:, j]
        wx = wilcoxon_signed_rank(a, b)
        wtl = win_tie_loss(a, b)
        pairs.append({
            "a": table.models[i], "b": table.models[j], "r_plus": wx.r_plus, "r_minus": wx.r_minus,
            "p": float(f"{wx.p:.6g}"), "wins": wtl.wins, "ties": wtl.ties, "losses": wtl.losses,
        })
        lines.append(f"{table.models[i]:<16} {table.models[j]:<16} {wx.r_plus:8.1f} {wx.r_minus:8.1f} "
                     f"{wx.p:12.4g} {wtl.wins:4d} {wtl.ties:4d} {wtl.losses:4d}")
    thr = table.M / 2 + 1.96 * np.sqrt(table.M) / 2
    rec["pairs"] = pairs
    rec["win_threshold"] = round(float(thr), 6)
    lines += ["", f"significant win count: {thr:.2f}"]

    (out / "stats.txt").write_text("\n".join(lines) + "\n")
    (out / "stats.json").write_text(json.dumps(rec, indent=1, sort_keys=True) + "\n")
    return ok


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_hp(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--grid", choices=("quick", "full", "none"), default="quick",
                   help="grid to search (none = use the fixed values below)")
    g.add_argument("--no-tie", dest="tie", action="store_false", help="search c2 and c4 independently")
    g.add_argument("--folds", type=int, default=5)
    g.add_argument("--c1", type=float, default=1.0)
    g.add_argument("--c2", type=float, default=None, help="defaults to c1")
    g.add_argument("--c3", type=float, default=1.0)
    g.add_argument("--c4", type=float, default=None, help="defaults to c3")
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--pur", type=float, default=0.95)
    g.add_argument("--num", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gblstsvm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic dataset as CSV")
    p.add_argument("--config")
    p.add_argument("--kind", choices=("crossplane", "ndc"), default="crossplane")
    p.add_argument("--n", type=int, default=None, help="samples (130 crossplane, 10000 ndc)")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--jitter", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="fit one model and save it as JSON")
    p.add_argument("--config")
    p.add_argument("--data", required=True)
    p.add_argument("--variant", choices=VARIANTS, default="gblstsvm")
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_hp(p)

    p = sub.add_parser("predict", help="label a CSV with a saved model")
    p.add_argument("--config")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None, help="write predictions here (default: stdout)")

    p = sub.add_parser("benchmark", help="grid-search, refit and score across datasets and noise levels")
    p.add_argument("--config")
    p.add_argument("--data", action="append", default=None,
                   help="CSV path or synthetic:crossplane[:n] / synthetic:ndc[:n[:dim[:sep]]]; repeatable")
    p.add_argument("--variant", action="append", choices=VARIANTS, default=None, help="repeatable; default all")
    p.add_argument("--kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--noise", action="append", type=float, default=None, help="repeatable; default 0")
    p.add_argument("--noise-target", choices=("train", "both"), default="train")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results")
    _add_hp(p)

    p = sub.add_parser("stats", help="ranks, Friedman, Wilcoxon and win-tie-loss for an accuracy table")
    p.add_argument("--config")
    p.add_argument("--data", required=True, help="accuracy table CSV (dataset, model columns...)")
    p.add_argument("--critical", type=float, default=None, help="F_F critical value (default: F quantile)")
    p.add_argument("--out", default="stats")
    return ap


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        sub = ap._subparsers._group_actions[0].choices[args.command]
        try:
            defaults = _config_defaults(sub, read_config(args.config))
        except (OSError, ValueError) as exc:
            ap.error(f"--config: {exc}")
        sub.set_defaults(**defaults)
        args = ap.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_gen(a) -> int:
    if a.kind == "crossplane":
        d = gen_crossplane(a.n or 130, a.jitter, a.seed)
    else:
        d = gen_ndc(a.n or 10000, a.dim, a.separation, a.seed)
    write_csv(d, a.out)
    print(f"wrote {d.m} x {d.n_features} to {a.out}")
    return 0


def _cmd_train(a) -> int:
    name, d = resolve_dataset(a.data, a.seed)
    norm = None
    if a.normalize:
        d, norm = minmax_normalize(d)
    if a.grid == "none":
        hp, cv = _hp_from_args(a), None
    else:
        res = kfold_grid_search(d, _grid(a.grid, a.tie), a.folds, a.variant, a.kernel, a.seed, a.workers)
        hp, cv = res.best, res.score
    spec = KernelSpec.gaussian(hp.sigma) if a.kernel == "gaussian" else KernelSpec.linear()
    model = train_pipeline(d, hp, a.variant, spec, a.seed)
    model = TrainedModel(model.variant, model.spec, model.planes, model.hp, model.n_balls, norm)
    model.save(a.out)
    train_acc = accuracy(model.planes.predict(d.features), d.labels)
    msg = f"{name}: {a.variant}/{a.kernel} k={model.n_balls} train_acc={train_acc:.4f}"
    if cv is not None:
        msg += f" cv_acc={cv:.4f}"
    print(msg + f" -> {a.out}")
    return 0


def _cmd_predict(a) -> int:
    model = TrainedModel.load(a.model)
    d = load_csv(a.data)
    pred = model.predict(d.features)
    lines = ["label"] + [str(int(v)) for v in pred]
    if a.out:
        Path(a.out).write_text("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    print(f"accuracy {accuracy(pred, d.labels):.4f} on {d.m} samples", file=sys.stderr)
    return 0


def _cmd_benchmark(a) -> int:
    fixed = _hp_from_args(a) if a.grid == "none" else None
    cfg = RunConfig(
        data=a.data or [], variants=a.variant or list(VARIANTS), kernel=a.kernel, noise=a.noise or [0.0],
        seed=a.seed, grid=a.grid, fixed=fixed, tie=a.tie, folds=a.folds, train_fraction=a.train_fraction,
        noise_target=a.noise_target, normalize=a.normalize, workers=a.workers, out=Path(a.out),
    )
    rows = run_benchmark(cfg)
    for r in rows:
        print(f"{r['dataset']:<16} noise={r['noise']:<5g} {r['variant']:<11} acc={r['accuracy']:.4f} "
              f"k={r['k']:<6d} fit={r['fit_ms']:.1f}ms")
    if not rows:
        log.error("no benchmark rows were produced")
        return 1
    return 0


def _cmd_stats(a) -> int:
    table = AccuracyTable.from_csv(a.data)
    ok = run_stats(table, Path(a.out), a.critical)
    print((Path(a.out) / "stats.txt").read_text(), end="")
    return 0 if ok else 1


COMMANDS = {
    "gen-data": _cmd_gen,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "benchmark": _cmd_benchmark,
    "stats": _cmd_stats,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", _accel.backend_name())
    try:
        return COMMANDS[args.command](args)
    except (OSError, DataError, StatsError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
