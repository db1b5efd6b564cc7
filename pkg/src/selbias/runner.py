"""Experiment orchestration and the ``selbias`` command line.

Configuration files are plain ``key = value`` lines (``#`` starts a
comment); keys are the :class:`RunConfig` field names, e.g.::

    synthetic = null
    n = 40
    p = 200
    class_sizes = 20,20
    protocol = external
    folds = 10
    seed = 1

Command-line flags override file values.  ``SELBIAS_OUT`` sets the default
output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from selbias import __version__
from selbias.classifiers import SvmConfig
from selbias.cv import (
    PROTOCOLS,
    DoubleCvResult,
    ErrorTable,
    HoldoutRates,
    apparent_error,
    double_cv,
    external_cv,
    internal_cv_table,
    leaky_holdout,
    repeated_cv,
    screened_external_cv,
    screened_internal_cv,
    table_to_text,
)
from selbias.data import (
    LabeledDataset,
    SyntheticSpec,
    derive_seed,
    load_dataset,
    make_folds,
    save_dataset,
    synth_gaussian,
    synth_null,
)
from selbias.errors import ConfigError, SelbiasError
from selbias.selection import rfe_arrays, rfe_schedule

log = logging.getLogger(__name__)

OUT_ENV = "SELBIAS_OUT"


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    layout: str = "rows-are-samples"
    synthetic: str | None = None  # "null" or "gaussian"
    n: int = 40
    p: int = 200
    class_sizes: tuple[int, ...] | None = None
    separation: float = 2.0
    protocol: str = "external"
    folds: int = 10
    size: int | None = None
    screen: int | None = None
    reps: int = 10
    holdout_fraction: float = 0.5
    cost: float = 1.0
    tolerance: float = 1e-6
    max_passes: int | None = None
    seed: int = 0
    out: str | None = None

    def validate(self) -> None:
        if (self.input is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of input and synthetic")
        if self.synthetic not in (None, "null", "gaussian"):
            raise ConfigError(f"unknown synthetic kind {self.synthetic!r}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.synthetic is not None:
            if self.n < 2 or self.p < 1:
                raise ConfigError(f"need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
            if sum(self.sizes()) != self.n or min(self.sizes()) < 1:
                raise ConfigError(f"class sizes {self.sizes()} inconsistent with n={self.n}")
        if self.protocol in ("internal", "external", "double", "screened-internal",
                             "screened-external", "repeated"):
            if self.folds < 2:
                raise ConfigError(f"fold count must be >= 2, got {self.folds}")
            if self.synthetic is not None and self.folds > self.n:
                raise ConfigError(f"fold count {self.folds} exceeds n={self.n}")
        if self.protocol == "double" and self.folds < 3:
            raise ConfigError("double CV needs folds >= 3")
        if self.protocol.startswith("screened") and self.screen is None:
            raise ConfigError(f"protocol {self.protocol} needs a screen size G")
        if self.protocol == "leaky-holdout":
            if self.size is None:
                raise ConfigError("leaky-holdout needs a subset size d")
            if not 0 < self.holdout_fraction < 1:
                raise ConfigError("holdout fraction must lie in (0, 1)")
        if self.protocol == "repeated" and self.reps < 1:
            raise ConfigError("reps must be >= 1")
        SvmConfig(self.cost, self.tolerance, self.max_passes)

    def sizes(self) -> tuple[int, ...]:
        if self.class_sizes is not None:
            return tuple(self.class_sizes)
        return (self.n - self.n // 2, self.n // 2)

    @property
    def svm(self) -> SvmConfig:
        return SvmConfig(self.cost, self.tolerance, self.max_passes)


def _coerce(name: str, value):
    """Convert a string config value to the type of the RunConfig field."""
    if not isinstance(value, str):
        return value
    if value.lower() in ("", "none"):
        return None
    kind = {f.name: f.type for f in dataclasses.fields(RunConfig)}[name]
    try:
        if "tuple" in kind:
            return tuple(int(v) for v in value.split(","))
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {name}") from None
    return value


def parse_config_text(text: str) -> dict:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def make_config(**values) -> RunConfig:
    values = {k: _coerce(k, v) for k, v in values.items() if v is not None}
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class RunReport:
    config: dict
    tables: list[ErrorTable] = field(default_factory=list)
    double: DoubleCvResult | None = None
    holdout: HoldoutRates | None = None
    # d -> per-fold selected feature indices
    fold_subsets: dict[int, list[list[int]]] = field(default_factory=dict)
    feature_names: list[str] = field(default_factory=list)
    duration: float = 0.0
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "duration": self.duration,
            "feature_names": self.feature_names,
            "tables": [
                {"protocol": t.protocol, "K": t.K, "seed": t.seed,
                 "sizes": list(t.sizes), "rates": list(t.rates)}
                for t in self.tables
            ],
            "double": None if self.double is None else {
                "estimate": self.double.estimate,
                "inner_choices": list(self.double.inner_choices),
                "K": self.double.K,
                "seed": self.double.seed,
                "sizes": list(self.double.sizes),
                "inner_rates": [list(r) for r in self.double.inner_rates],
            },
            "holdout": None if self.holdout is None else self.holdout._asdict(),
            "fold_subsets": {str(d): v for d, v in self.fold_subsets.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> RunReport:
        dbl = doc.get("double")
        return cls(
            config=doc["config"],
            tables=[
                ErrorTable(tuple(t["sizes"]), tuple(t["rates"]), t["protocol"], t["K"], t["seed"])
                for t in doc["tables"]
            ],
            double=None if dbl is None else DoubleCvResult(
                dbl["estimate"], tuple(dbl["inner_choices"]), dbl["K"], dbl["seed"],
                tuple(tuple(r) for r in dbl["inner_rates"]), tuple(dbl["sizes"]),
            ),
            holdout=None if doc.get("holdout") is None else HoldoutRates(**doc["holdout"]),
            fold_subsets={int(d): v for d, v in doc.get("fold_subsets", {}).items()},
            feature_names=doc.get("feature_names", []),
            duration=doc["duration"],
            version=doc["version"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls.from_dict(json.loads(text))


def load_input(cfg: RunConfig) -> LabeledDataset:
    if cfg.input is not None:
        return load_dataset(cfg.input, cfg.layout)
    seed = derive_seed(cfg.seed, 0)
    if cfg.synthetic == "null":
        return synth_null(cfg.n, cfg.p, cfg.sizes(), seed)
    means = np.zeros((2, cfg.p))
    means[0, 0], means[1, 0] = cfg.separation / 2, -cfg.separation / 2
    return synth_gaussian(SyntheticSpec(means, 1.0, (0.5, 0.5), cfg.sizes(), seed))


def _apparent_table(data: LabeledDataset, schedule, svm: SvmConfig, seed: int) -> ErrorTable:
    path = rfe_arrays(data.matrix, data.labels, schedule, svm)
    rates = tuple(apparent_error(data, step.subset, svm) for step in path)
    return ErrorTable(schedule.sizes, rates, "apparent", 1, seed)


def run_experiment(config: RunConfig) -> RunReport:
    """Run one protocol and write ``report.json`` plus one table file per ErrorTable."""
    config.validate()
    started = time.perf_counter()
    data = load_input(config)
    svm = config.svm
    K = config.folds
    seed = config.seed
    fold_seed = derive_seed(seed, 1)
    if config.screen is not None and not 1 <= config.screen <= data.p:
        raise ConfigError(f"screen size G={config.screen} outside 1..{data.p}")
    if config.protocol not in ("apparent", "leaky-holdout") and K > data.n:
        raise ConfigError(f"fold count {K} exceeds n={data.n}")

    report = RunReport(
        config=json.loads(json.dumps(dataclasses.asdict(config))),
        feature_names=list(data.feature_names),
    )
    proto = config.protocol
    schedule = rfe_schedule(config.screen if proto.startswith("screened") else data.p)
    if proto == "apparent":
        report.tables.append(_apparent_table(data, schedule, svm, seed))
    elif proto == "internal":
        report.tables.append(internal_cv_table(data, make_folds(data, K, fold_seed), schedule, svm))
    elif proto == "external":
        report.tables.append(external_cv(data, make_folds(data, K, fold_seed), schedule, svm))
    elif proto == "screened-internal":
        report.tables.append(
            screened_internal_cv(data, config.screen, make_folds(data, K, fold_seed), schedule, svm)
        )
    elif proto == "screened-external":
        report.tables.append(
            screened_external_cv(data, config.screen, make_folds(data, K, fold_seed), schedule, svm)
        )
    elif proto == "repeated":
        report.tables.append(repeated_cv(data, K, schedule, svm, config.reps, fold_seed))
    elif proto == "double":
        report.double = double_cv(data, K, schedule, svm, fold_seed)
    elif proto == "leaky-holdout":
        report.holdout = leaky_holdout(
            data, config.holdout_fraction, config.size, config.screen, svm, fold_seed
        )
    for t in report.tables:
        for d, subsets in t.fold_subsets.items():
            report.fold_subsets[d] = [list(s) for s in subsets]
    report.duration = time.perf_counter() - started

    out = Path(config.out or os.environ.get(OUT_ENV, "selbias-out"))
    write_outputs(report, out)
    return report


def render_tables(report: RunReport) -> dict[str, str]:
    """File name -> content for every flat table in the report."""
    files = {f"table_{t.protocol}.tsv": table_to_text(t) for t in report.tables}
    if report.double is not None:
        r = report.double
        rows = ["outer_fold\tchosen_size"] + [f"{k}\t{h}" for k, h in enumerate(r.inner_choices)]
        rows.append(f"estimate\t{r.estimate!r}")
        files["double_cv.tsv"] = "\n".join(rows) + "\n"
    if report.holdout is not None:
        files["holdout.tsv"] = (
            "leaky_rate\tclean_rate\n"
            f"{report.holdout.leaky_rate!r}\t{report.holdout.clean_rate!r}\n"
        )
    return files


def write_outputs(report: RunReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    for name, text in render_tables(report).items():
        (out / name).write_text(text)


def marker_frequency(report: RunReport, d: int) -> dict[int, int]:
    """Number of folds whose size-``d`` subset contains each feature."""
    if d not in report.fold_subsets:
        raise ConfigError(f"report holds no per-fold subsets of size {d}")
    counts = Counter(v for subset in report.fold_subsets[d] for v in subset)
    return {v: counts.get(v, 0) for v in range(len(report.feature_names))}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selbias", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--kind", choices=("null", "gaussian"), default="null")
    gen.add_argument("--n", type=int, default=40)
    gen.add_argument("--p", type=int, default=200)
    gen.add_argument("--class-sizes")
    gen.add_argument("--separation", type=float, default=2.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output file")

    run = sub.add_parser("run", help="execute an error-rate protocol")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--input")
    run.add_argument("--layout", choices=("rows-are-samples", "rows-are-features"))
    run.add_argument("--synthetic", choices=("null", "gaussian"))
    run.add_argument("--n", type=int)
    run.add_argument("--p", type=int)
    run.add_argument("--class-sizes", dest="class_sizes")
    run.add_argument("--separation", type=float)
    run.add_argument("--protocol", choices=PROTOCOLS)
    run.add_argument("--folds", type=int, metavar="K")
    run.add_argument("--size", type=int, metavar="d")
    run.add_argument("--screen", type=int, metavar="G")
    run.add_argument("--reps", type=int, metavar="R")
    run.add_argument("--holdout-fraction", dest="holdout_fraction", type=float)
    run.add_argument("--cost", type=float, metavar="C")
    run.add_argument("--tolerance", type=float)
    run.add_argument("--seed", type=int, metavar="S")
    run.add_argument("--out", metavar="DIR")

    rep = sub.add_parser("report", help="re-render tables from a saved report")
    rep.add_argument("report", help="report.json or the directory holding it")
    rep.add_argument("--out", metavar="DIR", help="write table files here instead of printing")
    rep.add_argument("--markers", type=int, metavar="d", help="print marker-gene counts at size d")
    return parser


def _cmd_generate(args) -> None:
    cfg = make_config(
        synthetic=args.kind, n=args.n, p=args.p, class_sizes=args.class_sizes,
        separation=args.separation, seed=args.seed,
    )
    data = load_input(cfg)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(data, args.out, "\t" if args.out.endswith((".tsv", ".txt")) else ",")
    print(f"wrote {data.n} x {data.p} dataset to {args.out}")


def _cmd_run(args) -> None:
    values = {}
    if args.config:
        values.update(parse_config_text(Path(args.config).read_text()))
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "verbose") and v is not None}
    values.update(flags)
    cfg = make_config(**values)
    report = run_experiment(cfg)
    for name, text in render_tables(report).items():
        print(f"# {name}")
        print(text, end="")


def _cmd_report(args) -> None:
    path = Path(args.report)
    if path.is_dir():
        path = path / "report.json"
    report = RunReport.from_json(path.read_text())
    if args.markers is not None:
        counts = marker_frequency(report, args.markers)
        for v, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            if c:
                print(f"{report.feature_names[v]}\t{c}")
        return
    if args.out:
        write_outputs(report, Path(args.out))
        return
    for name, text in render_tables(report).items():
        print(f"# {name}")
        print(text, end="")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        {"generate": _cmd_generate, "run": _cmd_run, "report": _cmd_report}[args.command](args)
    except SelbiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: [runner] {exc}", file=sys.stderr)
        return 1
    return 0
