"""Experiment runner: configured sweeps persisted as CSV or JSON tables.

Every experiment is deterministic given (config, seed): work units are
numbered in row order and unit u draws from the Philox stream keyed by
(seed, u), so reruns are byte-identical and the metadata block lets a
reader reconstruct the run exactly.

Experiments and their unit layouts:

* ``chsh-verify``   unit = (c index) * 4 + input-setting index; each
  unit samples trials // 4 outcomes of one box at one input pair.
* ``protocol-sweep`` unit = (n index) * trials + trial; one run per
  trial, decoded address cycling with the trial index.
* ``fisher-curve``  unit = (n index) * trials + trial; one
  all-addresses trial per unit (empirical column needs trials >= 1000,
  computed for n <= 12).
* ``disconnect``    unit = n index; trials source symbols through n
  concatenated hops of correlation c * c_prime each.
* ``clt``           unit = (n index) * trials + trial, all-addresses.
* ``regimes``       closed forms only, no randomness.

CSV output: UTF-8, ``#``-prefixed ``key=value`` metadata lines, header
row, then comma-separated rows with floats at 17 significant digits.
JSON mirrors the same schema as {"metadata", "header", "rows"}.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__, streams
from .channel import BernoulliSource, PairedSamples, draw_source, independence_statistic, transmit_chain_batch
from .inference import classify_regime, clt_suite, empirical_fisher, fisher_vandam
from .kernels import CYCLE, protocol_runs
from .nsbox import make_isotropic_box, sample_box_batch
from .vandam import VanDamConfig, sample_decoded_sets

EXPERIMENTS = (
    "chsh-verify", "protocol-sweep", "fisher-curve", "disconnect", "clt", "regimes",
)

# Canonical correlations for chsh-verify when no --c/--c2 is given.
CHSH_C_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0 / math.sqrt(2.0), 1.0)

# Largest n for which fisher-curve computes the empirical column
# (cost per point grows as trials * 4**n).
EMPIRICAL_FISHER_N_CAP = 12

_COLUMNS = {
    "chsh-verify": (
        "c", "chsh_exact", "chsh_empirical", "abs_error", "four_sigma",
        "samples", "within_4sigma",
    ),
    "protocol-sweep": (
        "n", "c", "c_prime", "success_expected", "success_observed",
        "stderr", "within_4sigma", "trials",
    ),
    "fisher-curve": (
        "n", "c", "c_prime", "theta", "fisher_closed", "fisher_empirical",
        "regime", "trials", "seed",
    ),
    "disconnect": (
        "n", "c", "c_prime", "exz_expected", "exz_observed", "stderr",
        "chi_square", "independence_pass", "fisher_closed", "trials",
    ),
    "clt": (
        "n", "c", "c_prime", "theta", "trials", "mean_std", "var_std",
        "skew_std", "crlb_product", "verdict",
    ),
    "regimes": (
        "n", "c", "c_prime", "theta", "two_ccp_squared", "fisher_input",
        "fisher_closed", "regime", "limit_value",
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    c: Optional[float] = None
    c2: Optional[float] = None
    c_prime: float = 1.0
    theta: float = 0.0
    n_min: int = 1
    n_max: int = 4
    trials: int = 10_000
    seed: int = 0
    format: str = "csv"
    out: str = "-"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; choose one of {EXPERIMENTS}"
            )
        if self.c is not None and self.c2 is not None:
            raise ValueError("supply either c or c2 (squared correlation), not both")
        if self.c is not None and not -1 <= self.c <= 1:
            raise ValueError(f"c must lie in [-1, 1], got {self.c}")
        if self.c2 is not None and not 0 <= self.c2 <= 1:
            raise ValueError(f"c2 must lie in [0, 1], got {self.c2}")
        if self.c is None and self.c2 is None and self.experiment != "chsh-verify":
            raise ValueError(f"experiment {self.experiment!r} requires --c or --c2")
        if not -1 <= self.c_prime <= 1:
            raise ValueError(f"c_prime must lie in [-1, 1], got {self.c_prime}")
        if not -1 <= self.theta <= 1:
            raise ValueError(f"theta must lie in [-1, 1], got {self.theta}")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError(
                f"need 1 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]"
            )
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")
        if not 0 <= self.seed < (1 << 64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")

    def resolved_c(self) -> Optional[float]:
        if self.c is not None:
            return self.c
        if self.c2 is not None:
            return math.sqrt(self.c2)
        return None

    def metadata(self) -> dict:
        meta = {"tool": "nonlocal-lab", "version": __version__}
        for f in fields(self):
            meta[f.name] = getattr(self, f.name)
        return meta


@dataclass
class ResultTable:
    header: tuple
    rows: list
    metadata: dict = field(default_factory=dict)


def config_from_metadata(meta: dict) -> ExperimentConfig:
    """Rebuild the config from an emitted metadata block."""
    kwargs = {}
    for f in fields(ExperimentConfig):
        if f.name not in meta:
            raise ValueError(f"metadata missing config field {f.name!r}")
        kwargs[f.name] = meta[f.name]
    return ExperimentConfig(**kwargs)


def _chsh_verify(cfg: ExperimentConfig) -> list:
    c_values = (cfg.resolved_c(),) if cfg.resolved_c() is not None else CHSH_C_VALUES
    per_setting = max(1, cfg.trials // 4)
    rows = []
    for ci, c in enumerate(c_values):
        box = make_isotropic_box(c)
        exact = float(box.chsh)
        emp = {}
        var_sum = 0.0
        for si, (a, b) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            gen = streams.unit_stream(cfg.seed, ci * 4 + si)
            aa, bb = sample_box_batch(box, a, b, per_setting, gen)
            e = 1.0 - 2.0 * float(np.mean(aa ^ bb))
            emp[a, b] = e
            var_sum += (1.0 - e * e) / per_setting
        chsh_emp = (emp[0, 0] + emp[0, 1] + emp[1, 0] - emp[1, 1]) / 4.0
        sigma = math.sqrt(var_sum) / 4.0
        err = abs(chsh_emp - exact)
        rows.append(
            (c, exact, chsh_emp, err, 4.0 * sigma, 4 * per_setting,
             int(err <= 4.0 * sigma))
        )
    return rows


def _protocol_sweep(cfg: ExperimentConfig) -> list:
    c = cfg.resolved_c()
    rows = []
    for p, n in enumerate(range(cfg.n_min, cfg.n_max + 1)):
        x, y = protocol_runs(
            n, c, cfg.c_prime, cfg.theta, units=cfg.trials, runs_per_unit=1,
            master_seed=cfg.seed, address=CYCLE, unit_offset=p * cfg.trials,
        )
        observed = float(np.mean(x == y))
        expected = (1.0 + (c * cfg.c_prime) ** n) / 2.0
        se = math.sqrt(max(expected * (1.0 - expected), 0.0) / cfg.trials)
        ok = abs(observed - expected) <= 4.0 * se if se > 0 else observed == expected
        rows.append((n, c, cfg.c_prime, expected, observed, se, int(ok), cfg.trials))
    return rows


def _fisher_curve(cfg: ExperimentConfig) -> list:
    c = cfg.resolved_c()
    rows = []
    for p, n in enumerate(range(cfg.n_min, cfg.n_max + 1)):
        rep = fisher_vandam(c, cfg.c_prime, cfg.theta, n)
        emp = math.nan
        if cfg.trials > 0 and n <= EMPIRICAL_FISHER_N_CAP:
            _, y_signs = sample_decoded_sets(
                VanDamConfig(n, c, cfg.c_prime), cfg.theta, cfg.trials,
                cfg.seed, unit_offset=p * cfg.trials,
            )
            emp = empirical_fisher(y_signs, cfg.theta, c, cfg.c_prime, n)
        rows.append(
            (n, c, cfg.c_prime, cfg.theta, rep.value, emp, rep.regime.value,
             cfg.trials, cfg.seed)
        )
    return rows


def _disconnect(cfg: ExperimentConfig) -> list:
    c = cfg.resolved_c()
    hop = c * cfg.c_prime
    src = BernoulliSource(cfg.theta)
    rows = []
    for p, n in enumerate(range(cfg.n_min, cfg.n_max + 1)):
        gen = streams.unit_stream(cfg.seed, p)
        xs = draw_source(src, cfg.trials, gen)
        zs = transmit_chain_batch(hop, n, xs, gen)
        samples = PairedSamples(xs, zs)
        observed = float(np.mean(xs.astype(np.float64) * zs))
        expected = hop ** n
        se = math.sqrt(max(1.0 - expected * expected, 0.0) / cfg.trials)
        indep = independence_statistic(samples)
        rows.append(
            (n, c, cfg.c_prime, expected, observed, se, indep.chi_square,
             int(indep.threshold_pass),
             fisher_vandam(c, cfg.c_prime, cfg.theta, n).value, cfg.trials)
        )
    return rows


def _clt(cfg: ExperimentConfig) -> list:
    c = cfg.resolved_c()
    rows = []
    for p, n in enumerate(range(cfg.n_min, cfg.n_max + 1)):
        rep = clt_suite(
            cfg.trials, VanDamConfig(n, c, cfg.c_prime), cfg.theta,
            master_seed=cfg.seed, unit_offset=p * cfg.trials,
        )
        rows.append(
            (n, c, cfg.c_prime, cfg.theta, cfg.trials, rep.mean, rep.variance,
             rep.skewness, rep.crlb_product, int(rep.passed))
        )
    return rows


def _regimes(cfg: ExperimentConfig) -> list:
    c = cfg.resolved_c()
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        rep = fisher_vandam(c, cfg.c_prime, cfg.theta, n)
        fisher_input = (2.0 ** n) / (1.0 - cfg.theta ** 2)
        rows.append(
            (n, c, cfg.c_prime, cfg.theta, 2.0 * (c * cfg.c_prime) ** 2,
             fisher_input, rep.value, rep.regime.value, rep.limit_value)
        )
    return rows


_RUNNERS = {
    "chsh-verify": _chsh_verify,
    "protocol-sweep": _protocol_sweep,
    "fisher-curve": _fisher_curve,
    "disconnect": _disconnect,
    "clt": _clt,
    "regimes": _regimes,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Execute the configured experiment; deterministic given (config, seed)."""
    rows = _RUNNERS[cfg.experiment](cfg)
    return ResultTable(
        header=_COLUMNS[cfg.experiment], rows=rows, metadata=cfg.metadata()
    )


def _format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    return v


def emit_table(table: ResultTable, fmt: str, out: str) -> None:
    """Write the table as CSV (# metadata, header, rows) or JSON.

    ``out="-"`` writes to stdout. Identical tables serialize to
    identical bytes.
    """
    if fmt == "csv":
        lines = [f"# {k}={v}" for k, v in table.metadata.items()]
        lines.append(",".join(table.header))
        for row in table.rows:
            lines.append(",".join(_format_value(v) for v in row))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        doc = {
            "metadata": {k: _json_value(v) for k, v in table.metadata.items()},
            "header": list(table.header),
            "rows": [[_json_value(v) for v in row] for row in table.rows],
        }
        text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    else:
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_table(path: str) -> ResultTable:
    """Parse a table emitted by :func:`emit_table` (either format)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return ResultTable(
            header=tuple(doc["header"]),
            rows=[tuple(r) for r in doc["rows"]],
            metadata=doc["metadata"],
        )
    metadata, header, rows = {}, (), []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = _parse_meta_value(value)
        elif not header:
            header = tuple(line.split(","))
        elif line:
            rows.append(tuple(_parse_cell(v) for v in line.split(",")))
    return ResultTable(header=header, rows=rows, metadata=metadata)


def _parse_meta_value(v: str):
    if v == "None":
        return None
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            continue
    return v


def _parse_cell(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v
