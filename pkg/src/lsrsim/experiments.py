"""Declarative experiment runner: SNR/antenna sweeps and result tables.

Conventions used by every experiment (they pin down the free choices a
figure-style result needs):

* SNR is ``power / noise_var`` with ``noise_var = 1`` and unit fading
  variance, so ``power = 10 ** (snr_db / 10)``.
* The pilot is ``sqrt(power)`` (real positive) and the pilot-phase noise
  variance equals the data-phase noise variance.
* Code rates are given in bits/channel use on the experiment surface; all
  internal math is in nats.

Row order of every result table is fixed by the experiment grid definition,
never by execution order, so a re-run with the same config and seed emits
byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelConfig, lmmse_coefficient
from .outage import estimate_outage, gmi_histogram, gmi_samples_multi_b
from .shrinkage import SearchSpec, b_sweep, optimize_b

__all__ = [
    "ConfigError",
    "NotBracketedError",
    "ExperimentConfig",
    "SearchSettings",
    "ResultTable",
    "EXPERIMENT_KINDS",
    "build_channel_config",
    "rate_bits_to_nats",
    "run_outage_curve",
    "run_b_vs_snr",
    "run_gmi_histogram",
    "run_b_sweep",
    "run_asymptotic_scan",
    "run_experiment",
    "curve_points",
    "snr_gain",
    "emit_results",
    "read_results",
]

EXPERIMENT_KINDS = (
    "outage_curve",
    "b_vs_snr",
    "gmi_histogram",
    "asymptotic_scan",
    "b_sweep",
)

LN2 = math.log(2.0)


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NotBracketedError(RuntimeError):
    """A curve does not cross the requested target outage within its range."""


@dataclass
class SearchSettings:
    """Shrinkage-search knobs carried by an experiment config."""

    ratio_low: float = 0.0
    ratio_high: float = 2.0
    coarse_points: int = 41
    refine_iters: int = 3


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run.

    ``rate_bits`` may be a single rate applied to every antenna count or a
    list paired elementwise with ``n_r_list``.
    """

    kind: str
    snr_db: list[float]
    n_r_list: list[int]
    rate_bits: float | list[float]
    trials: int = 100_000
    seed: int = 0
    bins: int = 50
    search: SearchSettings = field(default_factory=SearchSettings)
    b_over_a: list[float] | None = None  # b_sweep only: ratios relative to a
    b_scale: float = 2.0  # asymptotic_scan only: the mismatched-rule factor

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError("kind", f"must be one of {EXPERIMENT_KINDS}, got {self.kind!r}")
        if not self.snr_db:
            raise ConfigError("snr_db", "must be a nonempty list of SNR values in dB")
        if not self.n_r_list:
            raise ConfigError("n_r_list", "must be a nonempty list of antenna counts")
        for i, n in enumerate(self.n_r_list):
            if int(n) != n or n < 1:
                raise ConfigError(f"n_r_list[{i}]", f"must be a positive integer, got {n}")
        for i, r in enumerate(self._rates()):
            if r < 0:
                raise ConfigError(f"rate_bits[{i}]", f"must be nonnegative, got {r}")
        if isinstance(self.rate_bits, list) and len(self.rate_bits) != len(self.n_r_list):
            raise ConfigError(
                "rate_bits", "list form must have the same length as n_r_list"
            )
        if self.trials < 1:
            raise ConfigError("trials", f"must be positive, got {self.trials}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {self.seed}")
        if self.bins < 2:
            raise ConfigError("bins", f"must be at least 2, got {self.bins}")
        s = self.search
        if not (0 <= s.ratio_low < s.ratio_high):
            raise ConfigError("search.ratio_low", "need 0 <= ratio_low < ratio_high")
        if s.coarse_points < 3:
            raise ConfigError("search.coarse_points", "must be >= 3")
        if s.refine_iters < 0:
            raise ConfigError("search.refine_iters", "must be >= 0")
        if self.kind == "b_sweep":
            if not self.b_over_a:
                raise ConfigError("b_over_a", "b_sweep requires a nonempty ratio list")
            for i, r in enumerate(self.b_over_a):
                if r < 0:
                    raise ConfigError(f"b_over_a[{i}]", f"must be nonnegative, got {r}")
        if self.kind == "asymptotic_scan":
            if max(self.n_r_list) < 8 * min(self.n_r_list):
                raise ConfigError(
                    "n_r_list", "asymptotic_scan needs a span of at least 3 octaves"
                )
            if self.b_scale == 1.0:
                raise ConfigError("b_scale", "must differ from 1 (the matched rule)")

    def _rates(self) -> list[float]:
        if isinstance(self.rate_bits, list):
            return [float(r) for r in self.rate_bits]
        return [float(self.rate_bits)] * len(self.n_r_list)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "kind", "snr_db", "n_r_list", "rate_bits", "trials", "seed",
            "bins", "search", "b_over_a", "b_scale",
        }
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        kwargs = dict(data)
        search = kwargs.pop("search", None)
        if search is not None:
            if not isinstance(search, dict):
                raise ConfigError("search", "must be an object")
            allowed = {"ratio_low", "ratio_high", "coarse_points", "refine_iters"}
            for key in search:
                if key not in allowed:
                    raise ConfigError(f"search.{key}", "unknown configuration field")
            kwargs["search"] = SearchSettings(**search)
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError("<config>", str(exc)) from exc


@dataclass
class ResultTable:
    """Ordered columns plus rows of plain scalars (int/float/str)."""

    columns: list[str]
    rows: list[dict]


def rate_bits_to_nats(rate_bits: float) -> float:
    return rate_bits * LN2


def build_channel_config(snr_db: float, n_r: int) -> ChannelConfig:
    """Scenario for one experiment grid point under the module conventions."""
    power = 10.0 ** (snr_db / 10.0)
    return ChannelConfig(
        n_r=n_r,
        power=power,
        noise_var=1.0,
        pilot_noise_var=1.0,
        fading_var=1.0,
        pilot=math.sqrt(power),
    )


def _search_spec(cfg: ExperimentConfig) -> SearchSpec:
    s = cfg.search
    return SearchSpec(
        trials=cfg.trials,
        seed=cfg.seed,
        ratio_low=s.ratio_low,
        ratio_high=s.ratio_high,
        coarse_points=s.coarse_points,
        refine_iters=s.refine_iters,
    )


OUTAGE_CURVE_COLUMNS = [
    "snr_db", "n_r", "rate_bits", "b_lmmse", "p_lmmse", "ci_lo", "ci_hi",
    "b_star", "p_lsr", "ci_lo_lsr", "ci_hi_lsr", "trials", "seed",
]
OUTAGE_CURVE_COLUMNS_LMMSE_ONLY = OUTAGE_CURVE_COLUMNS[:7] + ["trials", "seed"]


def run_outage_curve(cfg: ExperimentConfig, *, include_lsr: bool = True, workers: int = 1) -> ResultTable:
    """Outage versus SNR for the LMMSE receiver and the shrinkage receiver.

    Both receivers share the seed at every grid point, so their per-trial
    realizations are identical; the optimizer grid contains ``b = a``, hence
    ``p_lsr <= p_lmmse`` holds exactly row by row.  With ``include_lsr``
    false only the LMMSE columns are produced.
    """
    rows = []
    for n_r, rate_bits in zip(cfg.n_r_list, cfg._rates()):
        rate_nats = rate_bits_to_nats(rate_bits)
        for snr in cfg.snr_db:
            config = build_channel_config(snr, n_r)
            a = abs(lmmse_coefficient(config))
            base = estimate_outage(
                config, a, rate_nats, cfg.trials, cfg.seed, workers=workers
            )
            row = {
                "snr_db": float(snr),
                "n_r": int(n_r),
                "rate_bits": float(rate_bits),
                "b_lmmse": a,
                "p_lmmse": base.p_hat,
                "ci_lo": base.ci95_low,
                "ci_hi": base.ci95_high,
                "trials": cfg.trials,
                "seed": cfg.seed,
            }
            if include_lsr:
                opt = optimize_b(config, rate_nats, _search_spec(cfg), workers=workers)
                row.update(
                    b_star=opt.b_star,
                    p_lsr=opt.outage.p_hat,
                    ci_lo_lsr=opt.outage.ci95_low,
                    ci_hi_lsr=opt.outage.ci95_high,
                )
            rows.append(row)
    columns = OUTAGE_CURVE_COLUMNS if include_lsr else OUTAGE_CURVE_COLUMNS_LMMSE_ONLY
    return ResultTable(columns=columns, rows=rows)


B_VS_SNR_COLUMNS = [
    "snr_db", "n_r", "rate_bits", "a", "b_star", "b_over_a",
    "p_lsr", "ci_lo", "ci_hi", "trials", "seed",
]


def run_b_vs_snr(cfg: ExperimentConfig, *, workers: int = 1) -> ResultTable:
    """Optimal shrinkage coefficient across the SNR grid, per antenna count."""
    rows = []
    for n_r, rate_bits in zip(cfg.n_r_list, cfg._rates()):
        rate_nats = rate_bits_to_nats(rate_bits)
        for snr in cfg.snr_db:
            config = build_channel_config(snr, n_r)
            a = abs(lmmse_coefficient(config))
            opt = optimize_b(config, rate_nats, _search_spec(cfg), workers=workers)
            rows.append({
                "snr_db": float(snr),
                "n_r": int(n_r),
                "rate_bits": float(rate_bits),
                "a": a,
                "b_star": opt.b_star,
                "b_over_a": opt.b_star / a,
                "p_lsr": opt.outage.p_hat,
                "ci_lo": opt.outage.ci95_low,
                "ci_hi": opt.outage.ci95_high,
                "trials": cfg.trials,
                "seed": cfg.seed,
            })
    return ResultTable(columns=B_VS_SNR_COLUMNS, rows=rows)


GMI_HISTOGRAM_COLUMNS = [
    "snr_db", "n_r", "rate_bits", "receiver", "b", "bin_index",
    "edge_lo", "edge_hi", "count", "gmi_mean", "gmi_variance", "trials", "seed",
]


def run_gmi_histogram(cfg: ExperimentConfig, *, workers: int = 1) -> ResultTable:
    """GMI histograms of the LMMSE receiver and the optimized-shrinkage receiver."""
    rows = []
    for n_r, rate_bits in zip(cfg.n_r_list, cfg._rates()):
        rate_nats = rate_bits_to_nats(rate_bits)
        for snr in cfg.snr_db:
            config = build_channel_config(snr, n_r)
            a = abs(lmmse_coefficient(config))
            opt = optimize_b(config, rate_nats, _search_spec(cfg), workers=workers)
            for receiver, b in (("lmmse", a), ("lsr", opt.b_star)):
                hist = gmi_histogram(
                    config, b, cfg.trials, cfg.seed, cfg.bins, workers=workers
                )
                for i in range(len(hist.counts)):
                    rows.append({
                        "snr_db": float(snr),
                        "n_r": int(n_r),
                        "rate_bits": float(rate_bits),
                        "receiver": receiver,
                        "b": b,
                        "bin_index": i,
                        "edge_lo": float(hist.edges[i]),
                        "edge_hi": float(hist.edges[i + 1]),
                        "count": int(hist.counts[i]),
                        "gmi_mean": hist.mean,
                        "gmi_variance": hist.variance,
                        "trials": cfg.trials,
                        "seed": cfg.seed,
                    })
    return ResultTable(columns=GMI_HISTOGRAM_COLUMNS, rows=rows)


B_SWEEP_COLUMNS = [
    "snr_db", "n_r", "rate_bits", "b_over_a", "b", "p_hat",
    "ci_lo", "ci_hi", "trials", "seed",
]


def run_b_sweep(cfg: ExperimentConfig, *, workers: int = 1) -> ResultTable:
    """Outage at explicit ``b / a`` ratios (diagnostic around the optimum)."""
    rows = []
    for n_r, rate_bits in zip(cfg.n_r_list, cfg._rates()):
        rate_nats = rate_bits_to_nats(rate_bits)
        for snr in cfg.snr_db:
            config = build_channel_config(snr, n_r)
            a = abs(lmmse_coefficient(config))
            bs = [float(r) * a for r in cfg.b_over_a]
            results = b_sweep(
                config, rate_nats, bs, cfg.trials, cfg.seed, workers=workers
            )
            for ratio, (b, est) in zip(cfg.b_over_a, results):
                rows.append({
                    "snr_db": float(snr),
                    "n_r": int(n_r),
                    "rate_bits": float(rate_bits),
                    "b_over_a": float(ratio),
                    "b": b,
                    "p_hat": est.p_hat,
                    "ci_lo": est.ci95_low,
                    "ci_hi": est.ci95_high,
                    "trials": cfg.trials,
                    "seed": cfg.seed,
                })
    return ResultTable(columns=B_SWEEP_COLUMNS, rows=rows)


ASYMPTOTIC_SCAN_COLUMNS = [
    "snr_db", "n_r", "b_rule", "b", "gmi_median", "gmi_p01", "trials", "seed",
]


def run_asymptotic_scan(cfg: ExperimentConfig, *, workers: int = 1) -> ResultTable:
    """GMI quantiles versus antenna count for the matched and a mismatched rule.

    For each antenna count the matched rule ``b = a`` and the mismatched rule
    ``b = b_scale * a`` are evaluated on shared realizations; the medians
    exhibit logarithmic growth for the matched rule and saturation otherwise.
    """
    rows = []
    for snr in cfg.snr_db:
        for n_r in cfg.n_r_list:
            config = build_channel_config(snr, n_r)
            a = abs(lmmse_coefficient(config))
            rules = (("lmmse", a), ("scaled", cfg.b_scale * a))
            gmi = gmi_samples_multi_b(
                config, [b for _, b in rules], cfg.trials, cfg.seed, workers=workers
            )
            for k, (rule, b) in enumerate(rules):
                rows.append({
                    "snr_db": float(snr),
                    "n_r": int(n_r),
                    "b_rule": rule,
                    "b": b,
                    "gmi_median": float(np.median(gmi[k])),
                    "gmi_p01": float(np.percentile(gmi[k], 1.0)),
                    "trials": cfg.trials,
                    "seed": cfg.seed,
                })
    return ResultTable(columns=ASYMPTOTIC_SCAN_COLUMNS, rows=rows)


_RUNNERS = {
    "outage_curve": run_outage_curve,
    "b_vs_snr": run_b_vs_snr,
    "gmi_histogram": run_gmi_histogram,
    "b_sweep": run_b_sweep,
    "asymptotic_scan": run_asymptotic_scan,
}


def run_experiment(cfg: ExperimentConfig, *, workers: int = 1) -> ResultTable:
    """Dispatch a config to its runner."""
    return _RUNNERS[cfg.kind](cfg, workers=workers)


def curve_points(table: ResultTable, p_column: str, *, snr_column: str = "snr_db") -> list[tuple[float, float]]:
    """Extract ``(snr_db, outage)`` pairs of one receiver from a result table."""
    return [(float(r[snr_column]), float(r[p_column])) for r in table.rows]


def snr_gain(
    curve_a: Sequence[tuple[float, float]],
    curve_b: Sequence[tuple[float, float]],
    target_outage: float,
) -> float:
    """SNR difference (dB) between two outage curves at a target outage level.

    Each curve is a sequence of ``(snr_db, outage)`` points; the SNR at which
    a curve crosses the target is found by interpolating linearly in
    ``(snr_db, log10 outage)`` on the first bracketing segment.  Raises
    :class:`NotBracketedError` when a curve never crosses the target.
    """
    if not (0 < target_outage < 1):
        raise ValueError(f"target_outage must be in (0, 1), got {target_outage}")
    return _crossing_snr(curve_a, target_outage) - _crossing_snr(curve_b, target_outage)


def _crossing_snr(curve: Sequence[tuple[float, float]], target: float) -> float:
    pts = sorted((float(s), float(p)) for s, p in curve)
    if not pts:
        raise NotBracketedError("empty curve")
    log_t = math.log10(target)
    for (s0, p0), (s1, p1) in zip(pts, pts[1:]):
        if p0 == target:
            return s0
        if p0 > 0 and p1 > 0 and (p0 - target) * (p1 - target) <= 0:
            l0, l1 = math.log10(p0), math.log10(p1)
            if l0 == l1:
                return s0
            return s0 + (s1 - s0) * (log_t - l0) / (l1 - l0)
    if pts[-1][1] == target:
        return pts[-1][0]
    raise NotBracketedError(
        f"curve does not bracket target outage {target} within its SNR range"
    )


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        raise TypeError("boolean cells are not part of any table schema")
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    return str(value)


def emit_results(table: ResultTable, path, format: str = "csv") -> None:
    """Write a result table as CSV (header row) or JSON (array of objects).

    Floats are serialized with 17 significant digits, which round-trips
    float64 exactly; files always use ``\\n`` line endings so identical runs
    produce byte-identical output.
    """
    if format == "csv":
        lines = [",".join(table.columns)]
        for row in table.rows:
            lines.append(",".join(_format_scalar(row[c]) for c in table.columns))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        if not table.rows:
            text = "[]\n"
        else:
            body = []
            for row in table.rows:
                cells = []
                for c in table.columns:
                    v = row[c]
                    key = json.dumps(c)
                    if isinstance(v, str):
                        cells.append(f"{key}: {json.dumps(v)}")
                    else:
                        cells.append(f"{key}: {_format_scalar(v)}")
                body.append("  {" + ", ".join(cells) + "}")
            text = "[\n" + ",\n".join(body) + "\n]\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_results(path, format: str = "csv") -> ResultTable:
    """Read back a table written by :func:`emit_results`."""
    if format == "csv":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh if line.strip() != ""]
        if not lines:
            return ResultTable(columns=[], rows=[])
        columns = lines[0].split(",")
        rows = [
            {c: _parse_scalar(v) for c, v in zip(columns, line.split(","))}
            for line in lines[1:]
        ]
        return ResultTable(columns=columns, rows=rows)
    if format == "json":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        columns = list(data[0].keys()) if data else []
        return ResultTable(columns=columns, rows=data)
    raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
