"""Benchmark schemes and the Monte-Carlo sweep harness (CSV and SVG output)."""

import csv
import dataclasses
import time
import xml.etree.ElementTree as ET
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alternating import AoOptions, ao_discrete, ao_optimize, discretize_report
from .channel import THETA_STREAM, random_theta, realization_rng, scenario_channels
from .errors import ConfigError
from .secrecy import secrecy_rate
from .txcov import sca_optimize

__all__ = [
    "AXES",
    "Scheme",
    "DEFAULT_SCHEMES",
    "SweepResult",
    "run_scheme",
    "monte_carlo_sweep",
    "emit_csv",
    "read_csv",
    "emit_plot",
]

AXES = {"p_max": ("p_max", float), "m_elements": ("m", int), "n_r": ("n_r", int)}
CSV_HEADER = ["axis", "scheme", "mean_rate_bps_hz", "std_rate_bps_hz", "n"]


@dataclass(frozen=True)
class Scheme:
    kind: str
    q_levels: int = 0

    def __post_init__(self):
        if self.kind not in ("no_irs", "random_irs", "ao_continuous", "ao_discrete"):
            raise ConfigError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "ao_discrete" and self.q_levels < 2:
            raise ConfigError("ao_discrete needs q_levels >= 2")

    @property
    def name(self):
        return f"ao_q{self.q_levels}" if self.kind == "ao_discrete" else self.kind

    @classmethod
    def parse(cls, name):
        name = name.strip()
        if name.startswith("ao_q"):
            try:
                return cls("ao_discrete", int(name[4:]))
            except ValueError:
                raise ConfigError(f"bad scheme name {name!r}") from None
        return cls(name)


DEFAULT_SCHEMES = tuple(Scheme.parse(s) for s in ("no_irs", "random_irs", "ao_continuous", "ao_q8", "ao_q2"))


@dataclass
class SweepResult:
    axis_name: str
    axis_values: list
    schemes: list
    mean: dict
    std: dict
    n: int
    wall_time: list = field(default_factory=list)
    rates: dict = field(default_factory=dict)
    digests: list = field(default_factory=list)


def run_scheme(scheme, chs, p_max, ao=None, rng=None):
    """Clamped secrecy rate of one scheme on one channel realization."""
    ao = ao or AoOptions()
    rng = rng if rng is not None else np.random.default_rng()
    if scheme.kind == "no_irs":
        q, _ = sca_optimize(chs, None, p_max, opts=ao.sca)
        return secrecy_rate(chs, None, q, clamp=True)
    if scheme.kind == "random_irs":
        theta = random_theta(chs.m, rng)
        q, _ = sca_optimize(chs, theta, p_max, opts=ao.sca)
        return secrecy_rate(chs, theta, q, clamp=True)
    if scheme.kind == "ao_continuous":
        return ao_optimize(chs, p_max, ao, rng).secrecy_rate_clamped
    opts = dataclasses.replace(ao, q_levels=scheme.q_levels)
    return ao_discrete(chs, p_max, opts, rng).secrecy_rate_clamped


def _realization(task):
    cfg, ao, schemes, idx = task
    start = time.perf_counter()
    chs = scenario_channels(cfg, idx)
    rates = {}
    continuous = None
    for scheme in schemes:
        # every scheme draws its phases from the same stream (paired design)
        rng = realization_rng(cfg.master_seed, idx, THETA_STREAM)
        if scheme.kind in ("ao_continuous", "ao_discrete"):
            if continuous is None:
                continuous = ao_optimize(chs, cfg.p_max, ao, rng)
            if scheme.kind == "ao_continuous":
                rates[scheme.name] = continuous.secrecy_rate_clamped
            else:
                rates[scheme.name] = discretize_report(
                    continuous, chs, cfg.p_max, scheme.q_levels,
                    ao.reoptimize_q_after_projection, ao.sca,
                ).secrecy_rate_clamped
        else:
            rates[scheme.name] = run_scheme(scheme, chs, cfg.p_max, ao, rng)
    return rates, chs.digest(), time.perf_counter() - start


def monte_carlo_sweep(cfg, axis, values, n_realizations, schemes=DEFAULT_SCHEMES, ao=None, workers=1):
    """Average clamped secrecy rate of every scheme along one parameter axis.

    Realization ``r`` uses the same channel seed at every axis point and for
    every scheme. Results are stored by index, so the output does not
    depend on ``workers``.
    """
    if axis not in AXES:
        raise ConfigError(f"axis must be one of {sorted(AXES)}, got {axis!r}")
    field_name, cast = AXES[axis]
    values = [cast(v) for v in values]
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("axis values must be non-empty and strictly ascending")
    if n_realizations < 1:
        raise ConfigError("n_realizations must be >= 1")
    ao = ao or AoOptions()
    schemes = list(schemes)
    names = [s.name for s in schemes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate schemes")

    tasks = [
        (cfg.replace(**{field_name: v}), ao, schemes, r)
        for v in values
        for r in range(n_realizations)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_realization, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        outputs = [_realization(t) for t in tasks]

    rates = {name: np.zeros((len(values), n_realizations)) for name in names}
    digests = [[None] * n_realizations for _ in values]
    wall = [0.0] * len(values)
    for k, (point_rates, digest, elapsed) in enumerate(outputs):
        i, r = divmod(k, n_realizations)
        for name in names:
            rates[name][i, r] = point_rates[name]
        digests[i][r] = digest
        wall[i] += elapsed
    mean = {name: [float(np.mean(rates[name][i])) for i in range(len(values))] for name in names}
    std = {
        name: [float(np.std(rates[name][i], ddof=1)) if n_realizations > 1 else 0.0 for i in range(len(values))]
        for name in names
    }
    return SweepResult(axis, values, names, mean, std, n_realizations, wall, rates, digests)


def _fmt(x):
    return f"{x:.9g}"


def emit_csv(result, path):
    """Write one row per (axis value, scheme) with LF line endings."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i, value in enumerate(result.axis_values):
            for name in result.schemes:
                writer.writerow([_fmt(value), name, _fmt(result.mean[name][i]), _fmt(result.std[name][i]), result.n])
    return path


def read_csv(path, axis_name="axis"):
    """Parse a file written by :func:`emit_csv` back into a :class:`SweepResult`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = list(reader)
    axis_values, schemes, mean, std, n = [], [], {}, {}, 0
    for value, name, m, s, count in rows:
        value = float(value)
        if not axis_values or axis_values[-1] != value:
            axis_values.append(value)
        if name not in mean:
            schemes.append(name)
            mean[name], std[name] = [], []
        mean[name].append(float(m))
        std[name].append(float(s))
        n = int(count)
    return SweepResult(axis_name, axis_values, schemes, mean, std, n)


_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]
_AXIS_LABELS = {"p_max": "P_max (W)", "m_elements": "Number of IRS elements M", "n_r": "Receive antennas N_R"}


def emit_plot(result, path, width=640, height=420):
    """Render the sweep as a standalone SVG line chart (one series per scheme)."""
    if not result.axis_values:
        raise ValueError("nothing to plot")
    left, right, top, bottom = 70.0, 150.0, 20.0, 50.0
    pw, ph = width - left - right, height - top - bottom
    xs = [float(v) for v in result.axis_values]
    ys = [v for name in result.schemes for v in result.mean[name]]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + ph - (y - y_lo) / (y_hi - y_lo) * ph

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg", "version": "1.1",
        "width": str(width), "height": str(height),
        "data-y-min": repr(float(y_lo)), "data-y-max": repr(float(y_hi)),
        "data-plot-top": repr(top), "data-plot-height": repr(ph),
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": str(width), "height": str(height), "fill": "white"})
    ET.SubElement(svg, "line", {"x1": str(left), "y1": str(top + ph), "x2": str(left + pw), "y2": str(top + ph), "stroke": "black"})
    ET.SubElement(svg, "line", {"x1": str(left), "y1": str(top), "x2": str(left), "y2": str(top + ph), "stroke": "black"})
    for k in range(5):
        yv = y_lo + (y_hi - y_lo) * k / 4
        t = ET.SubElement(svg, "text", {"x": str(left - 6), "y": f"{py(yv) + 4:.3f}", "text-anchor": "end", "font-size": "10"})
        t.text = f"{yv:.3g}"
    for xv in xs:
        t = ET.SubElement(svg, "text", {"x": f"{px(xv):.3f}", "y": str(top + ph + 15), "text-anchor": "middle", "font-size": "10"})
        t.text = f"{xv:g}"
    xl = ET.SubElement(svg, "text", {"x": str(left + pw / 2), "y": str(height - 10), "text-anchor": "middle", "font-size": "12"})
    xl.text = _AXIS_LABELS.get(result.axis_name, result.axis_name)
    yl = ET.SubElement(svg, "text", {
        "x": "15", "y": str(top + ph / 2), "text-anchor": "middle", "font-size": "12",
        "transform": f"rotate(-90 15 {top + ph / 2})",
    })
    yl.text = "Average secrecy rate (bits/s/Hz)"

    for k, name in enumerate(result.schemes):
        color = _COLORS[k % len(_COLORS)]
        group = ET.SubElement(svg, "g", {"class": "series", "data-scheme": name})
        pts = [(px(x), py(y)) for x, y in zip(xs, result.mean[name])]
        if len(pts) > 1:
            ET.SubElement(group, "polyline", {
                "points": " ".join(f"{a:.3f},{b:.3f}" for a, b in pts),
                "fill": "none", "stroke": color, "stroke-width": "1.5",
            })
        for (a, b), y in zip(pts, result.mean[name]):
            ET.SubElement(group, "circle", {"cx": f"{a:.3f}", "cy": f"{b:.3f}", "r": "3", "fill": color, "data-value": repr(float(y))})
        ly = top + 14 * k + 6
        ET.SubElement(svg, "line", {"x1": str(left + pw + 10), "y1": str(ly), "x2": str(left + pw + 30), "y2": str(ly), "stroke": color, "stroke-width": "2"})
        lt = ET.SubElement(svg, "text", {"x": str(left + pw + 35), "y": str(ly + 4), "font-size": "10"})
        lt.text = name

    tree = ET.ElementTree(svg)
    with open(path, "wb") as fh:
        tree.write(fh, encoding="utf-8", xml_declaration=True)
    return path
