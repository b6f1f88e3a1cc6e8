"""Root rates ``l_m^(1/m)`` and the finite-window classification.

The asymptotic lim sup / lim inf are replaced by the max / min of the root
rates over a trailing window of degrees.  The lim sup decides harmonic
extendability; the lim inf decides membership in the quasiharmonic class.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

EXACT_TOL = 1e-12
DEFAULT_THETA = 0.05

HARMONICALLY_EXTENDABLE = "harmonically_extendable"
QUASIHARMONIC_ONLY = "quasiharmonic_only"
NOT_QUASIHARMONIC = "not_quasiharmonic"
EXACTLY_POLYNOMIAL = "exactly_polynomial"


@dataclass(frozen=True)
class DecayReport:
    deviations: list
    root_rates: list
    exact: list
    limsup_estimate: float
    liminf_estimate: float
    tail_window: tuple
    classification: str
    theta: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["root_rates"] = [None if math.isnan(r) else r for r in self.root_rates]
        d["tail_window"] = list(self.tail_window)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "root_rate"])
        for m, r in enumerate(self.root_rates):
            if m >= 1:
                w.writerow([m, repr(r)])
        return buf.getvalue()


def root_rate(deviations, exact_tol: float = EXACT_TOL) -> tuple[list, list]:
    """``deviations[m] ** (1/m)`` for ``m >= 1`` (entry 0 is NaN).

    Deviations below ``exact_tol`` are exact representations: their rate is
    recorded as 0 and flagged.
    """
    dev = np.asarray(deviations, dtype=float)
    if np.any(dev < 0):
        raise ValueError("deviations must be nonnegative")
    rates = [float("nan")]
    exact = [bool(dev[0] < exact_tol)] if len(dev) else []
    for m in range(1, len(dev)):
        if dev[m] < exact_tol:
            rates.append(0.0)
            exact.append(True)
        else:
            rates.append(float(dev[m] ** (1.0 / m)))
            exact.append(False)
    return rates, exact


def classify(
    deviations,
    window: int,
    theta: float = DEFAULT_THETA,
    exact_tol: float = EXACT_TOL,
) -> DecayReport:
    """Classify a deviation sequence ``l_0, ..., l_M`` by its trailing window."""
    dev = [float(d) for d in deviations]
    M = len(dev) - 1
    if window < 3:
        raise ValueError(f"window must be >= 3, got {window}")
    if window > M:
        raise ValueError(f"window {window} exceeds the {M} available root rates")
    rates, exact = root_rate(dev, exact_tol)
    lo = M - window + 1
    tail = rates[lo:]
    limsup, liminf = max(tail), min(tail)
    if any(exact):
        cls = EXACTLY_POLYNOMIAL
    elif limsup < 1 - theta:
        cls = HARMONICALLY_EXTENDABLE
    elif liminf < 1 - theta:
        cls = QUASIHARMONIC_ONLY
    else:
        cls = NOT_QUASIHARMONIC
    return DecayReport(dev, rates, exact, limsup, liminf, (lo, M), cls, theta)


def log_linear_slope(ms, values) -> float:
    """Least-squares slope of ``log(values)`` against ``ms``."""
    ms = np.asarray(ms, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        return float("-inf")
    return float(np.polyfit(ms, np.log(v), 1)[0])


def semilog_svg(series: dict, title: str = "", width: int = 480, height: int = 320) -> str:
    """Semilog line plot of one or more ``{label: (xs, ys)}`` series."""
    pad = 40
    xs_all = [x for xs, _ in series.values() for x in xs]
    ly = [math.log10(y) for _, ys in series.values() for y in ys if y > 0]
    if not xs_all or not ly:
        ly = [0.0, 1.0]
        xs_all = xs_all or [0, 1]
    x0, x1 = min(xs_all), max(xs_all) if max(xs_all) > min(xs_all) else min(xs_all) + 1
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (math.log10(y) - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#888"/>',
    ]
    for e in range(y0, y1 + 1):
        yy = height - pad - (e - y0) / (y1 - y0) * (height - 2 * pad)
        parts.append(f'<text x="4" y="{yy + 4:.1f}" font-size="10">1e{e}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys) if y > 0)
        col = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{col}"/>')
        parts.append(f'<text x="{width - pad - 4}" y="{pad + 14 * (i + 1)}" text-anchor="end" font-size="11" fill="{col}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
