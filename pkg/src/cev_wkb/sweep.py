"""One-parameter sweeps comparing the WKB price against Monte Carlo.

Each row perturbs one of ``alpha``, ``maturity``, ``sigma`` or ``mu`` away
from a base configuration and records both prices and their gap.  Rows are
reseeded from ``(base_seed, row_index)`` so a row's estimate does not depend
on which other rows are in the sweep.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import CevParams, MarketSpec
from .errors import CevWkbError, ParameterDomainError
from .montecarlo import McConfig, mc_call_price
from .pricing import QuadConfig, cev_call_price

AXES = ("alpha", "maturity", "sigma", "mu")
CSV_HEADER = ["axis", "axis_value", "wkb_price", "mc_mean", "mc_std_error",
              "abs_error", "n_paths", "seed", "error"]

REFERENCE_MARKET = MarketSpec(s0=100.0, strike=110.0, rate=0.03, maturity=1.0)
REFERENCE_CEV = CevParams(mu=0.03, sigma=0.3, alpha=-0.5)

#: Standard grid of each sweep axis, each value paired with a benchmark absolute error.
REFERENCE_TABLE = {
    "alpha": [(-0.9, 1.5241e-48), (-0.8, 6.9853e-21), (-0.7, 1.2885e-9), (-0.6, 2.2665e-5),
              (-0.5, 1.8319e-3), (-0.4, 2.1165e-2), (-0.3, 9.6261e-2), (-0.2, 2.1308e-1),
              (-0.1, 2.4028e-1)],
    "maturity": [(0.5, 1.5962e-5), (0.625, 1.0219e-4), (0.75, 3.2585e-4), (0.875, 1.1808e-3),
                 (1.0, 1.9668e-3), (1.125, 3.2811e-3), (1.25, 4.2473e-3), (1.375, 5.4281e-3),
                 (1.5, 7.0258e-3)],
    "sigma": [(0.05, 1.3921e-42), (0.1125, 2.2606e-10), (0.175, 6.7383e-6), (0.2375, 1.8603e-4),
              (0.3, 1.5703e-3), (0.3625, 7.2910e-3), (0.425, 1.7807e-2), (0.4875, 3.7453e-2),
              (0.55, 6.4019e-2)],
    "mu": [(0.01, 2.7923e-4), (0.015, 4.6876e-4), (0.02, 9.1751e-4), (0.025, 1.3720e-3),
           (0.03, 2.0402e-3), (0.035, 2.3132e-3), (0.04, 3.6850e-3), (0.045, 4.7365e-3),
           (0.05, 6.9212e-3)],
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    market: MarketSpec = REFERENCE_MARKET
    cev: CevParams = REFERENCE_CEV

    def __post_init__(self):
        if self.axis not in AXES:
            raise ParameterDomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        vals = tuple(float(v) for v in self.values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ParameterDomainError("sweep values must be strictly ascending")
        object.__setattr__(self, "values", vals)
        for v in vals:
            self.configure(v)

    def configure(self, value: float):
        """``(MarketSpec, CevParams)`` with the swept parameter set to ``value``."""
        if self.axis == "maturity":
            return replace(self.market, maturity=value), self.cev
        return self.market, replace(self.cev, **{self.axis: value})


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    wkb_price: float
    mc_mean: float
    mc_std_error: float
    abs_error: float
    n_paths: int
    seed: int
    error: str = field(default="")


def row_seed(base_seed: int, row_index: int) -> int:
    return int(np.random.SeedSequence([base_seed, row_index]).generate_state(1, dtype=np.uint64)[0])


def run_sweep(spec: SweepSpec, mc: McConfig, q: QuadConfig | None = None, out=None) -> list[SweepRow]:
    """Evaluate every row of ``spec``; optionally write the CSV to ``out``.

    ``out`` may be a path or a text file object.  Kernel and quadrature
    failures end up in the row's ``error`` field instead of aborting.
    """
    q = QuadConfig() if q is None else q
    rows = []
    for i, value in enumerate(spec.values):
        market, cev = spec.configure(value)
        seed = row_seed(mc.seed, i)
        nan = float("nan")
        try:
            wkb = cev_call_price(market, cev, q)
            est = mc_call_price(market, cev, replace(mc, seed=seed))
        except CevWkbError as exc:
            rows.append(SweepRow(spec.axis, value, nan, nan, nan, nan, mc.n_paths, seed,
                                 f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(SweepRow(spec.axis, value, wkb, est.mean, est.std_error,
                             abs(wkb - est.mean), est.n_effective, seed))
    if out is not None:
        write_sweep_csv(rows, out)
    return rows


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def format_sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def write_sweep_csv(rows, out) -> None:
    text = format_sweep_csv(rows)
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def read_sweep_csv(src) -> list[SweepRow]:
    """Parse a file written by :func:`write_sweep_csv` back into rows."""
    if hasattr(src, "read"):
        text = src.read()
    else:
        with open(src, newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            axis=rec["axis"],
            axis_value=float(rec["axis_value"]),
            wkb_price=float(rec["wkb_price"]),
            mc_mean=float(rec["mc_mean"]),
            mc_std_error=float(rec["mc_std_error"]),
            abs_error=float(rec["abs_error"]),
            n_paths=int(rec["n_paths"]),
            seed=int(rec["seed"]),
            error=rec["error"],
        ))
    return rows


def rows_equal(a: SweepRow, b: SweepRow) -> bool:
    """Field-wise equality that treats NaN as equal to NaN."""
    for k in CSV_HEADER:
        u, v = getattr(a, k), getattr(b, k)
        if isinstance(u, float) and math.isnan(u) and math.isnan(v):
            continue
        if u != v:
            return False
    return True
