"""Free Schrodinger equation i u_t = -u_xx on the circle, in Fourier coefficients.

The scale is weighted by nu_n = 1 + n^2, so level s is W^{2s,2}. The flow is
the exact phase map exp(-i t n^2); nothing is integrated numerically.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import multipliers as mult
from .sc_check import DualCovector, ResidualTable
from .scales import BandVector, WeightSequence, fmt, level_norm

NU = WeightSequence.sobolev_double()


def _n2(x: BandVector) -> np.ndarray:
    return x.indices.astype(np.float64) ** 2


def hamiltonian(u: BandVector) -> float:
    """h(u) = ||u_x||_0^2 / 2 = (1/2) sum n^2 |u_n|^2."""
    c = u.coeffs
    return 0.5 * float(np.sum(_n2(u) * (c.real ** 2 + c.imag ** 2)))


def dh(u: BandVector) -> DualCovector:
    """Strong derivative u -> -<u_xx, .>_0; the representative is n^2 u_n."""
    return DualCovector(BandVector(_n2(u) * u.coeffs))


def vector_field(u: BandVector) -> BandVector:
    """V(u) = i u_xx, the multiplier -i n^2."""
    return mult.apply(mult.schrodinger_field(), u)


def flow(t: float, u: BandVector) -> BandVector:
    return mult.apply(mult.propagator(t), u)


def flow_residual(t: float, delta: float, u: BandVector, level: float = 0) -> float:
    """Level-m norm of the central difference in t of the flow minus V(flow(t, u))."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    dt = (flow(t + delta, u) - flow(t - delta, u)) / (2 * delta)
    return level_norm(dt - vector_field(flow(t, u)), NU, level)


def flow_residual_table(t: float, u: BandVector, deltas: Sequence[float],
                        level: float = 0, label: str = "flow_residual") -> ResidualTable:
    res = [flow_residual(t, d, u, level) for d in deltas]
    return ResidualTable.from_ladder(deltas, res, label=label)


def flow_tangent(t: float, u: BandVector, h: float, xi: BandVector) -> BandVector:
    """Scale derivative of the flow: phi(t, xi) + h i Laplacian phi(t, u)."""
    return flow(t, xi) + h * vector_field(flow(t, u))


def hierarchy_family(k: int) -> BandVector:
    """u_k = k^{-1/2} delta_k: level-0 norm -> 0 while h(u_k) = k/2 -> infinity."""
    return BandVector.delta(k, value=k ** -0.5)


@dataclass(frozen=True)
class SchrodingerSystem:
    """The Hamiltonian system (h, V = i Laplacian, phi_t = exp(i t Laplacian)) on the W^{2s,2} scale."""

    nu: WeightSequence = field(default_factory=WeightSequence.sobolev_double)

    hamiltonian = staticmethod(hamiltonian)
    dh = staticmethod(dh)
    vector_field = staticmethod(vector_field)
    flow = staticmethod(flow)


def trajectory_csv(u: BandVector, times: Iterable[float], extra: Optional[dict] = None) -> str:
    """Rows t, re_n, im_n for n = -N..N, energy, then one column per ``extra`` entry."""
    extra = extra or {}
    buf = io.StringIO()
    w = csv.writer(buf)
    header = ["t"]
    for n in u.indices:
        header += [f"re_{n}", f"im_{n}"]
    w.writerow(header + ["energy"] + list(extra))
    for t in times:
        v = flow(t, u)
        row = [fmt(t)]
        for z in v.coeffs:
            row += [fmt(z.real), fmt(z.imag)]
        row.append(fmt(hamiltonian(v)))
        w.writerow(row + [fmt(fn(v)) for fn in extra.values()])
    return buf.getvalue()
