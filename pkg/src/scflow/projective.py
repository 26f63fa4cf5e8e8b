"""The projective Hilbert space P(L^2) in Fourier coefficients.

Chart bookkeeping: a chart anchored at slot a deletes coefficient a and
shifts the higher indices down by one. Chart coordinates on band N
(indices -N..N) therefore correspond to the original indices
{-N, ..., N+1} minus {a}, which makes every transition a map from band N
to band N. Inverse charts return representatives of band N+1 whose
coefficient at -(N+1) is zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from . import multipliers as mult
from . import schrodinger
from .sc_check import DualCovector
from .scales import BandVector, fmt, level_norm

CHART_GUARD = 1e-12
UNIT_TOL = 1e-12


class ChartDomainError(ValueError):
    """The point is outside the domain of the requested chart."""


@dataclass(frozen=True)
class RayPoint:
    """A ray [x] with unit representative. ``anchor`` is the slot a with x_a > 0, if fixed."""

    rep: BandVector
    anchor: Optional[int] = None

    def __post_init__(self):
        nrm = level_norm(self.rep, schrodinger.NU, 0)
        if abs(nrm - 1.0) > UNIT_TOL:
            raise ValueError(f"representative must have unit norm, got {nrm!r}")


@dataclass(frozen=True)
class ChartId:
    a: int
    flavor: str = "darboux"

    def __post_init__(self):
        if self.flavor not in ("affine", "darboux"):
            raise ValueError(f"unknown chart flavor {self.flavor!r}")


def _as_chart(c: Union[ChartId, int]) -> ChartId:
    return c if isinstance(c, ChartId) else ChartId(int(c))


def ray_of(x: BandVector) -> RayPoint:
    nrm = level_norm(x, schrodinger.NU, 0)
    if nrm == 0:
        raise ValueError("the zero vector does not define a ray")
    return RayPoint(x / nrm)


def phase_fixed(p: RayPoint, a: int) -> RayPoint:
    """Same ray with the representative rotated so that x_a is real and positive."""
    xa = p.rep[a]
    if abs(xa) <= CHART_GUARD:
        raise ChartDomainError(f"|x_{a}| = {abs(xa):.3g} is outside chart {a}")
    c = (p.rep * (abs(xa) / xa)).padded(max(p.rep.band, abs(a))).coeffs.copy()
    c[a + (c.size - 1) // 2] = abs(xa)
    return RayPoint(BandVector(c), anchor=a)


def ray_distance(p: RayPoint, q: RayPoint) -> float:
    """min over unit phases c of ||p.rep - c q.rep||_0."""
    a, b = p.rep._aligned(q.rep)
    z = np.sum(a * np.conj(b))
    c = 1.0 if z == 0 else z / abs(z)
    d = a - c * b
    return float(np.sqrt(np.sum(d.real ** 2 + d.imag ** 2)))


def chart_slots(a: int, band: int) -> np.ndarray:
    """Original indices behind chart coordinates -band..band of chart a."""
    n = np.arange(-band, band + 1)
    return np.where(n < a, n, n + 1)


def _chart_band(x: BandVector, a: int) -> int:
    nz = x.indices[x.coeffs != 0]
    lo = min(int(nz.min()), a)
    hi = max(int(nz.max()), a)
    return max(0, -lo, hi - 1)


def _window(x: BandVector, a: int, band: Optional[int]):
    if band is None:
        band = _chart_band(x, a)
    if not -band <= a <= band + 1:
        raise ChartDomainError(f"slot {a} is outside the chart window of band {band}")
    nz = x.indices[x.coeffs != 0]
    if nz.size and (nz.min() < -band or nz.max() > band + 1):
        raise ValueError(f"representative has support outside the band-{band} chart window")
    full = x.padded(max(x.band, band + 1))
    slots = chart_slots(a, band)
    return band, full.coeffs[slots + full.band], full[a]


def affine_chart(a: int, p: RayPoint, band: Optional[int] = None) -> BandVector:
    """phi_a([x]) = x (slot a deleted, higher slots shifted down) / x_a."""
    band, w, xa = _window(p.rep, a, band)
    if abs(xa) <= CHART_GUARD:
        raise ChartDomainError(f"|x_{a}| = {abs(xa):.3g} is outside chart {a}")
    return BandVector(w / xa)


def affine_chart_inverse(a: int, u: BandVector) -> RayPoint:
    band = u.band
    x = np.zeros(2 * (band + 1) + 1, dtype=np.complex128)
    off = band + 1
    x[chart_slots(a, band) + off] = u.coeffs
    x[a + off] = 1.0
    p = ray_of(BandVector(x))
    return RayPoint(p.rep, anchor=a)


def darboux_chart(a: int, p: RayPoint, band: Optional[int] = None) -> BandVector:
    """psi_a([x]) = |x_a| / (x_a ||x||_0) times x with slot a deleted; lands in the unit ball."""
    band, w, xa = _window(p.rep, a, band)
    if abs(xa) <= CHART_GUARD:
        raise ChartDomainError(f"|x_{a}| = {abs(xa):.3g} is outside chart {a}")
    nrm = level_norm(p.rep, schrodinger.NU, 0)
    return BandVector(w * (abs(xa) / (xa * nrm)))


def darboux_chart_inverse(a: int, u: BandVector) -> RayPoint:
    """The ray through x with x_a = sqrt(1 - ||u||_0^2) and the other slots u."""
    band = u.band
    c = u.coeffs
    r2 = float(np.sum(c.real ** 2 + c.imag ** 2))
    if r2 >= 1.0:
        raise ChartDomainError(f"||u||_0^2 = {r2!r} is outside the unit ball")
    xa = np.sqrt(1.0 - r2)
    if xa <= CHART_GUARD:
        raise ChartDomainError("point too close to the boundary of the chart ball")
    x = np.zeros(2 * (band + 1) + 1, dtype=np.complex128)
    off = band + 1
    x[chart_slots(a, band) + off] = c
    x[a + off] = xa
    return RayPoint(BandVector(x), anchor=a)


def chart(c: Union[ChartId, int], p: RayPoint, band: Optional[int] = None) -> BandVector:
    c = _as_chart(c)
    fn = darboux_chart if c.flavor == "darboux" else affine_chart
    return fn(c.a, p, band)


def chart_inverse(c: Union[ChartId, int], u: BandVector) -> RayPoint:
    c = _as_chart(c)
    fn = darboux_chart_inverse if c.flavor == "darboux" else affine_chart_inverse
    return fn(c.a, u)


def transition(a: Union[ChartId, int], b: Union[ChartId, int], u: BandVector) -> BandVector:
    """Chart b after the inverse of chart a, band preserved. Integers mean Darboux charts."""
    return chart(b, chart_inverse(a, u), band=u.band)


def momentum_map(x: BandVector) -> float:
    """mu(x) = (1 - ||x||_0^2) / 2."""
    return 0.5 * (1.0 - level_norm(x, schrodinger.NU, 0) ** 2)


def reduced_flow(t: float, p: RayPoint) -> RayPoint:
    """The Schrodinger flow on rays: [x] -> [exp(i t Laplacian) x]."""
    return ray_of(schrodinger.flow(t, p.rep))


def chart_flow(a: int, t: float, u: BandVector) -> BandVector:
    """The reduced flow written in Darboux chart a."""
    return darboux_chart(a, reduced_flow(t, darboux_chart_inverse(a, u)), band=u.band)


def chart_phase_map(a: int, t: float, u: BandVector) -> BandVector:
    """Closed form of :func:`chart_flow`: the multiplier exp(i t sigma_a)."""
    sig = mult.make_sigma(a).coeffs(u.band).real
    return BandVector(np.exp(1j * t * sig) * u.coeffs)


def reduced_field_chart(a: int, u: BandVector) -> BandVector:
    """Reduced vector field in chart a: u -> i sigma_a(u)."""
    return 1j * mult.apply(mult.make_sigma(a), u)


def reduced_hamiltonian(p: RayPoint) -> float:
    """(1/2) ||u_x||_0^2 / ||u||_0^2."""
    return schrodinger.hamiltonian(p.rep) / level_norm(p.rep, schrodinger.NU, 0) ** 2


def reduced_hamiltonian_chart(a: int, u: BandVector) -> float:
    return reduced_hamiltonian(darboux_chart_inverse(a, u))


def reduced_dh_chart(a: int, u: BandVector) -> DualCovector:
    """Derivative of the chart-a reduced Hamiltonian: -<sigma_a(u), .>_0."""
    return DualCovector(-mult.apply(mult.make_sigma(a), u))


def best_chart(p: RayPoint) -> int:
    """argmax_a |x_a|; ties go to the smallest |a|, then to negative a."""
    mags = np.abs(p.rep.coeffs)
    top = mags.max()
    cands = [int(n) for n, m in zip(p.rep.indices, mags) if m == top]
    return min(cands, key=lambda n: (abs(n), n))


def chart_trajectory(p0: RayPoint, times: Iterable[float], threshold: float = 0.1):
    """Follow the reduced flow, re-anchoring when |x_a| of the current chart drops below ``threshold``.

    Yields (t, a, phase-fixed point, Darboux coordinates).
    """
    a = None
    for t in times:
        p = reduced_flow(t, p0)
        if a is None or abs(p.rep[a]) < threshold:
            a = best_chart(p)
        q = phase_fixed(p, a)
        yield t, a, q, darboux_chart(a, q)


def ray_trajectory_csv(p0: RayPoint, times: Iterable[float], threshold: float = 0.1) -> str:
    """Rows t, chart, re_n/im_n of the phase-fixed representative, energy, momentum."""
    buf = io.StringIO()
    w = csv.writer(buf)
    header = ["t", "chart"]
    for n in p0.rep.indices:
        header += [f"re_{n}", f"im_{n}"]
    w.writerow(header + ["energy", "momentum"])
    for t, a, q, _ in chart_trajectory(p0, times, threshold):
        row = [fmt(t), str(a)]
        for z in q.rep.padded(p0.rep.band).coeffs:
            row += [fmt(z.real), fmt(z.imag)]
        row += [fmt(reduced_hamiltonian(q)), fmt(momentum_map(q.rep))]
        w.writerow(row)
    return buf.getvalue()
