"""Finite-difference probes for scale smoothness, symplecticity and the chain rule.

All derivatives are central differences. Every check returns a plain number
or a :class:`ResidualTable`; nothing here mutates its inputs.
"""

from __future__ import annotations

import io
import csv
import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .multipliers import omega_matrix
from .scales import BandVector, WeightSequence, fmt, level_norm, real_pairing

DEFAULT_EPS = 1e-5
DEFAULT_LADDER = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
MAX_CONDITION = 1e10


class SingularJacobianError(ValueError):
    pass


@dataclass(frozen=True)
class ScaleMap:
    """A map on band vectors, defined on levels >= ``domain_shift``."""

    eval: Callable
    domain_shift: int = 0
    label: str = ""

    def __call__(self, x):
        return self.eval(x)


@dataclass(frozen=True)
class DualCovector:
    """Element of the dual scale, acting by xi -> Re sum g_n conj(xi_n)."""

    rep: BandVector

    def action(self, xi: BandVector) -> float:
        return real_pairing(self.rep, xi)

    __call__ = action


def fit_slope(steps, residuals) -> float:
    """Least-squares slope of log(residual) against log(step)."""
    lx = np.log(np.asarray(steps, dtype=np.float64))
    ly = np.log(np.asarray(residuals, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass(frozen=True)
class ResidualTable:
    steps: tuple
    residuals: tuple
    slope: Optional[float]
    exact: bool = False
    passed: Optional[bool] = None
    label: str = ""

    @classmethod
    def from_ladder(cls, steps, residuals, *, fit_last: int = 4, floor: float = 1e-12,
                    label: str = "", tol: Optional[float] = None,
                    min_slope: Optional[float] = None) -> "ResidualTable":
        steps = tuple(float(e) for e in steps)
        residuals = tuple(float(r) for r in residuals)
        if len(steps) != len(residuals):
            raise ValueError("steps and residuals differ in length")
        if len(steps) < 4:
            raise ValueError("a slope fit needs at least 4 steps")
        if any(e <= 0 for e in steps) or any(b >= a for a, b in zip(steps, steps[1:])):
            raise ValueError("steps must be positive and strictly decreasing")
        exact = max(residuals) <= floor
        slope = None
        if not exact:
            tail_e = steps[-fit_last:]
            tail_r = [max(r, 1e-300) for r in residuals[-fit_last:]]
            slope = fit_slope(tail_e, tail_r)
        passed = None
        if tol is not None:
            passed = residuals[-1] <= tol and (exact or min_slope is None or slope >= min_slope)
        return cls(steps, residuals, slope, exact, passed, label)

    def summary(self) -> dict:
        return {"label": self.label, "slope": "exact" if self.exact else self.slope, "pass": self.passed}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["eps", "residual"])
        for e, r in zip(self.steps, self.residuals):
            w.writerow([fmt(e), fmt(r)])
        buf.write(json.dumps(self.summary(), sort_keys=True) + "\r\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResidualTable":
        lines = text.splitlines()
        summary = json.loads(lines[-1])
        rows = list(csv.reader(lines[1:-1]))
        slope = summary["slope"]
        exact = slope == "exact"
        return cls(tuple(float(r[0]) for r in rows), tuple(float(r[1]) for r in rows),
                   None if exact else slope, exact, summary["pass"], summary["label"])


Value = Union[BandVector, float]


def _norm(v: Value, nu: WeightSequence, m: float) -> float:
    if isinstance(v, BandVector):
        return level_norm(v, nu, m)
    return abs(float(v))


def fd_directional(f: Callable, x: BandVector, xi: BandVector, eps: float = DEFAULT_EPS) -> Value:
    """(f(x + eps xi) - f(x - eps xi)) / (2 eps)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    fp = f(x + eps * xi)
    fm = f(x - eps * xi)
    return (fp - fm) / (2 * eps)


def sc1_residual_table(f: Callable, Df: Callable, x: BandVector, xi: BandVector,
                       nu: WeightSequence, m: int, steps: Sequence[float] = DEFAULT_LADDER,
                       *, tol: float = 1e-6, min_slope: float = 0.9, label: str = "") -> ResidualTable:
    """Frechet remainder ladder at level m for x, xi regarded at level m+1.

    r(eps) = ||f(x + eps xi) - f(x) - eps Df(x, xi)||_m / (eps ||xi||_{m+1}).
    """
    fx = f(x)
    d = Df(x, xi)
    denom = level_norm(xi, nu, m + 1)
    res = []
    for e in steps:
        rem = f(x + e * xi) - fx - e * d
        res.append(_norm(rem, nu, m) / (e * denom))
    return ResidualTable.from_ladder(steps, res, tol=tol, min_slope=min_slope, label=label)


def strong_dual_norm(Dh: Callable[[BandVector], DualCovector], x: BandVector,
                     nu: WeightSequence, m: int) -> float:
    """Norm of Dh(x) on level -m, i.e. the level-m norm of its representative."""
    return level_norm(Dh(x).rep, nu, m)


def strong_continuity_ratio(Dh: Callable[[BandVector], DualCovector], x: BandVector,
                            nu: WeightSequence, m: int, rng: np.random.Generator,
                            n_pairs: int = 16, radius: float = 1e-3) -> float:
    """Largest ||rep Dh(x) - rep Dh(y)||_m / ||x - y||_{m+1} over random nearby y."""
    gx = Dh(x).rep
    worst = 0.0
    for _ in range(n_pairs):
        g = rng.standard_normal(x.coeffs.size) + 1j * rng.standard_normal(x.coeffs.size)
        d = BandVector(radius * g)
        y = x + d
        ratio = level_norm(Dh(y).rep - gx, nu, m) / level_norm(d, nu, m + 1)
        worst = max(worst, ratio)
    return worst


def real_jacobian(f: Callable[[BandVector], BandVector], x: BandVector, band: int,
                  eps: float = DEFAULT_EPS) -> np.ndarray:
    """Central-difference Jacobian of f at x in real coordinates on band ``band``."""
    x0 = x.padded(band).to_real()
    dim = x0.size
    J = np.empty((dim, dim))
    for j in range(dim):
        xp = x0.copy()
        xm = x0.copy()
        xp[j] += eps
        xm[j] -= eps
        fp = f(BandVector.from_real(xp)).padded(band).to_real()
        fm = f(BandVector.from_real(xm)).padded(band).to_real()
        J[:, j] = (fp - fm) / (2 * eps)
    return J


def real_gradient(h: Callable[[BandVector], float], x: BandVector, band: int,
                  eps: float = DEFAULT_EPS) -> np.ndarray:
    """Central-difference gradient of a real functional in real coordinates."""
    x0 = x.padded(band).to_real()
    g = np.empty(x0.size)
    for j in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[j] += eps
        xm[j] -= eps
        g[j] = (h(BandVector.from_real(xp)) - h(BandVector.from_real(xm))) / (2 * eps)
    return g


def symplecticity_check(f: Callable[[BandVector], BandVector], x: BandVector, band: int,
                        eps: float = DEFAULT_EPS) -> float:
    """max |J^T W J - W| for the finite-difference Jacobian J of f at x."""
    J = real_jacobian(f, x, band, eps)
    W = omega_matrix(band)
    return float(np.max(np.abs(J.T @ W @ J - W)))


@dataclass(frozen=True)
class ChainRuleResult:
    defect: float
    condition: float
    lhs: np.ndarray
    rhs: np.ndarray


def strong_chain_rule_check(h: Callable[[BandVector], float], dh: Callable[[BandVector], DualCovector],
                            f: Callable[[BandVector], BandVector], x: BandVector, band: int,
                            eps: float = DEFAULT_EPS) -> ChainRuleResult:
    """Compare D_x(h o f) with D_{f(x)}h composed with the symplectic adjoint of (D_x f)^{-1}.

    Left side: finite-difference gradient of h o f. Right side:
    g^T W^{-1} J^{-T} W with J the finite-difference Jacobian of f and g the
    real-coordinate representative of dh(f(x)).
    """
    J = real_jacobian(f, x, band, eps)
    cond = float(np.linalg.cond(J))
    if not cond <= MAX_CONDITION:
        raise SingularJacobianError(f"Jacobian condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    W = omega_matrix(band)
    g = dh(f(x).padded(band)).rep.padded(band).to_real()
    # adjoint of T = J^{-1}:  T^omega = W^{-1} T^T W
    adj = np.linalg.solve(W, np.linalg.solve(J.T, W))
    rhs = g @ adj
    lhs = real_gradient(lambda y: h(f(y)), x, band, eps)
    return ChainRuleResult(float(np.max(np.abs(lhs - rhs))), cond, lhs, rhs)
