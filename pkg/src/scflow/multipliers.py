"""Fourier multipliers: diagonal operators (Mx)_n = m_n x_n.

Real coordinates are fixed once for the whole package: index n runs from -N
to N and each coefficient contributes the pair (Re x_n, Im x_n), so a band-N
vector becomes a real vector of length 2(2N+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .scales import BandVector, WeightSequence


@dataclass(frozen=True)
class MultiplierOperator:
    """A diagonal operator given by its symbol n -> m_n.

    Built-in operators carry a closed-form ``symbol`` defined on all of Z.
    Custom operators carry a ``table`` on |n| <= table_band. ``growth`` is
    the pair (c, q) when |m_n| = c |n|^q exactly; it drives
    :func:`sup_operator_norm`.
    """

    label: str
    symbol: Optional[Callable[[np.ndarray], np.ndarray]] = None
    table: Optional[np.ndarray] = None
    growth: Optional[tuple] = None

    def __post_init__(self):
        if (self.symbol is None) == (self.table is None):
            raise ValueError("give exactly one of symbol or table")
        if self.table is not None:
            t = np.array(self.table, dtype=np.complex128)
            if t.ndim != 1 or t.size % 2 == 0:
                raise ValueError("table must cover n = -T..T")
            t.setflags(write=False)
            object.__setattr__(self, "table", t)

    @property
    def table_band(self) -> Optional[int]:
        return None if self.table is None else (self.table.size - 1) // 2

    def coeffs(self, band: int) -> np.ndarray:
        if self.table is not None:
            tb = self.table_band
            if band > tb:
                raise ValueError(f"multiplier {self.label!r} is tabulated up to |n| <= {tb}, got band {band}")
            return self.table[tb - band: tb + band + 1]
        n = np.arange(-band, band + 1)
        return np.broadcast_to(np.asarray(self.symbol(n), dtype=np.complex128), n.shape)

    def __call__(self, x: BandVector) -> BandVector:
        return apply(self, x)

    def __matmul__(self, other: "MultiplierOperator") -> "MultiplierOperator":
        return compose(self, other)

    def to_json(self, band: int) -> dict:
        m = self.coeffs(band)
        return {
            "label": self.label,
            "n": list(range(-band, band + 1)),
            "re": m.real.tolist(),
            "im": m.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MultiplierOperator":
        n = [int(v) for v in obj["n"]]
        band = (len(n) - 1) // 2
        if n != list(range(-band, band + 1)):
            raise ValueError("'n' must list the contiguous window -T..T")
        table = np.asarray(obj["re"], dtype=np.float64) + 1j * np.asarray(obj["im"], dtype=np.float64)
        return cls(label=str(obj["label"]), table=table)


def apply(M: MultiplierOperator, x: BandVector) -> BandVector:
    return BandVector(M.coeffs(x.band) * x.coeffs)


def compose(M: MultiplierOperator, N: MultiplierOperator) -> MultiplierOperator:
    """M after N."""
    label = f"{M.label}*{N.label}"
    growth = None
    if M.growth is not None and N.growth is not None:
        growth = (M.growth[0] * N.growth[0], M.growth[1] + N.growth[1])
    if M.table is None and N.table is None:
        return MultiplierOperator(label, symbol=lambda n: M.symbol(n) * N.symbol(n), growth=growth)
    tb = min(b for b in (M.table_band, N.table_band) if b is not None)
    return MultiplierOperator(label, table=M.coeffs(tb) * N.coeffs(tb), growth=growth)


def identity() -> MultiplierOperator:
    return MultiplierOperator("id", symbol=lambda n: np.ones(n.shape, dtype=np.complex128), growth=(1.0, 0))


def constant(c: complex, label: Optional[str] = None) -> MultiplierOperator:
    c = complex(c)
    return MultiplierOperator(label or f"const({c})", symbol=lambda n: np.full(n.shape, c), growth=(abs(c), 0))


def derivative() -> MultiplierOperator:
    """Weak d/dx: n -> i n."""
    return MultiplierOperator("d/dx", symbol=lambda n: 1j * n, growth=(1.0, 1))


def laplacian() -> MultiplierOperator:
    """n -> (i n)^2 = -n^2."""
    return MultiplierOperator("laplacian", symbol=lambda n: -(n.astype(np.float64) ** 2) + 0j, growth=(1.0, 2))


def schrodinger_field() -> MultiplierOperator:
    """i times the Laplacian: n -> -i n^2."""
    return MultiplierOperator("i*laplacian", symbol=lambda n: -1j * n.astype(np.float64) ** 2, growth=(1.0, 2))


def propagator(t: float) -> MultiplierOperator:
    """exp(i t Laplacian): n -> exp(-i t n^2)."""
    t = float(t)

    def symbol(n):
        return np.exp(-1j * t * n.astype(np.float64) ** 2)

    return MultiplierOperator(f"exp(i*{t!r}*laplacian)", symbol=symbol, growth=(1.0, 0))


def make_sigma(a: int) -> MultiplierOperator:
    """Reduced-dynamics multiplier: a^2 - n^2 for n < a, a^2 - (n+1)^2 for n >= a."""
    a = int(a)

    def symbol(n):
        m = np.where(n < a, n, n + 1).astype(np.float64)
        return (a * a - m * m) + 0j

    return MultiplierOperator(f"sigma_{a}", symbol=symbol)


def symplectic_adjoint(M: MultiplierOperator) -> MultiplierOperator:
    """Adjoint for the standard form: omega(M v, w) = omega(v, M^w w).

    For a complex-linear diagonal M this is the conjugate multiplier.
    """
    label = f"{M.label}^omega"
    if M.table is not None:
        return MultiplierOperator(label, table=np.conj(M.table), growth=M.growth)
    return MultiplierOperator(label, symbol=lambda n: np.conj(M.symbol(n)), growth=M.growth)


def operator_norm(M: MultiplierOperator, nu: WeightSequence, s: float, r: float, band: int) -> float:
    """sup_{|n| <= band} |m_n| nu_n^{r-s}: band-limited norm from level s to level r."""
    return float(np.max(np.abs(M.coeffs(band)) * nu.power(band, r - s)))


def sup_operator_norm(M: MultiplierOperator, nu: WeightSequence, s: float, r: float) -> Optional[float]:
    """Norm over all of Z, level s -> level r, when it has a closed form.

    Available for multipliers with |m_n| = c |n|^q and the built-in weight
    families nu_n = (1+n^2)^e. Returns ``math.inf`` for unbounded operators
    and ``None`` when no closed form is known.
    """
    if M.growth is None or not nu.monotone:
        return None
    c, q = M.growth
    beta = nu.exponent * (r - s)  # |m_n| nu_n^{r-s} = c |n|^q (1+n^2)^beta
    tail = q + 2 * beta
    if tail > 0:
        return math.inf
    if q == 0:
        # (1+n^2)^beta with beta <= 0 peaks at n = 0
        return float(c)
    if tail == 0:
        # increasing in |n|, supremum is the limit c
        return float(c)
    # x^q (1+x^2)^beta is maximised at x^2 = q / (-2 beta - q)
    x_star = math.sqrt(q / (-2 * beta - q))
    cands = {max(0, math.floor(x_star)), math.ceil(x_star)}
    return max(float(c) * n ** q * (1.0 + n * n) ** beta for n in cands)


def real_matrix(M, band: int) -> np.ndarray:
    """Real-coordinate matrix of an R-linear map on band-``band`` vectors.

    For a multiplier the result is block diagonal with blocks
    [[Re m, -Im m], [Im m, Re m]]; any other callable is sampled on the
    real basis.
    """
    dim = 2 * (2 * band + 1)
    if isinstance(M, MultiplierOperator):
        m = M.coeffs(band)
        out = np.zeros((dim, dim))
        i = np.arange(0, dim, 2)
        out[i, i] = m.real
        out[i, i + 1] = -m.imag
        out[i + 1, i] = m.imag
        out[i + 1, i + 1] = m.real
        return out
    out = np.empty((dim, dim))
    e = np.zeros(dim)
    for j in range(dim):
        e[j] = 1.0
        out[:, j] = M(BandVector.from_real(e)).padded(band).to_real()
        e[j] = 0.0
    return out


def omega_matrix(band: int) -> np.ndarray:
    """Matrix W with omega(v, w) = v_real . W w_real.

    Since omega(v, w) = Re<i v, w>_0, W is the transpose of the matrix of
    multiplication by i; blocks are [[0, 1], [-1, 0]].
    """
    return real_matrix(constant(1j, "i"), band).T.copy()
