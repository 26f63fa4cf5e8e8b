"""Weighted sequence scales l^2_nu on the integers.

Elements are finitely supported coefficient sequences (``BandVector``), which
belong to every level of the scale. Level norms, the complex and real
pairings, the standard symplectic form and the truncation projections used in
the compactness estimate all live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class BandVector:
    """Complex coefficients x_n for n = -N..N (Fourier basis e^{inx}/sqrt(2pi)).

    Instances are immutable; the coefficient array is read-only.
    """

    __slots__ = ("_c",)
    # keep numpy scalars from treating a BandVector as an (unbounded) sequence
    __array_ufunc__ = None

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError(f"expected an odd number of coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def zeros(cls, band: int) -> "BandVector":
        return cls(np.zeros(2 * band + 1, dtype=np.complex128))

    @classmethod
    def delta(cls, k: int, band: Optional[int] = None, value: complex = 1.0) -> "BandVector":
        """The standard basis vector delta_k (times ``value``)."""
        band = abs(k) if band is None else band
        if abs(k) > band:
            raise ValueError(f"index {k} outside band {band}")
        c = np.zeros(2 * band + 1, dtype=np.complex128)
        c[k + band] = value
        return cls(c)

    @classmethod
    def from_real(cls, arr) -> "BandVector":
        """Inverse of :meth:`to_real` (n-major, Re/Im interleaved)."""
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr[0::2] + 1j * arr[1::2])

    @classmethod
    def from_json(cls, obj: dict) -> "BandVector":
        band = int(obj["band"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
        if re.shape != (2 * band + 1,) or im.shape != (2 * band + 1,):
            raise ValueError(f"'re' and 'im' must have length {2 * band + 1}")
        return cls(re + 1j * im)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def band(self) -> int:
        return (self._c.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.band, self.band + 1)

    def __len__(self) -> int:
        return self._c.size

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.band:
            return 0j
        return complex(self._c[n + self.band])

    def padded(self, band: int) -> "BandVector":
        """Same sequence stored on a wider window. Never drops coefficients."""
        if band < self.band:
            if np.any(self._c[: self.band - band]) or np.any(self._c[self.band + band + 1:]):
                raise ValueError(f"cannot shrink to band {band}: nonzero coefficients outside")
            return BandVector(self._c[self.band - band: self.band + band + 1])
        if band == self.band:
            return self
        pad = band - self.band
        return BandVector(np.pad(self._c, pad))

    def to_real(self) -> np.ndarray:
        out = np.empty(2 * self._c.size)
        out[0::2] = self._c.real
        out[1::2] = self._c.imag
        return out

    def to_json(self) -> dict:
        return {"band": self.band, "re": self._c.real.tolist(), "im": self._c.imag.tolist()}

    def __iter__(self):
        return iter(self._c)

    def _aligned(self, other: "BandVector"):
        b = max(self.band, other.band)
        return self.padded(b)._c, other.padded(b)._c

    def __add__(self, other):
        if not isinstance(other, BandVector):
            return NotImplemented
        a, b = self._aligned(other)
        return BandVector(a + b)

    def __sub__(self, other):
        if not isinstance(other, BandVector):
            return NotImplemented
        a, b = self._aligned(other)
        return BandVector(a - b)

    def __neg__(self):
        return BandVector(-self._c)

    def __mul__(self, c):
        if isinstance(c, BandVector):
            return NotImplemented
        return BandVector(self._c * complex(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return BandVector(self._c / complex(c))

    def __repr__(self) -> str:
        return f"BandVector(band={self.band}, coeffs={self._c!r})"


def fmt(v: float) -> str:
    """17 significant digits, negative zero printed as 0."""
    return f"{float(v) + 0.0:.17g}"


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights nu_n with nu_n -> infinity.

    The built-in families are nu_n = (1+n^2)^exponent with exponent 1/2
    (``sobolev_half``, the Levi-Sobolev scale) or 1 (``sobolev_double``, level
    s is W^{2s,2}). ``custom`` weights carry an explicit table on |n| <= n_max
    and a declared tail exponent.
    """

    kind: str
    exponent: float
    table: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("sobolev_half", "sobolev_double", "custom"):
            raise ValueError(f"unknown weight family {self.kind!r}")
        if not self.exponent > 0:
            raise ValueError("weights must grow: exponent must be positive")
        if self.kind == "custom":
            t = np.array(self.table, dtype=np.float64)
            if t.ndim != 1 or t.size % 2 == 0:
                raise ValueError("custom table must cover n = -n_max..n_max")
            if np.any(t <= 0):
                raise ValueError("weights must be positive")
            n_max = (t.size - 1) // 2
            # tail monotone in |n| over the outer half of the table
            start = n_max // 2
            right = t[n_max + start:]
            left = t[: n_max - start + 1][::-1]
            if np.any(np.diff(right) < 0) or np.any(np.diff(left) < 0):
                raise ValueError("custom weights must grow monotonically in the tail")
            t.setflags(write=False)
            object.__setattr__(self, "table", t)

    @classmethod
    def sobolev_half(cls) -> "WeightSequence":
        return cls("sobolev_half", 0.5)

    @classmethod
    def sobolev_double(cls) -> "WeightSequence":
        return cls("sobolev_double", 1.0)

    @classmethod
    def custom(cls, table, exponent: float) -> "WeightSequence":
        return cls("custom", float(exponent), np.asarray(table, dtype=np.float64))

    @property
    def monotone(self) -> bool:
        return self.kind != "custom"

    @property
    def n_max(self) -> Optional[int]:
        return None if self.table is None else (self.table.size - 1) // 2

    def power(self, band: int, p: float) -> np.ndarray:
        """nu_n**p for n = -band..band."""
        n = np.arange(-band, band + 1, dtype=np.float64)
        if self.kind == "custom":
            if band > self.n_max:
                raise ValueError(f"band {band} exceeds custom weight table (n_max={self.n_max})")
            t = self.table[self.n_max - band: self.n_max + band + 1]
            return t ** p
        # (1+n^2)**(e*p) avoids squaring a rounded square root
        return (1.0 + n * n) ** (self.exponent * p)

    def values(self, band: int) -> np.ndarray:
        return self.power(band, 1.0)

    def at(self, n: int, p: float = 1.0) -> float:
        """nu_n**p for a single index."""
        return float(self.power(abs(n), p)[n + abs(n)])


def level_norm(x: BandVector, nu: WeightSequence, s: float) -> float:
    w = nu.power(x.band, 2.0 * s)
    c = x.coeffs
    return float(np.sqrt(np.sum((c.real ** 2 + c.imag ** 2) * w)))


def level_inner(x: BandVector, y: BandVector, nu: WeightSequence, s: float) -> complex:
    """The hermitian inner product <x, y>_s = sum x_n conj(y_n) nu_n^{2s}."""
    a, b = x._aligned(y)
    band = (a.size - 1) // 2
    return complex(np.sum(a * np.conj(b) * nu.power(band, 2.0 * s)))


def complex_pairing(x: BandVector, y: BandVector) -> complex:
    """Bilinear pairing (x, y) -> sum x_n y_n of level s with level -s."""
    a, b = x._aligned(y)
    return complex(np.sum(a * b))


def real_pairing(x: BandVector, y: BandVector) -> float:
    """Re sum x_n conj(y_n)."""
    a, b = x._aligned(y)
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def omega(x: BandVector, y: BandVector) -> float:
    """Standard symplectic form -Im sum x_n conj(y_n) = real_pairing(i x, y)."""
    a, b = x._aligned(y)
    # Re((i a) conj b) = -a.imag*b.real + a.real*b.imag
    return float(np.sum(a.real * b.imag - a.imag * b.real))


def truncate(x: BandVector, k: int) -> BandVector:
    """Zero every coefficient with |n| >= k (keep the window -k+1..k-1)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    c = np.array(x.coeffs)
    c[np.abs(x.indices) >= k] = 0
    return BandVector(c)


def tail_operator_norm(nu: WeightSequence, s: int, r: int, k: int, n_max: int) -> float:
    """Operator norm of (inclusion - truncation) from level s to level r.

    Equals sup_{|n| >= k} nu_n^{r-s}. For the monotone built-in families
    that is nu_k^{r-s} over all of Z (``n_max`` is then ignored); for custom
    weights the supremum is taken over k <= |n| <= n_max only.
    """
    if s <= r:
        raise ValueError(f"need s > r for the compactness estimate, got s={s}, r={r}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if nu.monotone:
        return nu.at(k, r - s)
    if k > n_max:
        return 0.0
    w = nu.power(n_max, r - s)
    n = np.arange(-n_max, n_max + 1)
    return float(np.max(w[np.abs(n) >= k]))


def tail_norm_bruteforce(nu: WeightSequence, s: int, r: int, k: int, n_max: int) -> float:
    """Maximise ||(1 - p^k) x||_r / ||x||_s over the basis vectors of band ``n_max``.

    Diagonal maps attain their norm on a basis vector, so this is the
    band-limited operator norm computed without the closed form.
    """
    best = 0.0
    for n in range(-n_max, n_max + 1):
        d = BandVector.delta(n, n_max)
        tail = d - truncate(d, k)
        best = max(best, level_norm(tail, nu, r) / level_norm(d, nu, s))
    return best
