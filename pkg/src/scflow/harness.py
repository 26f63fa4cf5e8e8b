"""Experiment runner: invariant suites, convergence ladders and trajectory dumps.

Randomness: every check draws from its own Philox4x64-10 counter-based
generator, keyed by ``numpy.random.SeedSequence(seed, spawn_key=(crc32(check_id),))``.
Probe vectors have independent standard-normal real and imaginary parts on
the band. Results therefore depend only on (seed, band, check id), not on
the order or concurrency in which checks run.
"""

from __future__ import annotations

import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import multipliers as mult
from . import projective as proj
from . import schrodinger as sch
from .sc_check import (
    ResidualTable,
    real_gradient,
    sc1_residual_table,
    strong_chain_rule_check,
    strong_continuity_ratio,
    strong_dual_norm,
    symplecticity_check,
)
from .scales import (
    BandVector,
    WeightSequence,
    complex_pairing,
    level_norm,
    omega,
    real_pairing,
    tail_norm_bruteforce,
    tail_operator_norm,
)

SUITES = ("verify", "converge", "flow", "charts")
FAMILIES = (WeightSequence.sobolev_half(), WeightSequence.sobolev_double())
NU = sch.NU


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    suite: str = "verify"
    band: int = 16
    seed: int = 42
    eps_ladder: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
    t_values: list = field(default_factory=lambda: [0.1, 1.0, 10.0, 100.0])
    chart_ids: list = field(default_factory=lambda: [-2, -1, 0, 1, 2])
    output_path: str = "out"
    initial: object = "delta_1"
    projective: bool = False
    chart_threshold: float = 0.1
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, msg):
            raise ConfigError(f"field '{name}': {msg}")

        if self.suite not in SUITES:
            bad("suite", f"must be one of {', '.join(SUITES)}, got {self.suite!r}")
        if not isinstance(self.band, int) or isinstance(self.band, bool) or self.band < 1:
            bad("band", "must be an integer >= 1")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            bad("seed", "must be an unsigned integer")
        lad = self.eps_ladder
        if (not isinstance(lad, (list, tuple)) or len(lad) < 4
                or not all(isinstance(e, (int, float)) and e > 0 for e in lad)
                or any(b >= a for a, b in zip(lad, lad[1:]))):
            bad("eps_ladder", "must be a strictly decreasing list of at least 4 positive numbers")
        if not isinstance(self.t_values, (list, tuple)) or not all(isinstance(t, (int, float)) for t in self.t_values):
            bad("t_values", "must be a list of numbers")
        if not isinstance(self.chart_ids, (list, tuple)) or not all(
                isinstance(a, int) and not isinstance(a, bool) for a in self.chart_ids):
            bad("chart_ids", "must be a list of integers")
        if not isinstance(self.output_path, str):
            bad("output_path", "must be a string")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            bad("jobs", "must be a positive integer")
        if not isinstance(self.chart_threshold, (int, float)) or not 0 < self.chart_threshold < 1:
            bad("chart_threshold", "must lie in (0, 1)")
        self.eps_ladder = [float(e) for e in lad]
        self.t_values = [float(t) for t in self.t_values]


def load_config(path: Optional[str] = None, **overrides) -> ExperimentConfig:
    data = {}
    if path is not None:
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for k in data:
        if k not in known:
            raise ConfigError(f"field '{k}': unknown field")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**data)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str
    value: float
    threshold: float
    runtime: float = 0.0

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status,
                "value": _json_float(self.value), "threshold": _json_float(self.threshold)}


def _json_float(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class Report:
    suite: str
    band: int
    seed: int
    records: list = field(default_factory=list)

    @property
    def failed(self) -> list:
        return [r for r in self.records if r.status != "PASS"]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_json(self) -> str:
        """Deterministic report. Runtimes are kept out so identical runs give identical bytes."""
        obj = {
            "suite": self.suite,
            "band": self.band,
            "seed": self.seed,
            "checks": [r.to_json() for r in self.records],
            "summary": {"passed": len(self.records) - len(self.failed), "failed": len(self.failed)},
        }
        return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def timings_json(self) -> str:
        return json.dumps({r.name: r.runtime for r in self.records}, indent=2) + "\n"


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(check_id.encode()),))
    return np.random.Generator(np.random.Philox(ss))


def random_band(rng: np.random.Generator, band: int, scale: float = 1.0) -> BandVector:
    n = 2 * band + 1
    return BandVector(scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))


def gaussian_band(band: int) -> BandVector:
    n = np.arange(-band, band + 1, dtype=np.float64)
    return BandVector(np.exp(-n * n / 2.0))


def initial_vector(source, band: int) -> BandVector:
    """Preset name ('delta_k', 'gaussian_band') or an inline BandVector JSON object."""
    if isinstance(source, dict):
        try:
            return BandVector.from_json(source)
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"field 'initial': bad BandVector ({e})") from None
    if source == "gaussian_band":
        return gaussian_band(band)
    if isinstance(source, str) and source.startswith("delta_"):
        try:
            k = int(source[len("delta_"):])
        except ValueError:
            raise ConfigError(f"field 'initial': bad preset {source!r}") from None
        return BandVector.delta(k, max(band, abs(k)))
    raise ConfigError(f"field 'initial': unknown preset {source!r}")


def chart_point(rng: np.random.Generator, band: int, *slots: int) -> proj.RayPoint:
    """Random ray with comfortable mass (|x_a| >= 0.1) on each of ``slots``."""
    g = random_band(rng, band)
    x = g * (0.5 / level_norm(g, NU, 0))
    for a in slots:
        x = x + BandVector.delta(a, band)
    p = proj.ray_of(x)
    for a in slots:
        if abs(p.rep[a]) < 0.1:
            raise AssertionError("probe construction failed to keep mass on the chart slot")
    return p


def _in_window(a: int, band: int) -> bool:
    return -band <= a <= band


def _test_multipliers():
    return [mult.identity(), mult.derivative(), mult.laplacian(), mult.schrodinger_field(),
            mult.propagator(0.7), mult.make_sigma(0), mult.make_sigma(2)]


# --- checks -----------------------------------------------------------------
# Each check returns (value, threshold); it passes iff value <= threshold.

CHECKS: dict = {}


def check(name: str):
    def deco(fn):
        CHECKS[name] = fn
        return fn
    return deco


@check("scales.holder_bound")
def _holder(cfg, rng):
    worst = -math.inf
    for _ in range(20):
        x, y = random_band(rng, cfg.band), random_band(rng, cfg.band)
        for nu in FAMILIES:
            for s in range(-8, 9):
                excess = abs(complex_pairing(x, y)) - level_norm(x, nu, s) * level_norm(y, nu, -s)
                worst = max(worst, excess)
    return worst, 1e-12


@check("scales.dual_isometry")
def _dual_isometry(cfg, rng):
    worst = 0.0
    for _ in range(20):
        y = random_band(rng, cfg.band)
        for nu in FAMILIES:
            for s in range(-4, 5):
                x = BandVector(np.conj(y.coeffs) * nu.power(cfg.band, -2 * s))
                x = x / level_norm(x, nu, s)
                target = level_norm(y, nu, -s)
                worst = max(worst, abs(abs(complex_pairing(x, y)) - target) / target)
    return worst, 1e-12


@check("scales.omega_compatibility")
def _omega_compat(cfg, rng):
    worst = 0.0
    for _ in range(50):
        x, y = random_band(rng, cfg.band), random_band(rng, cfg.band)
        scale = 1.0 + level_norm(x, NU, 0) * level_norm(y, NU, 0)
        worst = max(worst, abs(omega(x, y) - real_pairing(1j * x, y)) / scale)
    return worst, 1e-15


@check("scales.tail_norm_exactness")
def _tail_norm(cfg, rng):
    worst = 0.0
    n_max = max(cfg.band, 32)
    for nu in FAMILIES:
        for gap in (1, 2):
            for r in (-1, 0, 1):
                for k in range(1, 17):
                    a = tail_operator_norm(nu, r + gap, r, k, n_max)
                    b = tail_norm_bruteforce(nu, r + gap, r, k, n_max)
                    worst = max(worst, abs(a - b))
    return worst, 1e-12


@check("scales.norm_monotonicity")
def _norm_mono(cfg, rng):
    worst = 0.0
    for _ in range(20):
        x = random_band(rng, cfg.band)
        for nu in FAMILIES:
            for r in range(-3, 4):
                for s in range(r, 4):
                    worst = max(worst, level_norm(x, nu, r) / level_norm(x, nu, s) - 1.0)
    return worst, 1e-15


@check("multipliers.adjoint_relation")
def _adjoint(cfg, rng):
    band = min(cfg.band, 8)
    worst = 0.0
    for M in _test_multipliers():
        Mw = mult.symplectic_adjoint(M)
        for j in range(-band, band + 1):
            v = BandVector.delta(j, band)
            for k in range(-band, band + 1):
                for c in (1.0, 1j):
                    w = BandVector.delta(k, band, c)
                    worst = max(worst, abs(omega(mult.apply(M, v), w) - omega(v, mult.apply(Mw, w))))
    return worst, 1e-13


@check("multipliers.boundedness")
def _boundedness(cfg, rng):
    worst = -math.inf
    for _ in range(10):
        x = random_band(rng, cfg.band)
        for M in _test_multipliers():
            for nu in FAMILIES:
                for s, r in ((0, 0), (1, 0), (2, 0), (2, 1), (1, -1)):
                    bound = mult.operator_norm(M, nu, s, r, cfg.band) * level_norm(x, nu, s)
                    lhs = level_norm(mult.apply(M, x), nu, r)
                    worst = max(worst, (lhs - bound) / (1.0 + bound))
    return worst, 1e-12


@check("multipliers.propagator_group_law")
def _group_law(cfg, rng):
    worst = 0.0
    for _ in range(20):
        x = random_band(rng, cfg.band)
        t, s = rng.uniform(-5, 5, size=2)
        lhs = mult.apply(mult.propagator(t), mult.apply(mult.propagator(s), x))
        rhs = mult.apply(mult.propagator(t + s), x)
        worst = max(worst, level_norm(lhs - rhs, NU, 0) / level_norm(x, NU, 0))
    return worst, 1e-12


@check("multipliers.real_matrix_homomorphism")
def _homomorphism(cfg, rng):
    band = min(cfg.band, 8)
    ms = _test_multipliers()
    worst = 0.0
    for M in ms:
        for N in ms:
            A = mult.real_matrix(mult.compose(M, N), band)
            B = mult.real_matrix(M, band) @ mult.real_matrix(N, band)
            worst = max(worst, float(np.max(np.abs(A - B))) / (1.0 + float(np.max(np.abs(A)))))
    return worst, 1e-12


@check("sc_check.linearity_detector")
def _linearity(cfg, rng):
    # linear maps: the remainder does not depend on the base point, probe at the origin
    x = BandVector.zeros(cfg.band)
    worst = 0.0
    for M in _test_multipliers():
        for m in range(5):
            xi = random_band(rng, cfg.band)
            tab = sc1_residual_table(M, lambda _x, v, M=M: mult.apply(M, v), x, xi, NU, m, cfg.eps_ladder)
            worst = max(worst, max(tab.residuals))
    return worst, 1e-12


def dyadic_probe(rng: np.random.Generator, band: int):
    """Small-integer coefficients: with dyadic steps the quadratic remainder is computed exactly."""
    n = 2 * band + 1
    u = BandVector(rng.integers(-3, 4, n) + 1j * rng.integers(-3, 4, n))
    xi = BandVector(rng.integers(-3, 4, n) + 1j * rng.integers(-3, 4, n))
    return u, xi


DYADIC_LADDER = tuple(2.0 ** -k for k in range(1, 13))


def quadratic_exactness(u: BandVector, xi: BandVector, steps=DYADIC_LADDER):
    """(max relative deviation from eps ||xi_x||^2 / (2 ||xi||_1), fitted slope)."""
    tab = sc1_residual_table(sch.hamiltonian, lambda x, v: sch.dh(x).action(v), u, xi, NU, 0, steps)
    xx = mult.apply(mult.derivative(), xi)
    coef = level_norm(xx, NU, 0) ** 2 / (2 * level_norm(xi, NU, 1))
    dev = max(abs(r - e * coef) / (e * coef) for e, r in zip(tab.steps, tab.residuals))
    return dev, tab.slope, tab


@check("sc_check.quadratic_exactness")
def _quad_exact(cfg, rng):
    worst = 0.0
    for _ in range(5):
        u, xi = dyadic_probe(rng, cfg.band)
        dev, slope, _ = quadratic_exactness(u, xi)
        # slope error scaled so that 0.01 maps onto the 1e-13 threshold
        worst = max(worst, dev, abs(slope - 1.0) * 1e-11)
    return worst, 1e-13


@check("sc_check.unitary_symplecticity")
def _unitary_symp(cfg, rng):
    band = min(cfg.band, 8)
    x = BandVector.zeros(band)
    worst = 0.0
    for t in cfg.t_values:
        P = mult.propagator(t)
        for eps in cfg.eps_ladder:
            worst = max(worst, symplecticity_check(P, x, band, eps))
    return worst, 1e-12


@check("sc_check.chain_rule_linear")
def _chain_linear(cfg, rng):
    band = min(cfg.band, 6)
    worst = 0.0
    for t in [0.0] + list(cfg.t_values):
        x = random_band(rng, band)
        res = strong_chain_rule_check(sch.hamiltonian, sch.dh, lambda v, t=t: sch.flow(t, v), x, band)
        worst = max(worst, res.defect)
    return worst, 1e-6


def _overlapping_pairs(ids, band):
    ids = [a for a in ids if _in_window(a, band)]
    return [(a, b) for a in ids for b in ids]


@check("sc_check.chain_rule_darboux")
def _chain_darboux(cfg, rng):
    band = min(cfg.band, 6)
    worst = 0.0
    for a, b in _overlapping_pairs(cfg.chart_ids, band):
        p = chart_point(rng, band, a, b)
        u = proj.darboux_chart(a, p, band=band)
        res = strong_chain_rule_check(
            lambda v, b=b: proj.reduced_hamiltonian_chart(b, v),
            lambda v, b=b: proj.reduced_dh_chart(b, v),
            lambda v, a=a, b=b: proj.transition(a, b, v), u, band)
        analytic = proj.reduced_dh_chart(a, u).rep.to_real()
        worst = max(worst, res.defect, float(np.max(np.abs(res.lhs - analytic))))
    return worst, 1e-5


@check("sc_check.hierarchy_witness")
def _hierarchy(cfg, rng):
    worst = 0.0
    prev = -math.inf
    for k in range(1, 65):
        u = sch.hierarchy_family(k)
        h = sch.hamiltonian(u)
        if not h > prev or h < k / 2 - 1e-9:
            return math.inf, 1e-12
        prev = h
        worst = max(worst, abs(h - k / 2) / (k / 2), abs(level_norm(u, NU, 0) - k ** -0.5) / k ** -0.5)
    return worst, 1e-12


@check("sc_check.strong_continuity")
def _strong_cont(cfg, rng):
    worst = 0.0
    for m in (0, 1, 2):
        x = random_band(rng, cfg.band)
        worst = max(worst, strong_continuity_ratio(sch.dh, x, NU, m, rng))
    return worst, 1.0 + 1e-12


@check("schrodinger.energy_conservation")
def _energy(cfg, rng):
    worst = 0.0
    for t in cfg.t_values:
        u = random_band(rng, cfg.band)
        h0 = sch.hamiltonian(u)
        worst = max(worst, abs(sch.hamiltonian(sch.flow(t, u)) - h0) / (1 + h0))
    return worst, 1e-10


@check("schrodinger.norm_conservation")
def _norms(cfg, rng):
    worst = 0.0
    for t in cfg.t_values:
        u = random_band(rng, cfg.band)
        v = sch.flow(t, u)
        for s in range(-2, 4):
            a, b = level_norm(v, NU, s), level_norm(u, NU, s)
            worst = max(worst, abs(a - b) / b)
    return worst, 1e-12


@check("schrodinger.omega_gradient")
def _omega_grad(cfg, rng):
    worst = 0.0
    for _ in range(100):
        u, xi = random_band(rng, cfg.band), random_band(rng, cfg.band)
        d = abs(-sch.dh(u).action(xi) - omega(xi, sch.vector_field(u)))
        worst = max(worst, d / (1 + level_norm(u, NU, 2) * level_norm(xi, NU, 0)))
    return worst, 1e-12


FLOW_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4)


@check("schrodinger.flow_residual_slope")
def _flow_slope(cfg, rng):
    tab = sch.flow_residual_table(0.3, gaussian_band(cfg.band), FLOW_DELTAS)
    return abs(tab.slope - 2.0), 0.1


@check("schrodinger.flow_sc1_certificate")
def _flow_sc1(cfg, rng):
    x = BandVector.zeros(cfg.band)
    worst = 0.0
    for t in cfg.t_values:
        xi = random_band(rng, cfg.band)
        tab = sc1_residual_table(lambda v, t=t: sch.flow(t, v), lambda _x, v, t=t: sch.flow(t, v),
                                 x, xi, NU, 0, cfg.eps_ladder)
        worst = max(worst, max(tab.residuals))
    return worst, 1e-12


@check("schrodinger.flow_symplecticity")
def _flow_symp(cfg, rng):
    band = min(cfg.band, 8)
    x = BandVector.zeros(band)
    return max(symplecticity_check(lambda v, t=t: sch.flow(t, v), x, band) for t in (0.1, 1.0, 10.0)), 1e-12


@check("schrodinger.strong_derivative_bound")
def _dual_bound(cfg, rng):
    worst = -math.inf
    for m in (0, 1, 2):
        u = random_band(rng, cfg.band)
        worst = max(worst, strong_dual_norm(sch.dh, u, NU, m) / level_norm(u, NU, m + 1) - 1.0)
    return worst, 1e-15


@check("schrodinger.flow_tangent")
def _flow_tangent(cfg, rng):
    worst = 0.0
    u, xi = gaussian_band(cfg.band), gaussian_band(cfg.band) * (0.5 - 0.25j)
    for t in cfg.t_values:
        h = float(rng.uniform(-1, 1))
        eps = 1e-5
        fd = (sch.flow(t + eps * h, u + eps * xi) - sch.flow(t - eps * h, u - eps * xi)) / (2 * eps)
        exact = sch.flow_tangent(t, u, h, xi)
        worst = max(worst, level_norm(fd - exact, NU, 0) / level_norm(exact, NU, 0))
    return worst, 1e-6


@check("projective.chart_roundtrips")
def _roundtrips(cfg, rng):
    worst = 0.0
    for a in cfg.chart_ids:
        if not _in_window(a, cfg.band):
            continue
        for flavor in ("affine", "darboux"):
            cid = proj.ChartId(a, flavor)
            for _ in range(10):
                p = chart_point(rng, cfg.band, a)
                u = proj.chart(cid, p, band=cfg.band)
                q = proj.chart_inverse(cid, u)
                worst = max(worst, proj.ray_distance(p, q))
                worst = max(worst, level_norm(proj.chart(cid, q, band=cfg.band) - u, NU, 0))
    return worst, 1e-12


@check("projective.darboux_containment")
def _containment(cfg, rng):
    worst = 0.0
    for a in cfg.chart_ids:
        if not _in_window(a, cfg.band):
            continue
        for _ in range(10):
            p = chart_point(rng, cfg.band, a)
            u = proj.darboux_chart(a, p, band=cfg.band)
            r = level_norm(u, NU, 0)
            if not r < 1:
                return math.inf, 1e-12
            worst = max(worst, abs(r ** 2 + abs(p.rep[a]) ** 2 - 1.0))
    return worst, 1e-12


@check("projective.transition_symplecticity")
def _transition_symp(cfg, rng):
    band = min(cfg.band, 8)
    worst = 0.0
    for a, b in _overlapping_pairs(cfg.chart_ids, band):
        p = chart_point(rng, band, a, b)
        u = proj.darboux_chart(a, p, band=band)
        worst = max(worst, symplecticity_check(lambda v, a=a, b=b: proj.transition(a, b, v), u, band, 1e-5))
    return worst, 1e-5


@check("projective.reduced_flow_equivariance")
def _equivariance(cfg, rng):
    worst = 0.0
    for t in cfg.t_values:
        x = random_band(rng, cfg.band)
        c = complex(rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        p, q = proj.reduced_flow(t, proj.ray_of(c * x)), proj.reduced_flow(t, proj.ray_of(x))
        worst = max(worst, proj.ray_distance(p, q))
    return worst, 1e-12


@check("projective.chart_flow_closed_form")
def _chart_closed(cfg, rng):
    worst = 0.0
    for a in cfg.chart_ids:
        if not _in_window(a, cfg.band):
            continue
        p = chart_point(rng, cfg.band, a)
        u = proj.darboux_chart(a, p, band=cfg.band)
        for t in cfg.t_values:
            d = proj.chart_flow(a, t, u) - proj.chart_phase_map(a, t, u)
            worst = max(worst, level_norm(d, NU, 0))
    return worst, 1e-12


CHART_FD_EPS = 1e-6


def chart_field_fd_defect(a: int, u: BandVector, eps: float = CHART_FD_EPS) -> float:
    """Central difference in t of the chart-expressed reduced flow at t = 0, against i sigma_a(u)."""
    fd = (proj.chart_flow(a, eps, u) - proj.chart_flow(a, -eps, u)) / (2 * eps)
    return level_norm(fd - proj.reduced_field_chart(a, u), NU, 0)


@check("projective.chart_field_fd")
def _chart_fd(cfg, rng):
    band = min(cfg.band, 6)
    worst = 0.0
    for a in cfg.chart_ids:
        if not _in_window(a, band):
            continue
        p = chart_point(rng, band, a)
        worst = max(worst, chart_field_fd_defect(a, proj.darboux_chart(a, p, band=band)))
    return worst, 1e-6


@check("projective.reduced_omega_gradient")
def _reduced_grad(cfg, rng):
    worst = 0.0
    for a in cfg.chart_ids:
        for _ in range(20):
            u, xi = random_band(rng, cfg.band, 0.1), random_band(rng, cfg.band)
            lhs = -proj.reduced_dh_chart(a, u).action(xi)
            rhs = omega(xi, proj.reduced_field_chart(a, u))
            scale = 1 + level_norm(mult.apply(mult.make_sigma(a), u), NU, 0) * level_norm(xi, NU, 0)
            worst = max(worst, abs(lhs - rhs) / scale)
    return worst, 1e-12


@check("projective.reduced_dh_fd")
def _reduced_dh_fd(cfg, rng):
    band = min(cfg.band, 6)
    worst = 0.0
    for a in cfg.chart_ids:
        if not _in_window(a, band):
            continue
        p = chart_point(rng, band, a)
        u = proj.darboux_chart(a, p, band=band)
        g = real_gradient(lambda v, a=a: proj.reduced_hamiltonian_chart(a, v), u, band)
        worst = max(worst, float(np.max(np.abs(g - proj.reduced_dh_chart(a, u).rep.to_real()))))
    return worst, 1e-6


@check("projective.ray_energy_conservation")
def _ray_energy(cfg, rng):
    worst = 0.0
    for t in cfg.t_values:
        p = proj.ray_of(random_band(rng, cfg.band))
        worst = max(worst, abs(proj.reduced_hamiltonian(proj.reduced_flow(t, p)) - proj.reduced_hamiltonian(p)))
    return worst, 1e-10


@check("projective.momentum_identification")
def _momentum(cfg, rng):
    worst = 0.0
    for _ in range(20):
        x = random_band(rng, cfg.band)
        x = x / level_norm(x, NU, 0)
        worst = max(worst, abs(proj.momentum_map(x)), level_norm(proj.ray_of(x).rep - x, NU, 0))
    return worst, 1e-15


@check("projective.sigma_formula")
def _sigma(cfg, rng):
    n = np.arange(-64, 65)
    expected = np.where(n < 0, -(n ** 2), -((n + 1) ** 2)).astype(np.float64)
    return float(np.max(np.abs(mult.make_sigma(0).coeffs(64) - expected))), 0.0


VERIFY_CHECKS = tuple(CHECKS)
CHART_CHECKS = tuple(k for k in CHECKS if k.startswith("projective.") or k == "sc_check.chain_rule_darboux")


def run_checks(cfg: ExperimentConfig, names) -> Report:
    def one(name):
        t0 = time.perf_counter()
        value, thr = CHECKS[name](cfg, check_rng(cfg.seed, name))
        status = "PASS" if value <= thr else "FAIL"
        return CheckRecord(name, status, float(value), float(thr), time.perf_counter() - t0)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as ex:
            records = list(ex.map(one, names))
    else:
        records = [one(n) for n in names]
    return Report(cfg.suite, cfg.band, cfg.seed, records)


def run_verify(cfg: ExperimentConfig) -> Report:
    return run_checks(cfg, VERIFY_CHECKS)


def run_charts(cfg: ExperimentConfig) -> Report:
    return run_checks(cfg, CHART_CHECKS)


def converge_tables(cfg: ExperimentConfig) -> dict:
    rng = check_rng(cfg.seed, "converge")
    lad = cfg.eps_ladder
    tables = {}
    u, xi = random_band(rng, cfg.band), random_band(rng, cfg.band)
    tables["schrodinger_h_sc1"] = sc1_residual_table(
        sch.hamiltonian, lambda x, v: sch.dh(x).action(v), u, xi, NU, 0, lad, label="schrodinger_h_sc1")
    t = ResidualTable.from_ladder
    g = gaussian_band(cfg.band)
    tables["flow_residual"] = sch.flow_residual_table(0.3, g, lad)
    band = min(cfg.band, 6)
    a = 0
    uc = proj.darboux_chart(a, chart_point(rng, band, a), band=band)
    tables["chart_flow_fd"] = t(lad, [chart_field_fd_defect(a, uc, e) for e in lad], label="chart_flow_fd")
    tables["linear_map"] = sc1_residual_table(
        mult.laplacian(), lambda _x, v: mult.apply(mult.laplacian(), v), BandVector.zeros(cfg.band), xi, NU, 0, lad,
        label="linear_map")
    return tables


CONVERGE_TARGETS = {"schrodinger_h_sc1": (1.0, 0.01), "flow_residual": (2.0, 0.1),
                    "chart_flow_fd": (2.0, 0.1), "linear_map": None}


def run_converge(cfg: ExperimentConfig):
    tables = converge_tables(cfg)
    report = Report(cfg.suite, cfg.band, cfg.seed)
    for name, tab in tables.items():
        target = CONVERGE_TARGETS[name]
        if target is None:
            value, thr = max(tab.residuals), 1e-12
        else:
            value, thr = (math.inf if tab.slope is None else abs(tab.slope - target[0])), target[1]
        passed = value <= thr
        tables[name] = ResidualTable(tab.steps, tab.residuals, tab.slope, tab.exact, passed, name)
        report.records.append(CheckRecord(f"converge.{name}", "PASS" if passed else "FAIL", value, thr))
    return report, tables


def run_flow(cfg: ExperimentConfig):
    """Returns (report, csv text)."""
    u = initial_vector(cfg.initial, cfg.band)
    report = Report(cfg.suite, cfg.band, cfg.seed)
    if cfg.projective:
        if level_norm(u, NU, 0) == 0:
            raise ConfigError("field 'initial': the zero vector has no ray")
        p = proj.ray_of(u)
        text = proj.ray_trajectory_csv(p, cfg.t_values, cfg.chart_threshold)
        h0 = proj.reduced_hamiltonian(p)
        drift = max((abs(proj.reduced_hamiltonian(proj.reduced_flow(t, p)) - h0) for t in cfg.t_values), default=0.0)
    else:
        text = sch.trajectory_csv(u, cfg.t_values, {"momentum": proj.momentum_map})
        h0 = sch.hamiltonian(u)
        drift = max((abs(sch.hamiltonian(sch.flow(t, u)) - h0) for t in cfg.t_values), default=0.0)
    drift /= 1 + h0
    report.records.append(CheckRecord("flow.energy_drift", "PASS" if drift <= 1e-10 else "FAIL", drift, 1e-10))
    return report, text


def write_outputs(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> Report:
    out = out_dir or cfg.output_path
    os.makedirs(out, exist_ok=True)

    def put(name, text):
        with open(os.path.join(out, name), "w", newline="") as fh:
            fh.write(text)

    if cfg.suite == "verify":
        report = run_verify(cfg)
    elif cfg.suite == "charts":
        report = run_charts(cfg)
    elif cfg.suite == "converge":
        report, tables = run_converge(cfg)
        for name, tab in tables.items():
            put(f"converge_{name}.csv", tab.to_csv())
    else:
        report, text = run_flow(cfg)
        put("flow_trajectory.csv", text)
    put(f"{cfg.suite}_report.json", report.to_json())
    put(f"{cfg.suite}_timings.json", report.timings_json())
    return report
