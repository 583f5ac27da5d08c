"""Closed-form spectral quantities of the P1 interface discretisation.

All functions are pure and operate on Python floats.  The diagonal entries of
the interface block are available for four discretisation variants:

* ``SemiUnbounded``  -- x discretised, y continuous, infinite strip
* ``FullUnbounded``  -- x and y discretised, infinite strip
* ``SemiBounded``    -- x discretised on (-L, L), y continuous
* ``FullBounded``    -- the fully discrete problem on (-L, L) x (0, pi)

Notation: ``kappa = sigma_plus / sigma_minus``, ``r = h_plus / h_minus`` and
``ry = h_y / h_minus``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateNormalization,
    DomainError,
    NoRealRoot,
)

DEGENERACY_TOL = 1e-12
ARCCOS_CLAMP_TOL = 1e-12
INTEGRALITY_TOL = 1e-12
ROUTE_TOL = 1e-10
BOUNDARY_TOL = 1e-12

# sigma^-1 on the left strip, sigma^+ on the right strip
REFERENCE_SIGMA_MINUS = -1.0
REFERENCE_SIGMA_PLUS = 1.2
REFERENCE_R = 0.5
REFERENCE_RY = 2.0 / math.sqrt(11.0)
REFERENCE_HCRIT = math.sqrt(11.0) * math.pi / 4.0
REFERENCE_L = 10.0 * REFERENCE_HCRIT


class Variant(str, enum.Enum):
    SemiUnbounded = "SemiUnbounded"
    FullUnbounded = "FullUnbounded"
    SemiBounded = "SemiBounded"
    FullBounded = "FullBounded"

    @property
    def is_full(self) -> bool:
        return self in (Variant.FullUnbounded, Variant.FullBounded)

    @property
    def is_bounded(self) -> bool:
        return self in (Variant.SemiBounded, Variant.FullBounded)


@dataclass(frozen=True)
class PhysicalConfig:
    sigma_minus: float
    sigma_plus: float
    half_width_L: float = REFERENCE_L

    def __post_init__(self):
        if not self.sigma_minus < 0:
            raise ConfigError(f"sigma_minus must be negative, got {self.sigma_minus}")
        if not self.sigma_plus > 0:
            raise ConfigError(f"sigma_plus must be positive, got {self.sigma_plus}")
        if not self.half_width_L > 0:
            raise ConfigError(f"half_width_L must be positive, got {self.half_width_L}")
        if abs(self.kappa + 1.0) <= BOUNDARY_TOL:
            raise ConfigError("contrast kappa = -1 is not admissible (ill-posed problem)")

    @property
    def kappa(self) -> float:
        return self.sigma_plus / self.sigma_minus

    @classmethod
    def from_kappa(cls, kappa: float, sigma_minus: float = -1.0, half_width_L: float = REFERENCE_L):
        return cls(sigma_minus, kappa * sigma_minus, half_width_L)


def _as_count(value: float, name: str) -> int:
    n = round(value)
    if n < 1 or abs(value - n) > INTEGRALITY_TOL * max(1.0, abs(value)):
        raise ConfigError(f"{name} = {value!r} is not a positive integer")
    return int(n)


@dataclass(frozen=True)
class MeshConfig:
    """Tensor-product mesh on (-L, L) x (0, pi).

    Build with :meth:`create` (mesh widths and ratios) or :meth:`from_counts`.
    """

    h_minus: float
    ratio_r: float
    ratio_ry: float
    half_width_L: float
    h_plus: float
    h_y: float
    n_minus: int
    n_plus: int
    big_m: int

    @classmethod
    def create(cls, h_minus: float, ratio_r: float, ratio_ry: float, half_width_L: float = REFERENCE_L):
        for name, v in (("h_minus", h_minus), ("ratio_r", ratio_r), ("ratio_ry", ratio_ry),
                        ("half_width_L", half_width_L)):
            if not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        h_plus = ratio_r * h_minus
        h_y = ratio_ry * h_minus
        n_minus = _as_count(half_width_L / h_minus, "N_minus = L/h_minus")
        n_plus = _as_count(half_width_L / h_plus, "N_plus = L/h_plus")
        big_m = _as_count(math.pi / h_y, "M = pi/h_y")
        return cls(h_minus, ratio_r, ratio_ry, half_width_L, h_plus, h_y, n_minus, n_plus, big_m)

    @classmethod
    def from_counts(cls, n_minus: int, n_plus: int, big_m: int, half_width_L: float = REFERENCE_L):
        if min(n_minus, n_plus, big_m) < 1:
            raise ConfigError("mesh counts must be positive integers")
        if not half_width_L > 0:
            raise ConfigError(f"half_width_L must be positive, got {half_width_L}")
        h_minus = half_width_L / n_minus
        h_plus = half_width_L / n_plus
        h_y = math.pi / big_m
        return cls(h_minus, h_plus / h_minus, h_y / h_minus, half_width_L, h_plus, h_y,
                   int(n_minus), int(n_plus), int(big_m))

    def for_physics(self, phys: PhysicalConfig) -> "MeshConfig":
        if abs(phys.half_width_L - self.half_width_L) > INTEGRALITY_TOL * self.half_width_L:
            raise ConfigError(
                f"mesh built for L={self.half_width_L} but physics has L={phys.half_width_L}")
        return self

    @property
    def n_interior_x(self) -> int:
        return self.n_minus + self.n_plus - 1

    @property
    def n_unknowns(self) -> int:
        return self.n_interior_x * (self.big_m - 1)


# ---------------------------------------------------------------------------
# local coefficients and recurrence roots


def local_coeffs(lam: float, h: float) -> tuple[float, float]:
    """Diagonal/off-diagonal weights of ``K + lam^2 M`` for one cell width ``h``."""
    if not (lam > 0 and h > 0):
        raise DomainError(f"local_coeffs needs lam > 0 and h > 0, got lam={lam}, h={h}")
    a = 1.0 / h + lam * lam * h / 3.0
    b = -1.0 / h + lam * lam * h / 6.0
    return a, b


def mu_roots(a: float, b: float) -> tuple[float, float, bool]:
    """Roots of ``b mu^2 + 2 a mu + b``, small root first.

    Returns ``(mu1, mu2, degenerate)``; on the degenerate branch (``b`` = 0 up
    to ``DEGENERACY_TOL * a``) the convention ``mu1 = 0, mu2 = 1`` is used.
    """
    if not a > 0:
        raise DomainError(f"mu_roots needs a > 0, got {a}")
    disc = (a - b) * (a + b)
    if not disc > 0:
        raise DomainError(f"mu_roots needs a^2 - b^2 > 0, got a={a}, b={b}")
    if abs(b) <= DEGENERACY_TOL * a:
        return 0.0, 1.0, True
    s = math.sqrt(disc)
    # rationalised form of (-a + s)/b, free of cancellation for small |b|
    mu1 = -b / (a + s)
    mu2 = -(a + s) / b
    return mu1, mu2, False


@dataclass(frozen=True)
class ModeCoefficients:
    mode_m: int
    lam: float
    a_minus: float
    a_plus: float
    b_minus: float
    b_plus: float
    mu1_minus: float
    mu2_minus: float
    mu1_plus: float
    mu2_plus: float
    degenerate_minus: bool
    degenerate_plus: bool

    @property
    def mu_minus(self) -> float:
        return self.mu1_minus

    @property
    def mu_plus(self) -> float:
        return self.mu1_plus

    @property
    def nu_minus(self) -> float:
        return self.mu1_minus / self.mu2_minus

    @property
    def nu_plus(self) -> float:
        return self.mu1_plus / self.mu2_plus

    @property
    def root_minus(self) -> float:
        """sqrt(a_-^2 - b_-^2)."""
        return math.sqrt((self.a_minus - self.b_minus) * (self.a_minus + self.b_minus))

    @property
    def root_plus(self) -> float:
        return math.sqrt((self.a_plus - self.b_plus) * (self.a_plus + self.b_plus))


def mode_coefficients(m: int, lam: float, h_minus: float, h_plus: float) -> ModeCoefficients:
    a_m, b_m = local_coeffs(lam, h_minus)
    a_p, b_p = local_coeffs(lam, h_plus)
    m1m, m2m, dm = mu_roots(a_m, b_m)
    m1p, m2p, dp = mu_roots(a_p, b_p)
    return ModeCoefficients(m, lam, a_m, a_p, b_m, b_p, m1m, m2m, m1p, m2p, dm, dp)


def signed_power(base: float, n: float) -> float:
    """``base**n`` for integer ``n`` via exp(n log|base|); underflow gives 0."""
    if base == 0.0:
        return 0.0 if n > 0 else 1.0
    mag = math.exp(n * math.log(abs(base)))
    if base < 0 and int(round(n)) % 2 == 1:
        return -mag
    return mag


# ---------------------------------------------------------------------------
# analytic functions


def f_kr(kappa: float, r: float, t: float) -> float:
    """Normalised interface diagonal on the unbounded strip as a function of ``t = lam h_-``."""
    if not r > 0:
        raise DomainError(f"f_kr needs r > 0, got {r}")
    if not t >= 0:
        raise DomainError(f"f_kr needs t >= 0, got {t}")
    rho = math.sqrt(r * r * t * t + 12.0) / math.sqrt(t * t + 12.0)
    return (1.0 + kappa * rho) / (1.0 + rho)


def assr_holds(kappa: float, r: float) -> bool:
    ak = abs(kappa)
    return (ak < 1 and r * ak > 1) or (ak > 1 and r * ak < 1)


def t_crit(kappa: float, r: float) -> float:
    """The unique non-negative root of :func:`f_kr`."""
    if not assr_holds(kappa, r):
        raise NoRealRoot(f"f_kr has no root for kappa={kappa}, r={r}")
    k2 = kappa * kappa
    return math.sqrt(12.0 * (1.0 - k2) / (k2 * r * r - 1.0))


def frak_h(ry: float, s: float) -> float:
    """Map from the discrete angle ``s = m h_y`` to ``tau_m h_-``."""
    if not ry > 0:
        raise DomainError(f"frak_h needs ry > 0, got {ry}")
    if not (-ARCCOS_CLAMP_TOL <= s <= math.pi + ARCCOS_CLAMP_TOL):
        raise DomainError(f"frak_h needs s in [0, pi], got {s}")
    s = min(max(s, 0.0), math.pi)
    one_minus_cos = 2.0 * math.sin(0.5 * s) ** 2
    return math.sqrt(6.0 / (ry * ry) * one_minus_cos / (2.0 + math.cos(s)))


def assry_holds(kappa: float, r: float, ry: float) -> bool:
    ak = abs(kappa)
    lhs = r * r * kappa * kappa
    rhs = 1.0 + ry * ry * (1.0 - kappa * kappa)
    return (ak < 1 and lhs > rhs) or (ak > 1 and lhs < rhs)


def s_crit(kappa: float, r: float, ry: float) -> float:
    """Critical discrete angle in (0, pi] at which ``frak_h(ry, s) = t_crit``."""
    if not assry_holds(kappa, r, ry):
        raise NoRealRoot(f"no critical angle for kappa={kappa}, r={r}, ry={ry}")
    one_k2 = 1.0 - kappa * kappa
    arg = 1.0 + 6.0 * ry * ry * one_k2 / ((1.0 - kappa * kappa * r * r) - 2.0 * ry * ry * one_k2)
    if arg > 1.0 + ARCCOS_CLAMP_TOL or arg < -1.0 - ARCCOS_CLAMP_TOL:
        raise ConsistencyError(f"arccos argument {arg!r} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, arg)))


def discrete_lambda_hat(m: int, hy: float) -> float:
    """Square root of the m-th generalised eigenvalue of the P1 y-matrices."""
    if not hy > 0:
        raise DomainError(f"hy must be positive, got {hy}")
    big_m = math.pi / hy
    if m < 1 or m > big_m - 1 + 1e-9:
        raise DomainError(f"mode m={m} outside 1..M-1 with M={big_m:.6g}")
    s = m * hy
    one_minus_cos = 2.0 * math.sin(0.5 * s) ** 2
    return math.sqrt(6.0 * one_minus_cos / (2.0 + math.cos(s))) / hy


def _log_nu(t: float) -> float:
    """log of the root ratio mu1/mu2 at ``t = lam h`` (``-inf`` on the degenerate locus)."""
    t2 = t * t
    if t2 < 6.0:
        log_num = math.log1p(-t2 / 6.0)
    elif t2 == 6.0:
        return -math.inf
    else:
        log_num = math.log(t2 / 6.0 - 1.0)
    log_den = math.log1p(t2 / 3.0 + t * math.sqrt(1.0 + t2 / 12.0))
    return 2.0 * (log_num - log_den)


def frak_q(t: float) -> float:
    """Per-unit-length decay factor of the discrete profile; ``e^-2`` at ``t = 0``."""
    if not t >= 0:
        raise DomainError(f"frak_q needs t >= 0, got {t}")
    if t == 0.0:
        return math.exp(-2.0)
    ln = _log_nu(t)
    if ln == -math.inf:
        return 0.0
    return math.exp(ln / t)


def _pow_q(n: float, q: float) -> float:
    if q == 0.0:
        return 0.0
    return math.exp(n * math.log(q))


def frak_j(n: float, q: float) -> float:
    """``(1 - q^n) / (1 + q^n)`` with q^n evaluated as exp(n log q)."""
    if not n > 0:
        raise DomainError(f"frak_j needs n > 0, got {n}")
    if not 0.0 <= q < 1.0:
        raise DomainError(f"frak_j needs q in [0, 1), got {q}")
    if q == 0.0:
        return 1.0
    x = n * math.log(q)
    return -math.expm1(x) / (1.0 + math.exp(x))


def frak_z(r: float, lam: float, L: float, t: float) -> float:
    if not r > 0:
        raise DomainError(f"frak_z needs r > 0, got {r}")
    if not lam >= 1.0 - 1e-12:
        raise DomainError(f"frak_z needs lam >= 1, got {lam}")
    if not L > 0:
        raise DomainError(f"frak_z needs L > 0, got {L}")
    n = lam * L
    return frak_j(n, frak_q(t)) / frak_j(n, frak_q(r * t))


def f_tilde(kappa: float, r: float, lam: float, L: float, t: float) -> float:
    """Bounded-domain counterpart of :func:`f_kr`."""
    z = frak_z(r, lam, L, t)
    rho = z * math.sqrt(r * r * t * t + 12.0) / math.sqrt(t * t + 12.0)
    return (1.0 + kappa * rho) / (1.0 + rho)


# ---------------------------------------------------------------------------
# diagonal entries


@dataclass(frozen=True)
class DiagonalEntry:
    mode_m: int
    variant: Variant
    value: float
    quotient_value: float


def _mode_lambda(mesh: MeshConfig, m: int, variant: Variant) -> float:
    if m < 1:
        raise DomainError(f"mode index must be >= 1, got {m}")
    if variant.is_full:
        if m > mesh.big_m - 1:
            raise DomainError(f"mode m={m} outside 1..M-1 (M={mesh.big_m})")
        return discrete_lambda_hat(m, mesh.h_y)
    return float(m)


def _bounded_weight(nu: float, n: int) -> float:
    """(1 + nu^N) / (1 - nu^N)."""
    if nu == 0.0:
        return 1.0
    x = n * math.log(abs(nu))
    p = math.exp(x)
    if nu < 0 and n % 2 == 1:
        return (1.0 - p) / (1.0 + p)
    return (1.0 + p) / -math.expm1(x)


def _quotient_route(phys: PhysicalConfig, mesh: MeshConfig, coeffs: ModeCoefficients,
                    bounded: bool) -> float:
    sm, sp = phys.sigma_minus, phys.sigma_plus
    if bounded:
        wm = _bounded_weight(coeffs.nu_minus, mesh.n_minus) * coeffs.root_minus
        wp = _bounded_weight(coeffs.nu_plus, mesh.n_plus) * coeffs.root_plus
    else:
        wm = coeffs.b_minus * coeffs.mu_minus + coeffs.a_minus
        wp = coeffs.a_plus + coeffs.b_plus * coeffs.mu_plus
    return (sm * wm + sp * wp) / (wm + wp)


def _function_route(phys: PhysicalConfig, mesh: MeshConfig, m: int, lam: float,
                    variant: Variant) -> float:
    kappa, r, ry = phys.kappa, mesh.ratio_r, mesh.ratio_ry
    if variant is Variant.SemiUnbounded:
        g = f_kr(kappa, r, lam * mesh.h_minus)
    elif variant is Variant.FullUnbounded:
        g = f_kr(kappa, r, frak_h(ry, ry * m * mesh.h_minus))
    elif variant is Variant.SemiBounded:
        g = f_tilde(kappa, r, lam, mesh.half_width_L, lam * mesh.h_minus)
    else:
        g = f_tilde(kappa, r, lam, mesh.half_width_L, frak_h(ry, ry * m * mesh.h_minus))
    return phys.sigma_minus * g


def diagonal_entry(phys: PhysicalConfig, mesh: MeshConfig, m: int,
                   variant: Variant | str = Variant.FullBounded) -> DiagonalEntry:
    """Interface-block eigenvalue for mode ``m``, computed two independent ways.

    The recurrence-root quotient and the composed analytic function must agree
    to ``ROUTE_TOL`` relative to ``max(|d|, |sigma_minus|)``.
    """
    variant = Variant(variant)
    lam = _mode_lambda(mesh, m, variant)
    coeffs = mode_coefficients(m, lam, mesh.h_minus, mesh.h_plus)
    d_q = _quotient_route(phys, mesh, coeffs, variant.is_bounded)
    d_f = _function_route(phys, mesh, m, lam, variant)
    scale = max(abs(d_f), abs(phys.sigma_minus))
    if not abs(d_q - d_f) <= ROUTE_TOL * scale:
        raise ConsistencyError(
            f"{variant.value} diagonal for m={m}: quotient {d_q!r} vs function {d_f!r}")
    return DiagonalEntry(m, variant, d_f, d_q)


def bounded_diagonals(phys: PhysicalConfig, mesh: MeshConfig) -> np.ndarray:
    """All fully discrete bounded-domain diagonals ``m = 1..M-1`` as an array."""
    return np.array([diagonal_entry(phys, mesh, m, Variant.FullBounded).value
                     for m in range(1, mesh.big_m)])


# ---------------------------------------------------------------------------
# mode profiles


@dataclass(frozen=True)
class ModeProfile:
    mode_m: int
    variant: Variant
    lam: float
    beta0: float
    coefficients: np.ndarray  # n = -N_minus .. N_plus, boundary zeros included

    @property
    def interior(self) -> np.ndarray:
        return self.coefficients[1:-1]


def _side_profile(mu1: float, n_cells: int, degenerate: bool) -> np.ndarray:
    """(mu1^n - nu^N mu2^n) / (1 - nu^N) for n = 0..N.

    Uses mu2 = 1/mu1 to write the numerator as mu1^n - mu1^(2N-n), which never
    overflows.  On the degenerate branch only n = 0 survives.
    """
    n = np.arange(n_cells + 1)
    if degenerate or mu1 == 0.0:
        out = np.zeros(n_cells + 1)
        out[0] = 1.0
        return out
    sign = np.where(n % 2 == 1, np.sign(mu1), 1.0)
    log_abs = math.log(abs(mu1))
    p1 = sign * np.exp(n * log_abs)
    n2 = 2 * n_cells - n
    p2 = np.where(n2 % 2 == 1, np.sign(mu1), 1.0) * np.exp(n2 * log_abs)
    denom = -math.expm1(2 * n_cells * log_abs)
    out = (p1 - p2) / denom
    out[-1] = 0.0
    return out


def mode_profile(phys: PhysicalConfig, mesh: MeshConfig, m: int,
                 variant: Variant | str = Variant.FullBounded) -> ModeProfile:
    """Coefficients of the interface eigenfunction in the x hat basis.

    Normalised so that the tensor function (profile x unit y-mode) has unit
    H^1_0 norm.
    """
    variant = Variant(variant)
    if not variant.is_bounded:
        raise DomainError("mode_profile supports SemiBounded and FullBounded; "
                          "use unbounded_profile for the infinite strip")
    lam = _mode_lambda(mesh, m, variant)
    c = mode_coefficients(m, lam, mesh.h_minus, mesh.h_plus)
    radicand = (_bounded_weight(c.nu_minus, mesh.n_minus) * c.root_minus
                + _bounded_weight(c.nu_plus, mesh.n_plus) * c.root_plus)
    if not radicand > 0:
        raise DegenerateNormalization(
            f"non-positive normalisation radicand {radicand!r} for m={m}, "
            f"h_minus={mesh.h_minus}, r={mesh.ratio_r}, ry={mesh.ratio_ry}")
    beta0 = 1.0 / math.sqrt(radicand)
    left = _side_profile(c.mu1_minus, mesh.n_minus, c.degenerate_minus)
    right = _side_profile(c.mu1_plus, mesh.n_plus, c.degenerate_plus)
    coeffs = beta0 * np.concatenate([left[::-1], right[1:]])
    return ModeProfile(m, variant, lam, beta0, coeffs)


def unbounded_profile(h_minus: float, h_plus: float, lam: float, cutoff: float = 1e-16):
    """Truncated interface profile on the infinite strip.

    Returns ``(n, beta)`` with ``n`` running over the retained node indices; the
    geometric tails are cut once ``|mu|^n < cutoff``.
    """
    if not 0 < cutoff < 1:
        raise DomainError(f"cutoff must lie in (0, 1), got {cutoff}")
    a_m, b_m = local_coeffs(lam, h_minus)
    a_p, b_p = local_coeffs(lam, h_plus)
    mu_m, _, _ = mu_roots(a_m, b_m)
    mu_p, _, _ = mu_roots(a_p, b_p)
    radicand = b_m * mu_m + a_m + a_p + b_p * mu_p
    if not radicand > 0:
        raise DegenerateNormalization(f"non-positive normalisation radicand {radicand!r}")
    beta0 = 1.0 / math.sqrt(radicand)

    def tail(mu):
        if mu == 0.0:
            return np.empty(0)
        k = max(1, math.ceil(math.log(cutoff) / math.log(abs(mu))))
        return mu ** np.arange(1, k + 1)

    left, right = tail(mu_m), tail(mu_p)
    n = np.arange(-len(left), len(right) + 1)
    beta = beta0 * np.concatenate([left[::-1], [1.0], right])
    return n, beta
