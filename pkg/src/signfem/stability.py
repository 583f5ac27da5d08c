"""Stability classification, inverse-norm bounds and critical mesh sizes.

Verdicts compare the contrast ``kappa = sigma_+/sigma_-`` and the mesh ratios
``r = h_+/h_-`` and ``r_y = h_y/h_-`` against the sharp stability and
instability conditions of the interface discretisation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConsistencyError, DomainError, NoAdmissibleRatio, NoCriticalMesh
from .spectral import (
    BOUNDARY_TOL,
    MeshConfig,
    PhysicalConfig,
    bounded_diagonals,
    frak_h,
    s_crit,
    t_crit,
)

DEFAULT_EPSILON = 0.05
SMALL_MESH_NOTE = "for h_minus small enough"
SEMI_UNSTABLE_NOTE = "semi-discrete problem would be unstable"


class Regime(str, enum.Enum):
    Stable = "Stable"
    Unstable = "Unstable"
    Boundary = "Boundary"


class ConditionId(str, enum.Enum):
    AssR_a = "AssR_a"
    AssR_b = "AssR_b"
    AssR_vv_a = "AssR_vv_a"
    AssR_vv_b = "AssR_vv_b"
    AssRy_a = "AssRy_a"
    AssRy_b = "AssRy_b"
    AssRy_vv_a = "AssRy_vv_a"
    AssRy_vv_b = "AssRy_vv_b"
    AssRL_vv_a = "AssRL_vv_a"
    AssRL_vv_b = "AssRL_vv_b"
    AssRyL_vv_a = "AssRyL_vv_a"
    AssRyL_vv_b = "AssRyL_vv_b"
    NONE = "None"


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a classification.

    ``inverse_norm_bound`` is the bound on the inverse operator norm for
    ``|sigma_-| = 1``; divide by ``|sigma_-|`` for other scalings.
    """

    regime: Regime
    condition_id: ConditionId = ConditionId.NONE
    inverse_norm_bound: float | None = None
    epsilon_slack: float | None = None
    critical_t: float | None = None
    critical_s: float | None = None
    min_factor: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if (self.inverse_norm_bound is not None) != (self.regime is Regime.Stable):
            raise ConsistencyError("inverse_norm_bound must be present exactly for Stable verdicts")

    def bound_for(self, sigma_minus: float) -> float | None:
        if self.inverse_norm_bound is None:
            return None
        return self.inverse_norm_bound / abs(sigma_minus)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["regime"] = self.regime.value
        out["condition_id"] = self.condition_id.value
        out["notes"] = list(self.notes)
        return out


def _check_kappa(kappa: float):
    if not kappa < 0:
        raise DomainError(f"kappa must be negative, got {kappa}")


def _check_positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")


def _stable(cond: ConditionId, factor: float, **kw) -> StabilityVerdict:
    return StabilityVerdict(Regime.Stable, cond, 1.0 / factor, min_factor=factor, **kw)


# ---------------------------------------------------------------------------
# unbounded domain


def classify_semi(kappa: float, r: float, tol: float = BOUNDARY_TOL) -> StabilityVerdict:
    """Classify the semi-discretisation (continuous in y)."""
    _check_kappa(kappa)
    _check_positive(r=r)
    ak = abs(kappa)
    if abs(ak - 1.0) <= tol or abs(r * ak - 1.0) <= tol:
        return StabilityVerdict(Regime.Boundary)
    if (ak < 1) != (r * ak < 1):
        cond = ConditionId.AssR_a if ak < 1 else ConditionId.AssR_b
        return StabilityVerdict(Regime.Unstable, cond, critical_t=t_crit(kappa, r))
    factor = min(1.0, ak, abs((1.0 + kappa) / 2.0), abs((1.0 + r * kappa) / (1.0 + r)))
    cond = ConditionId.AssR_vv_a if ak < 1 else ConditionId.AssR_vv_b
    return _stable(cond, factor)


def _full_gap(kappa: float, r: float, ry: float) -> float:
    return r * r * kappa * kappa - (1.0 + ry * ry * (1.0 - kappa * kappa))


def full_factor(kappa: float, r: float, ry: float) -> float:
    """``min{1, |kappa|, |1+kappa|/2, |sqrt(1+ry^2) + kappa sqrt(r^2+ry^2)| / (...)}``."""
    a, b = math.sqrt(1.0 + ry * ry), math.sqrt(r * r + ry * ry)
    return min(1.0, abs(kappa), abs((1.0 + kappa) / 2.0), abs((a + kappa * b) / (a + b)))


def classify_full(kappa: float, r: float, ry: float, tol: float = BOUNDARY_TOL) -> StabilityVerdict:
    """Classify the full discretisation with y-mesh ratio ``ry``."""
    _check_kappa(kappa)
    _check_positive(r=r, ry=ry)
    ak = abs(kappa)
    gap = _full_gap(kappa, r, ry)
    if abs(ak - 1.0) <= tol or abs(gap) <= tol:
        return StabilityVerdict(Regime.Boundary)
    if (ak < 1) == (gap > 0):
        cond = ConditionId.AssRy_a if ak < 1 else ConditionId.AssRy_b
        s = s_crit(kappa, r, ry)
        return StabilityVerdict(Regime.Unstable, cond, critical_t=frak_h(ry, s), critical_s=s)
    cond = ConditionId.AssRy_vv_a if ak < 1 else ConditionId.AssRy_vv_b
    notes = ()
    if classify_semi(kappa, r, tol).regime is Regime.Unstable:
        notes = (SEMI_UNSTABLE_NOTE,)
    return _stable(cond, full_factor(kappa, r, ry), notes=notes)


# ---------------------------------------------------------------------------
# bounded domain


def _bounded_semi_factor(kappa: float, r: float, eps: float) -> float:
    terms = [1.0, abs(kappa)]
    for p in (1.0, -1.0):
        k = (1.0 + p * eps) * kappa
        terms.append(abs(1.0 + k) / (2.0 + eps))
        terms.append(abs(1.0 + k * r) / (1.0 + (1.0 + eps) * r))
    return min(terms)


def _bounded_full_factor(kappa: float, r: float, ry: float, eps: float) -> float:
    a, b = math.sqrt(1.0 + ry * ry), math.sqrt(r * r + ry * ry)
    terms = [1.0, abs(kappa)]
    for p in (1.0, -1.0):
        k = (1.0 + p * eps) * kappa
        terms.append(abs(1.0 + k) / (2.0 + eps))
        terms.append(abs(a + k * b) / (a + (1.0 + eps) * b))
    return min(terms)


def classify_bounded(kappa: float, r: float, ry: float | None = None,
                     epsilon: float = DEFAULT_EPSILON, tol: float = BOUNDARY_TOL) -> StabilityVerdict:
    """Classify on the truncated domain (-L, L); semi-discrete when ``ry`` is None.

    Stability needs the condition with slack ``epsilon`` and holds only for
    ``h_-`` below an unquantified threshold; instability needs no slack.  A
    parameter in neither set is reported as Boundary.
    """
    _check_kappa(kappa)
    _check_positive(r=r)
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    ak = abs(kappa)
    lo, hi = ak * (1.0 - epsilon), ak * (1.0 + epsilon)
    if ry is None:
        if hi < 1 and r * hi < 1:
            return _stable(ConditionId.AssRL_vv_a, _bounded_semi_factor(kappa, r, epsilon),
                           epsilon_slack=epsilon, notes=(SMALL_MESH_NOTE,))
        if lo > 1 and r * lo > 1:
            return _stable(ConditionId.AssRL_vv_b, _bounded_semi_factor(kappa, r, epsilon),
                           epsilon_slack=epsilon, notes=(SMALL_MESH_NOTE,))
        base = classify_semi(kappa, r, tol)
    else:
        _check_positive(ry=ry)
        ry2 = ry * ry
        if hi < 1 and r * r * hi * hi < 1.0 + ry2 * (1.0 - hi * hi):
            return _stable(ConditionId.AssRyL_vv_a, _bounded_full_factor(kappa, r, ry, epsilon),
                           epsilon_slack=epsilon, notes=(SMALL_MESH_NOTE,))
        if lo > 1 and r * r * lo * lo > 1.0 + ry2 * (1.0 - lo * lo):
            return _stable(ConditionId.AssRyL_vv_b, _bounded_full_factor(kappa, r, ry, epsilon),
                           epsilon_slack=epsilon, notes=(SMALL_MESH_NOTE,))
        base = classify_full(kappa, r, ry, tol)
    if base.regime is Regime.Unstable:
        return StabilityVerdict(Regime.Unstable, base.condition_id, epsilon_slack=epsilon,
                                critical_t=base.critical_t, critical_s=base.critical_s)
    return StabilityVerdict(Regime.Boundary, epsilon_slack=epsilon)


# ---------------------------------------------------------------------------
# critical meshes and ratio design


def critical_meshes(kappa: float, r: float, ry: float | None, m_max: int) -> list[tuple[int, float]]:
    """Mesh widths ``h_-`` at which a diagonal entry of the discrete operator vanishes.

    With ``ry`` these are ``s_crit / (ry m)``; without (continuous in y) they
    are ``t_crit / m``.
    """
    if int(m_max) != m_max or m_max < 1:
        raise DomainError(f"m_max must be a positive integer, got {m_max}")
    if ry is None:
        verdict = classify_semi(kappa, r)
        if verdict.regime is not Regime.Unstable:
            raise NoCriticalMesh(f"semi-discretisation is {verdict.regime.value}")
        t = verdict.critical_t
        return [(m, t / m) for m in range(1, int(m_max) + 1)]
    verdict = classify_full(kappa, r, ry)
    if verdict.regime is not Regime.Unstable:
        raise NoCriticalMesh(f"full discretisation is {verdict.regime.value}")
    s = verdict.critical_s
    return [(m, s / (ry * m)) for m in range(1, int(m_max) + 1)]


def solve_ry_for_rational_s(kappa: float, r: float, l: int, k: int, tol: float = 1e-12) -> float:
    """The ratio ``r_y`` for which the critical angle equals ``pi l / k``."""
    _check_kappa(kappa)
    _check_positive(r=r)
    if not (int(l) == l and int(k) == k and 0 < l < k):
        raise DomainError(f"need integers 0 < l < k, got l={l}, k={k}")
    target = math.pi * l / k
    c = math.cos(target) - 1.0
    k2 = kappa * kappa
    den = (1.0 - k2) * (6.0 + 2.0 * c)
    radicand = c * (1.0 - k2 * r * r) / den if den != 0.0 else -1.0
    if not radicand > 0:
        raise NoAdmissibleRatio(f"no positive r_y gives s = pi*{l}/{k} for kappa={kappa}, r={r}")
    ry = math.sqrt(radicand)
    s = s_crit(kappa, r, ry)
    if abs(s - target) > tol:
        raise ConsistencyError(f"s_crit({ry}) = {s} differs from {target}")
    return ry


def min_abs_diagonal(phys: PhysicalConfig, mesh: MeshConfig) -> tuple[int, float]:
    """Mode index and value of the smallest ``|d_m|`` on the bounded full discretisation."""
    d = np.abs(bounded_diagonals(phys, mesh))
    k = int(np.argmin(d))
    return k + 1, float(d[k])
