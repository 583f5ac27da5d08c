"""Randomised checks of the closed-form identities behind the spectral formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .spectral import (
    MeshConfig,
    PhysicalConfig,
    Variant,
    diagonal_entry,
    f_kr,
    frak_h,
    frak_q,
    local_coeffs,
    mu_roots,
    s_crit,
    t_crit,
)

IDENTITY_TOL = 1e-10
Q_LIMIT_TOL = 1e-5


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_error: float
    tol: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max error {self.max_error:.3e} (tol {self.tol:g}, n={self.samples})"


def _kappa(rng) -> float:
    while True:
        k = -rng.uniform(0.1, 3.0)
        if abs(abs(k) - 1.0) > 0.05:
            return k


def _unstable_triple(rng) -> tuple[float, float, float]:
    """Random (kappa, r, ry) satisfying the full-discretisation instability condition."""
    k = _kappa(rng)
    ak = abs(k)
    r = rng.uniform(0.1, 0.9) / ak if ak > 1 else rng.uniform(1.1, 3.0) / ak
    ry2 = rng.uniform(0.1, 0.9) * (1.0 - r * r * k * k) / (k * k - 1.0)
    return k, r, math.sqrt(ry2)


def root_identities(n: int, rng) -> tuple[IdentityResult, IdentityResult]:
    err_f, err_h = 0.0, 0.0
    for _ in range(n):
        k, r, ry = _unstable_triple(rng)
        t = t_crit(k, r)
        err_f = max(err_f, abs(f_kr(k, r, t)))
        err_h = max(err_h, abs(frak_h(ry, s_crit(k, r, ry)) - t) / max(1.0, t))
    return (IdentityResult("f_kr(kappa, r, t_crit) = 0", err_f, IDENTITY_TOL, n),
            IdentityResult("frak_h(ry, s_crit) = t_crit", err_h, IDENTITY_TOL, n))


def route_identity(n: int, rng) -> IdentityResult:
    """Quotient and closed-form routes to the diagonal entries agree."""
    err = 0.0
    variants = list(Variant)
    for i in range(n):
        sm = -rng.uniform(0.5, 2.0)
        phys = PhysicalConfig.from_kappa(_kappa(rng), sigma_minus=sm,
                                         half_width_L=rng.uniform(1.0, 30.0))
        mesh = MeshConfig.from_counts(int(rng.integers(1, 41)), int(rng.integers(1, 41)),
                                      int(rng.integers(2, 41)), phys.half_width_L)
        m = int(rng.integers(1, mesh.big_m))
        try:
            d = diagonal_entry(phys, mesh, m, variants[i % len(variants)])
        except ConsistencyError:
            return IdentityResult("dual-route diagonal agreement", math.inf, IDENTITY_TOL, i + 1)
        err = max(err, abs(d.value - d.quotient_value) / max(abs(d.value), abs(sm)))
    return IdentityResult("dual-route diagonal agreement", err, IDENTITY_TOL, n)


def root_product_identity(n: int, rng) -> IdentityResult:
    err = 0.0
    for _ in range(n):
        a, b = local_coeffs(rng.uniform(0.1, 50.0), math.exp(rng.uniform(math.log(1e-3), math.log(5.0))))
        mu1, mu2, degenerate = mu_roots(a, b)
        if not degenerate:
            err = max(err, abs(mu1 * mu2 - 1.0))
    return IdentityResult("mu1 * mu2 = 1", err, IDENTITY_TOL, n)


def q_limit_identity(n: int, rng) -> IdentityResult:
    ts = np.concatenate([[1e-6], rng.uniform(1e-9, 1e-6, n - 1)])
    err = max(abs(frak_q(float(t)) - math.exp(-2.0)) for t in ts)
    return IdentityResult("frak_q(t -> 0) = exp(-2)", err, Q_LIMIT_TOL, n)


def identity_suite(n: int = 1000, seed: int = 0) -> list[IdentityResult]:
    """Run every identity over ``n`` random valid parameter samples."""
    rng = np.random.default_rng(seed)
    return [*root_identities(n, rng), route_identity(n, rng),
            root_product_identity(n, rng), q_limit_identity(n, rng)]
