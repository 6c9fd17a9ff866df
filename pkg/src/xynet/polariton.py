"""Effective qubit-chain parameters for an array of doped cavities joined by
fibers, after the fiber modes are adiabatically eliminated.

Per site ``k`` (1..n): cavity/atom frequency ``omega_k`` (resonant), vacuum
Rabi coupling ``f_k``. Per link ``k`` (1..n-1, joining sites k and k+1):
cavity-fiber coupling ``J_k`` and fiber frequency ``omega_f_k``. With
``x_k = J_k**2 / omega_f_k``:

    omega'_k   = omega_k - f_k - sum over links touching k of x_link
    J'_k       = -x_k
    omega^e'_k = omega^e_k - 2 x_k
    eta'_kj    = -(J_k / omega_f_k) eta_kj

For uniform parameters the first line is ``omega - f - 2x`` in the bulk and
``omega - f - x`` at the two ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .topology import NetworkGraph

__all__ = [
    "CavityChainParams",
    "EffectiveChainParams",
    "RegimeError",
    "effective_parameters",
    "to_network",
    "params_from_json",
    "effective_to_json",
]

STRONG_COUPLING_RATIO = 100.0
SITE_INDEXING_NOTE = ("site shift sums J_l^2/omega_f_l over the links adjoining the site; "
                      "equals the single-index expression for uniform links")


class RegimeError(ValueError):
    pass


def _arr(x, size: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = np.full(size, float(a))
    if a.shape != (size,):
        raise ValueError(f"{name}: expected {size} values, got {a.shape[0]}")
    return a


@dataclass
class CavityChainParams:
    n: int
    omega_c: np.ndarray
    omega_a: np.ndarray
    f: np.ndarray
    J_fiber: np.ndarray
    omega_f: np.ndarray
    kappa_a: float = 0.0
    kappa_c: float = 0.0
    omega_e: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a cavity chain needs at least two sites")
        self.omega_c = _arr(self.omega_c, self.n, "omega_c")
        self.omega_a = _arr(self.omega_a, self.n, "omega_a")
        self.f = _arr(self.f, self.n, "f")
        self.J_fiber = _arr(self.J_fiber, self.n - 1, "J_fiber")
        self.omega_f = _arr(self.omega_f, self.n - 1, "omega_f")
        if self.omega_e is not None:
            self.omega_e = _arr(self.omega_e, self.n - 1, "omega_e")
        if np.any(self.omega_f == 0):
            raise ValueError("fiber frequencies must be nonzero")


@dataclass
class EffectiveChainParams:
    omega_prime: np.ndarray
    J_prime: np.ndarray
    eta_scale: np.ndarray
    omega_e_prime: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.omega_prime.size


def _regime_warnings(p: CavityChainParams, ratio: float) -> list[str]:
    out = []
    if not np.allclose(p.omega_c, p.omega_a, rtol=0.0, atol=1e-12 * max(1.0, np.abs(p.omega_c).max())):
        out.append("cavity and atom frequencies are not resonant")
    kappa = max(p.kappa_a, p.kappa_c)
    if kappa > 0 and np.min(np.abs(p.f)) < ratio * kappa:
        out.append(f"strong coupling violated: min f / kappa = {np.min(np.abs(p.f)) / kappa:.3g}"
                   f" < {ratio:g}")
    return out


def effective_parameters(p: CavityChainParams, *, ratio: float = STRONG_COUPLING_RATIO,
                         strict: bool = False) -> EffectiveChainParams:
    """Chain parameters after eliminating the fiber modes.

    Regime problems (non-resonant atom and cavity, ``f < ratio * kappa``)
    are listed in ``warnings``; with ``strict=True`` they raise
    :class:`RegimeError` instead.
    """
    warns = _regime_warnings(p, ratio)
    if strict and warns:
        raise RegimeError("; ".join(warns))
    x = p.J_fiber ** 2 / p.omega_f
    shift = np.zeros(p.n)
    shift[:-1] += x
    shift[1:] += x
    omega_prime = p.omega_c - p.f - shift
    omega_e_prime = None if p.omega_e is None else p.omega_e - 2.0 * x
    return EffectiveChainParams(omega_prime, -x, p.J_fiber / p.omega_f, omega_e_prime, warns)


def to_network(eff: EffectiveChainParams, gamma) -> NetworkGraph:
    """Open chain with the effective energies and couplings and the given
    per-link decay rates."""
    n = eff.n
    gam = _arr(gamma, n - 1, "gamma")
    if np.any(gam <= 0):
        raise ValueError("decay rates must be positive")
    edges = tuple((k, k + 1) for k in range(1, n))
    return NetworkGraph(n, edges, tuple(eff.J_prime), tuple(gam), tuple(eff.omega_prime))


def params_from_json(obj: dict) -> CavityChainParams:
    n = int(obj["n"])
    omega = obj.get("omega")
    return CavityChainParams(
        n=n,
        omega_c=obj.get("omega_c", omega),
        omega_a=obj.get("omega_a", omega),
        f=obj["f"],
        J_fiber=obj["J_fiber"],
        omega_f=obj["omega_f"],
        kappa_a=float(obj.get("kappa_a", 0.0)),
        kappa_c=float(obj.get("kappa_c", 0.0)),
        omega_e=obj.get("omega_e"),
    )


def effective_to_json(eff: EffectiveChainParams) -> dict:
    return {
        "omega_prime": eff.omega_prime.tolist(),
        "J_prime": eff.J_prime.tolist(),
        "eta_scale": eff.eta_scale.tolist(),
        "omega_e_prime": None if eff.omega_e_prime is None else eff.omega_e_prime.tolist(),
        "warnings": list(eff.warnings),
        "site_indexing": SITE_INDEXING_NOTE,
    }
