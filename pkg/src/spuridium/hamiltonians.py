"""Assembly of the projected operator and the projected square.

Both matrices come from one set of pointwise images ``H chi_j`` tabulated on
the quadrature nodes::

    h[i, j]  = <chi_i | H chi_j>
    h2[i, j] = <H chi_i | H chi_j>

so that ``h2 - h @ h`` is the Gram matrix of the part of ``H chi_j`` that
falls outside the basis span. That leakage factor is kept on the
:class:`OperatorPair` so the squared-operator test can be evaluated without
the cancellation in ``e**2 - v @ h2 @ v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, MapKind, QuadratureRule, radial_table
from .errors import DimensionMismatch, InvalidArgument, NoSuchBoundState, SingularPotential, SupercriticalCoupling
from .potentials import Potential

SPEED_OF_LIGHT = 137.035999


@dataclass(frozen=True)
class DiracParams:
    z: float
    kappa: int
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.z > 0:
            raise InvalidArgument(f"Z must be positive, got {self.z!r}")
        if not self.c > 0:
            raise InvalidArgument(f"c must be positive, got {self.c!r}")
        if isinstance(self.kappa, bool) or int(self.kappa) != self.kappa or self.kappa == 0:
            raise InvalidArgument(f"kappa must be a nonzero integer, got {self.kappa!r}")
        if not self.z / self.c < abs(self.kappa):
            raise SupercriticalCoupling(
                f"Z/c = {self.z / self.c:.6g} is not below |kappa| = {abs(self.kappa)}")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.kappa**2 - (self.z / self.c) ** 2)


@dataclass(frozen=True)
class OperatorPair:
    h: np.ndarray
    h2: np.ndarray
    basis: BasisSpec
    problem_tag: str
    leakage: np.ndarray | None = None
    components: int = 1

    def __post_init__(self):
        m = self.h.shape[0]
        if self.h.shape != (m, m) or self.h2.shape != (m, m):
            raise DimensionMismatch(f"h {self.h.shape} and h2 {self.h2.shape} must be equal and square")
        if m != self.components * self.basis.n_basis:
            raise DimensionMismatch(
                f"dimension {m} != {self.components} x {self.basis.n_basis} basis functions")
        if self.leakage is not None and self.leakage.shape[1] != m:
            raise DimensionMismatch("leakage factor has the wrong number of columns")
        for arr in (self.h, self.h2, self.leakage):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def norm(self) -> float:
        """Spectral norm of ``h``."""
        return float(np.linalg.norm(self.h, 2))

    def leakage_matrix(self) -> np.ndarray:
        """``h2 - h @ h``, positive semidefinite up to quadrature error."""
        return self.h2 - self.h @ self.h

    def min_leakage_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.leakage_matrix())[0])

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.h @ v


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _finite_or_raise(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(values))
        raise SingularPotential(f"{what} is not finite at {len(bad)} quadrature node(s)")


def _finish(A: np.ndarray, B: np.ndarray, h: np.ndarray | None, basis, tag, components):
    """Build the pair from weighted basis values ``A`` and weighted images ``B``."""
    if h is None:
        h = A.T @ B
    h = _symmetrize(h)
    h2 = _symmetrize(B.T @ B)
    leak = B - A @ h
    return OperatorPair(h, h2, basis, tag, leak, components)


def assemble_schrodinger(potential: Potential, basis: BasisSpec, quad: QuadratureRule,
                         tag: str | None = None) -> OperatorPair:
    """Project ``-1/2 d^2/dr^2 + V`` and its square onto the basis."""
    tab = radial_table(basis, quad)
    V = np.asarray(potential(tab.r), dtype=float)
    _finite_or_raise(V, f"potential {potential.kind}")
    sw = np.sqrt(tab.weights)[:, None]
    A = sw * tab.value
    B = sw * (-0.5 * tab.d2 + V[:, None] * tab.value)
    h = None
    if basis.coordinate_map.kind is MapKind.IDENTITY:
        # sine functions diagonalize the kinetic term exactly
        h = np.diag(0.5 * basis.wavenumbers**2) + (A * V[:, None]).T @ A
    return _finish(A, B, h, basis, tag or potential.kind, 1)


def assemble_dirac(params: DiracParams, basis: BasisSpec, quad: QuadratureRule,
                   tag: str | None = None) -> OperatorPair:
    """Radial Dirac-Coulomb operator in a two-component sine basis.

    Unknowns are ordered ``(P_1..P_N, Q_1..Q_N)``; large and small components
    share the same ``N`` functions and no kinetic balance is imposed::

        [ V + c^2            c(-d/dr + kappa/r) ]
        [ c(d/dr + kappa/r)  V - c^2            ]
    """
    tab = radial_table(basis, quad)
    r = tab.r
    with np.errstate(divide="ignore"):
        V = -params.z / r
        kr = params.kappa / r
    _finite_or_raise(V, "Coulomb potential")
    c = params.c
    chi, dchi = tab.value, tab.d1
    sw = np.sqrt(tab.weights)[:, None]
    Q, N = chi.shape

    upper_large = (V + c * c)[:, None] * chi
    lower_large = c * (dchi + kr[:, None] * chi)
    upper_small = c * (-dchi + kr[:, None] * chi)
    lower_small = (V - c * c)[:, None] * chi
    B = np.block([[upper_large, upper_small], [lower_large, lower_small]]) * np.vstack([sw, sw])
    A = np.zeros((2 * Q, 2 * N))
    A[:Q, :N] = sw * chi
    A[Q:, N:] = sw * chi
    return _finish(A, B, None, basis, tag or f"dirac_coulomb(kappa={params.kappa})", 2)


def schrodinger_energy_oracle(potential: Potential, n: int) -> float:
    """Analytic bound level ``n`` (principal quantum number for Coulomb, 0-based otherwise)."""
    return potential.bound_energy(n)


def dirac_energy_oracle(params: DiracParams, n_r: int) -> float:
    """Sommerfeld fine-structure energy, rest mass included."""
    return params.c**2 + dirac_binding_energy(params, n_r)


def dirac_binding_energy(params: DiracParams, n_r: int) -> float:
    """Sommerfeld energy minus ``c^2``, evaluated without cancellation."""
    if isinstance(n_r, bool) or int(n_r) != n_r or n_r < 0:
        raise InvalidArgument(f"n_r must be a nonnegative integer, got {n_r!r}")
    if n_r == 0 and params.kappa > 0:
        raise NoSuchBoundState("n_r = 0 does not exist for kappa > 0")
    za = params.z / params.c
    x = (za / (n_r + params.gamma)) ** 2
    s = math.sqrt(1.0 + x)
    return -params.c**2 * x / (s * (1.0 + s))
