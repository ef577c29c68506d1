"""Model potentials with closed-form (or bisection-computable) bound spectra.

Atomic units throughout: hbar = m = 1. One-dimensional wells are centred at
``center`` inside the box; the Coulomb potential is radial with the
centrifugal term folded in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import InvalidArgument, NoSuchBoundState


class Potential:
    """Base class: a callable ``V(r)`` plus its analytic bound spectrum."""

    kind = "abstract"

    def __call__(self, r):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Coordinates where ``V`` is not smooth."""
        return ()

    def bound_energy(self, n: int) -> float:
        raise NoSuchBoundState(f"{self.kind} has no closed-form bound state {n}")

    @property
    def n_bound(self) -> float:
        """Number of bound states, ``math.inf`` when unbounded."""
        return 0


def _check_index(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise InvalidArgument(f"quantum number must be a nonnegative integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class FreeParticle(Potential):
    kind = "free"

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class HarmonicOscillator(Potential):
    omega: float
    center: float = 0.0
    kind = "harmonic"

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidArgument(f"omega must be positive, got {self.omega!r}")

    def __call__(self, r):
        x = np.asarray(r, dtype=float) - self.center
        return 0.5 * self.omega**2 * x * x

    def bound_energy(self, n):
        n = _check_index(n)
        return self.omega * (n + 0.5)

    @property
    def n_bound(self):
        return math.inf


@dataclass(frozen=True)
class CoulombRadial(Potential):
    """``-Z/r + l(l+1)/(2 r^2)``; ``soft_core > 0`` replaces ``1/r`` by ``1/sqrt(r^2 + a^2)``."""

    z: float
    ell: int = 0
    soft_core: float = 0.0
    kind = "hydrogen"

    def __post_init__(self):
        if not self.z > 0:
            raise InvalidArgument(f"Z must be positive, got {self.z!r}")
        if isinstance(self.ell, bool) or int(self.ell) != self.ell or self.ell < 0:
            raise InvalidArgument(f"ell must be a nonnegative integer, got {self.ell!r}")
        if not self.soft_core >= 0:
            raise InvalidArgument("soft_core must be nonnegative")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.soft_core:
                coul = -self.z / np.sqrt(r * r + self.soft_core**2)
            else:
                coul = -self.z / r
            if self.ell:
                coul = coul + 0.5 * self.ell * (self.ell + 1) / (r * r)
        return coul

    def bound_energy(self, n):
        """Bohr level for principal quantum number ``n >= ell + 1``."""
        n = _check_index(n)
        if self.soft_core:
            raise NoSuchBoundState("soft-core Coulomb has no closed-form spectrum")
        if n < self.ell + 1:
            raise NoSuchBoundState(f"principal quantum number {n} < ell + 1 = {self.ell + 1}")
        return -self.z**2 / (2.0 * n * n)

    @property
    def n_bound(self):
        return math.inf


@dataclass(frozen=True)
class PoschlTeller(Potential):
    """``-lam (lam - 1) a^2 / (2 cosh^2(a (r - center)))``."""

    lam: float
    a: float = 1.0
    center: float = 0.0
    kind = "poschl_teller"

    def __post_init__(self):
        if not self.lam > 1:
            raise InvalidArgument(f"lambda must exceed 1, got {self.lam!r}")
        if not self.a > 0:
            raise InvalidArgument(f"a must be positive, got {self.a!r}")

    def __call__(self, r):
        x = self.a * (np.asarray(r, dtype=float) - self.center)
        return -0.5 * self.lam * (self.lam - 1.0) * self.a**2 / np.cosh(x) ** 2

    @property
    def n_bound(self):
        return math.ceil(self.lam - 1.0)

    def bound_energy(self, n):
        n = _check_index(n)
        if not n < self.lam - 1:
            raise NoSuchBoundState(f"Poschl-Teller lambda={self.lam} has no level n={n}")
        return -0.5 * self.a**2 * (self.lam - 1.0 - n) ** 2


@dataclass(frozen=True)
class SquareWell(Potential):
    """Finite well of depth ``v0`` on ``|r - center| < width / 2``, zero outside."""

    v0: float
    width: float
    center: float = 0.0
    kind = "square_well"

    def __post_init__(self):
        if not self.v0 > 0:
            raise InvalidArgument(f"V0 must be positive, got {self.v0!r}")
        if not self.width > 0:
            raise InvalidArgument(f"width must be positive, got {self.width!r}")

    def __call__(self, r):
        x = np.abs(np.asarray(r, dtype=float) - self.center)
        return np.where(x < 0.5 * self.width, -self.v0, 0.0)

    def breakpoints(self):
        h = 0.5 * self.width
        return (self.center - h, self.center + h)

    @property
    def _z0(self):
        return 0.5 * self.width * math.sqrt(2.0 * self.v0)

    @property
    def n_bound(self):
        return math.ceil(2.0 * self._z0 / math.pi)

    def bound_energy(self, n):
        n = _check_index(n)
        if n >= self.n_bound:
            raise NoSuchBoundState(f"square well holds {self.n_bound} states, asked for n={n}")
        z0 = self._z0

        # matching conditions z tan z = kappa w/2 (even), -z cot z = kappa w/2 (odd),
        # multiplied through to stay finite
        def outside(z):
            return math.sqrt(max(z0 * z0 - z * z, 0.0))

        if n % 2 == 0:
            def f(z):
                return z * math.sin(z) - outside(z) * math.cos(z)
        else:
            def f(z):
                return -z * math.cos(z) - outside(z) * math.sin(z)

        lo = n * math.pi / 2
        hi = min((n + 1) * math.pi / 2, z0)
        z = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        return 2.0 * z * z / self.width**2 - self.v0
