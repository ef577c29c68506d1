"""Orthonormal sine bases on a box, the coordinate map and Gauss-Legendre quadrature.

The basis functions live on the mapped coordinate ``u`` in ``(0, L)``::

    phi_k(u) = sqrt(2/L) sin(k pi u / L),   k = 1..N

For a mapped basis the physical coordinate is ``r = r(u)`` and the functions
used in operator assembly are ``chi_k(r) = phi_k(u) / sqrt(J(u))`` with
``J = dr/du``, which keeps them orthonormal in ``r`` without a metric.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, InvalidArgument

DEFAULT_OVERSAMPLING = 6
MIN_NODES = 32


class BasisKind(str, enum.Enum):
    SINE_BOX = "sine_box"
    MAPPED_SINE = "mapped_sine"


class MapKind(str, enum.Enum):
    IDENTITY = "identity"
    RATIONAL = "rational"


@dataclass(frozen=True)
class CoordinateMap:
    """Strictly increasing map ``u -> r`` of ``(0, L)`` onto itself.

    The rational family ``r(u) = (1 + g) u / (1 + g u / L)`` fixes both
    endpoints; ``g = 0`` is the identity.
    """

    kind: MapKind
    box_length: float
    strength: float = 0.0

    def _s(self, u):
        return 1.0 + self.strength * np.asarray(u, dtype=float) / self.box_length

    def forward(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind is MapKind.IDENTITY or self.strength == 0.0:
            return u.copy() if u.ndim else float(u)
        return (1.0 + self.strength) * u / self._s(u)

    def inverse(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is MapKind.IDENTITY or self.strength == 0.0:
            return r.copy() if r.ndim else float(r)
        g, L = self.strength, self.box_length
        return r / (1.0 + g - g * r / L)

    def jacobian(self, u):
        """dr/du."""
        u = np.asarray(u, dtype=float)
        if self.kind is MapKind.IDENTITY or self.strength == 0.0:
            return np.ones_like(u) if u.ndim else 1.0
        return (1.0 + self.strength) / self._s(u) ** 2

    def jacobian_d1(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind is MapKind.IDENTITY or self.strength == 0.0:
            return np.zeros_like(u) if u.ndim else 0.0
        g, L = self.strength, self.box_length
        return -2.0 * g * (1.0 + g) / (L * self._s(u) ** 3)

    def jacobian_d2(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind is MapKind.IDENTITY or self.strength == 0.0:
            return np.zeros_like(u) if u.ndim else 0.0
        g, L = self.strength, self.box_length
        return 6.0 * g * g * (1.0 + g) / (L * L * self._s(u) ** 4)


def build_coordinate_map(kind, box_length: float, map_strength: float = 0.0) -> CoordinateMap:
    kind = MapKind(kind)
    if not box_length > 0:
        raise InvalidArgument(f"box_length must be positive, got {box_length!r}")
    if not map_strength >= 0:
        raise InvalidArgument(f"map_strength must be nonnegative, got {map_strength!r}")
    if kind is MapKind.IDENTITY and map_strength != 0:
        raise InvalidArgument("identity map takes no strength")
    return CoordinateMap(kind, float(box_length), float(map_strength))


@dataclass(frozen=True)
class BasisSpec:
    kind: BasisKind
    n_basis: int
    box_length: float
    map_strength: float = 0.0

    def __post_init__(self):
        if isinstance(self.n_basis, bool) or int(self.n_basis) != self.n_basis or self.n_basis < 1:
            raise InvalidArgument(f"n_basis must be a positive integer, got {self.n_basis!r}")
        if not self.box_length > 0 or not np.isfinite(self.box_length):
            raise InvalidArgument(f"box_length must be positive, got {self.box_length!r}")
        if not self.map_strength >= 0:
            raise InvalidArgument(f"map_strength must be nonnegative, got {self.map_strength!r}")
        if self.kind is BasisKind.SINE_BOX and self.map_strength != 0:
            raise InvalidArgument("a SineBox basis has no coordinate map")

    @property
    def coordinate_map(self) -> CoordinateMap:
        if self.kind is BasisKind.SINE_BOX:
            return CoordinateMap(MapKind.IDENTITY, self.box_length)
        return CoordinateMap(MapKind.RATIONAL, self.box_length, self.map_strength)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.n_basis + 1) * np.pi / self.box_length

    def with_size(self, n_basis: int) -> "BasisSpec":
        return BasisSpec(self.kind, n_basis, self.box_length, self.map_strength)


def build_sine_basis(n_basis: int, box_length: float) -> BasisSpec:
    return BasisSpec(BasisKind.SINE_BOX, n_basis, float(box_length))


def build_mapped_basis(n_basis: int, box_length: float, map_strength: float) -> BasisSpec:
    return BasisSpec(BasisKind.MAPPED_SINE, n_basis, float(box_length), float(map_strength))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    box_length: float

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def quadrature_rule(spec: BasisSpec, oversampling: int = DEFAULT_OVERSAMPLING,
                    breakpoints=()) -> QuadratureRule:
    """Gauss-Legendre rule with ``oversampling * n_basis`` nodes on ``(0, L)``.

    At least ``MIN_NODES`` nodes are used: products of the lowest sines need
    about twenty to integrate to 1e-10, whatever ``n_basis`` is.

    Optional ``breakpoints`` (in ``u``) split the interval into panels, each
    carrying its own Gauss-Legendre rule; use them where the integrand has a
    kink or jump, e.g. at the walls of a square well.
    """
    if isinstance(oversampling, bool) or int(oversampling) != oversampling or oversampling < 2:
        raise InvalidArgument(f"oversampling must be an integer >= 2, got {oversampling!r}")
    L = spec.box_length
    total = max(int(oversampling) * spec.n_basis, MIN_NODES)
    cuts = sorted({float(b) for b in breakpoints if 0.0 < b < L})
    edges = [0.0, *cuts, L]
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = total if len(edges) == 2 else max(int(oversampling), int(np.ceil(total * (b - a) / L)))
        x, w = np.polynomial.legendre.leggauss(m)
        nodes.append(0.5 * (b - a) * (x + 1.0) + a)
        weights.append(0.5 * (b - a) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    if not (np.all(np.diff(nodes) > 0) and nodes[0] > 0 and nodes[-1] < L):
        raise InvalidArgument("quadrature nodes are not strictly interior and increasing")
    return QuadratureRule(nodes, weights, L)


def _check_index(spec: BasisSpec, k: int):
    if not 1 <= k <= spec.n_basis:
        raise IndexOutOfRange(f"basis index {k} outside 1..{spec.n_basis}")


def _check_coordinate(spec: BasisSpec, u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(u > spec.box_length):
        raise InvalidArgument(f"coordinate outside [0, {spec.box_length}]")
    return u


def _sine_table(spec: BasisSpec, u: np.ndarray, ks: np.ndarray, deriv: int) -> np.ndarray:
    L = spec.box_length
    q = ks * np.pi / L
    arg = np.multiply.outer(u, q)
    norm = np.sqrt(2.0 / L)
    if deriv == 0:
        out = norm * np.sin(arg)
        # sin(k pi) is not exactly zero in floating point
        out[(u == 0) | (u == L)] = 0.0
    elif deriv == 1:
        out = norm * q * np.cos(arg)
    else:
        out = -norm * q * q * np.sin(arg)
        out[(u == 0) | (u == L)] = 0.0
    return out


def eval_basis(spec: BasisSpec, k: int, u):
    """Value of ``phi_k`` at ``u`` (scalar or array)."""
    _check_index(spec, k)
    u = _check_coordinate(spec, u)
    out = _sine_table(spec, np.atleast_1d(u), np.array([k]), 0)[:, 0]
    return out.reshape(u.shape) if u.ndim else float(out[0])


def eval_basis_d1(spec: BasisSpec, k: int, u):
    _check_index(spec, k)
    u = _check_coordinate(spec, u)
    out = _sine_table(spec, np.atleast_1d(u), np.array([k]), 1)[:, 0]
    return out.reshape(u.shape) if u.ndim else float(out[0])


def eval_basis_d2(spec: BasisSpec, k: int, u):
    _check_index(spec, k)
    u = _check_coordinate(spec, u)
    out = _sine_table(spec, np.atleast_1d(u), np.array([k]), 2)[:, 0]
    return out.reshape(u.shape) if u.ndim else float(out[0])


def basis_table(spec: BasisSpec, u, deriv: int = 0) -> np.ndarray:
    """All ``N`` sine functions (or a derivative) at points ``u``; shape ``(len(u), N)``."""
    u = _check_coordinate(spec, np.atleast_1d(u))
    return _sine_table(spec, u, np.arange(1, spec.n_basis + 1), deriv)


@dataclass(frozen=True)
class RadialTable:
    """Physical-coordinate basis functions tabulated on quadrature nodes.

    ``value``, ``d1`` and ``d2`` have shape ``(Q, N)`` and hold ``chi_k`` and
    its first two derivatives with respect to ``r``. ``weights`` integrate in
    ``r`` (they already include the Jacobian).
    """

    r: np.ndarray
    weights: np.ndarray
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def radial_table(spec: BasisSpec, quad: QuadratureRule) -> RadialTable:
    if quad.box_length != spec.box_length:
        raise DimensionMismatch(
            f"quadrature built for L={quad.box_length}, basis has L={spec.box_length}")
    u = quad.nodes
    phi = basis_table(spec, u, 0)
    dphi = basis_table(spec, u, 1)
    d2phi = basis_table(spec, u, 2)
    cmap = spec.coordinate_map
    if cmap.kind is MapKind.IDENTITY or cmap.strength == 0.0:
        return RadialTable(u.copy(), quad.weights.copy(), phi, dphi, d2phi)

    J = cmap.jacobian(u)[:, None]
    J1 = cmap.jacobian_d1(u)[:, None]
    J2 = cmap.jacobian_d2(u)[:, None]
    # g = phi J^{-1/2}; chi(r(u)) = g(u)
    g = phi / np.sqrt(J)
    g1 = dphi / np.sqrt(J) - 0.5 * phi * J1 / J**1.5
    g2 = (d2phi / np.sqrt(J) - dphi * J1 / J**1.5
          + 0.75 * phi * J1**2 / J**2.5 - 0.5 * phi * J2 / J**1.5)
    chi1 = g1 / J
    chi2 = g2 / J**2 - g1 * J1 / J**3
    return RadialTable(cmap.forward(u), quad.weights * J[:, 0], g, chi1, chi2)
