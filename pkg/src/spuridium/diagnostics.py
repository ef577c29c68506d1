"""Squared-operator test, track classification, forbidden-region weight and the TRK sum."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .basis import BasisSpec, QuadratureRule, radial_table
from .eigensolve import EigenDecomposition, RitzPair
from .errors import DimensionMismatch, InvalidArgument, NotApplicable
from .hamiltonians import DiracParams, OperatorPair
from .potentials import Potential

TOL_BOUND = 1e-6
PLATEAU_FACTOR = 2.0
ZERO_FLOOR = 1e-16
DECREASE_RATIO = 0.9
ISOLATION_FACTOR = 10.0
TREND_WINDOW = 3


class Verdict(str, enum.Enum):
    GENUINE_BOUND = "GenuineBound"
    SPURIOUS = "Spurious"
    CONTINUUM_LIKE = "ContinuumLike"
    UNDECIDED = "Undecided"


class Trend(str, enum.Enum):
    DECREASING = "Decreasing"
    PLATEAU = "Plateau"
    INCREASING = "Increasing"


@dataclass(frozen=True)
class DeltaRecord:
    track_id: int
    iteration: int
    value: float
    delta: float
    delta_rel: float

    @classmethod
    def from_delta(cls, track_id, iteration, value, delta):
        delta = max(float(delta), 0.0)
        value = float(value)
        return cls(track_id, iteration, value, delta, delta / (1.0 + value * value))


@dataclass(frozen=True)
class Classification:
    track_id: int
    verdict: Verdict
    final_delta_rel: float
    trend: Trend


def delta_diagnostic(pair: RitzPair, ops: OperatorPair) -> DeltaRecord:
    """``|e^2 - <v|H^2|v>|`` for a unit vector ``v`` with ``e = <v|H|v>``.

    Evaluated as ``|Q H v|^2 + |(h - e) v|^2``, which is the same quantity
    split into out-of-span leakage and in-span residual, both computed
    directly. Falls back to the literal difference when the pair carries no
    leakage factor.
    """
    return delta_records([pair], ops)[0]


def delta_records(pairs: Sequence[RitzPair], ops: OperatorPair) -> list[DeltaRecord]:
    """Vectorized :func:`delta_diagnostic` over many pairs."""
    if not pairs:
        return []
    V = np.column_stack([p.vector for p in pairs])
    if V.shape[0] != ops.dim:
        raise DimensionMismatch(f"vector length {V.shape[0]} != operator dimension {ops.dim}")
    hv = ops.h @ V
    e = np.einsum("ij,ij->j", V, hv)
    if ops.leakage is not None:
        resid = hv - V * e
        delta = np.sum((ops.leakage @ V) ** 2, axis=0) + np.sum(resid**2, axis=0)
    else:
        delta = e * e - np.einsum("ij,ij->j", V, ops.h2 @ V)
        delta = np.abs(delta)
    return [DeltaRecord.from_delta(p.track_id, p.iteration, e[k], delta[k])
            for k, p in enumerate(pairs)]


def trend_of(delta_rels: Sequence[float], plateau_factor: float = PLATEAU_FACTOR,
             zero_floor: float = ZERO_FLOOR) -> Trend:
    """Trend over the last three values.

    Values at or below ``zero_floor`` count as exactly zero, so a series that
    has reached the roundoff floor reads as converged rather than noisy.
    """
    d = [0.0 if x <= zero_floor else float(x) for x in delta_rels[-TREND_WINDOW:]]
    if len(d) < 2:
        return Trend.PLATEAU
    if all(b <= DECREASE_RATIO * a for a, b in zip(d[:-1], d[1:])):
        return Trend.DECREASING
    lo, hi = min(d), max(d)
    if lo > 0 and hi <= plateau_factor * lo:
        return Trend.PLATEAU
    return Trend.INCREASING


def classify(series: Mapping[int, Sequence[DeltaRecord]], tol_bound: float = TOL_BOUND,
             plateau_factor: float = PLATEAU_FACTOR,
             zero_floor: float = ZERO_FLOOR) -> dict[int, Classification]:
    """Verdict per track from its squared-operator history.

    A track is isolated when every energy neighbour alive at the last
    iteration has a final ``delta_rel`` at least ten times smaller.
    """
    if not tol_bound > 0 or not plateau_factor > 0 or not zero_floor >= 0:
        raise InvalidArgument("tolerances must be positive")
    ordered = {tid: sorted(recs, key=lambda r: r.iteration) for tid, recs in series.items() if recs}
    if not ordered:
        return {}
    last_iter = max(recs[-1].iteration for recs in ordered.values())
    alive = sorted((recs[-1].value, tid) for tid, recs in ordered.items()
                   if recs[-1].iteration == last_iter)
    neighbours: dict[int, list[int]] = {}
    for k, (_, tid) in enumerate(alive):
        neighbours[tid] = [alive[j][1] for j in (k - 1, k + 1) if 0 <= j < len(alive)]

    out = {}
    for tid, recs in ordered.items():
        rels = [r.delta_rel for r in recs]
        final = rels[-1]
        trend = trend_of(rels, plateau_factor, zero_floor)
        nb = neighbours.get(tid, [])
        isolated = bool(nb) and all(
            ISOLATION_FACTOR * ordered[j][-1].delta_rel <= final for j in nb)
        if len(recs) < TREND_WINDOW:
            verdict = Verdict.UNDECIDED
        elif trend is Trend.DECREASING and final < tol_bound:
            verdict = Verdict.GENUINE_BOUND
        elif trend is not Trend.DECREASING and final >= tol_bound and isolated:
            verdict = Verdict.SPURIOUS
        elif trend is Trend.PLATEAU and final >= tol_bound:
            verdict = Verdict.CONTINUUM_LIKE
        else:
            verdict = Verdict.UNDECIDED
        out[tid] = Classification(tid, verdict, final, trend)
    return out


def reconstruct(vector: np.ndarray, basis: BasisSpec, quad: QuadratureRule):
    """Position-space wavefunction on the quadrature nodes: ``(r, psi, weights)``."""
    if len(vector) != basis.n_basis:
        raise NotApplicable(
            f"vector has {len(vector)} components for {basis.n_basis} basis functions")
    tab = radial_table(basis, quad)
    return tab.r, tab.value @ vector, tab.weights


def _turning_points(potential: Potential, energy: float, basis: BasisSpec,
                    quad: QuadratureRule) -> list[float]:
    """Points in ``u`` where ``V(r(u)) - energy`` changes sign, plus the potential's kinks."""
    cmap = basis.coordinate_map
    L = basis.box_length
    r = cmap.forward(np.asarray(quad.nodes))
    f = np.asarray(potential(r), dtype=float) - energy
    pts = []
    for k in np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:])):
        root = brentq(lambda x: float(potential(x)) - energy, r[k], r[k + 1], xtol=1e-14)
        pts.append(float(cmap.inverse(root)))
    pts.extend(float(cmap.inverse(b)) for b in potential.breakpoints() if 0 < b < L)
    return sorted(p for p in pts if 0 < p < L)


def _interval_overlap(basis: BasisSpec, a: float, b: float) -> np.ndarray:
    """``S[i, j] = int_a^b phi_i phi_j du`` in closed form."""
    N, L = basis.n_basis, basis.box_length
    m = np.arange(2 * N + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = L / (m * np.pi) * (np.sin(m * np.pi * b / L) - np.sin(m * np.pi * a / L))
    F[0] = b - a
    k = np.arange(1, N + 1)
    return (F[np.abs(k[:, None] - k[None, :])] - F[k[:, None] + k[None, :]]) / L


def forbidden_fraction(pair: RitzPair, potential, basis: BasisSpec, quad: QuadratureRule) -> float:
    """Share of ``|psi|^2`` lying where ``V(r)`` exceeds the state's energy.

    The region is cut at the classical turning points (located by root
    bracketing on the quadrature nodes) and each piece is integrated exactly:
    ``|chi|^2 dr = |phi|^2 du`` so sub-interval overlaps of sines suffice,
    mapped or not.
    """
    if isinstance(potential, DiracParams) or len(pair.vector) != basis.n_basis:
        raise NotApplicable("forbidden-region weight is only defined for Schrodinger pairs")
    c = np.asarray(pair.vector, dtype=float)
    total = float(c @ c)
    if not total > 0:
        return 0.0
    energy = pair.value
    cmap = basis.coordinate_map
    edges = [0.0, *_turning_points(potential, energy, basis, quad), basis.box_length]
    weight = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mid = float(cmap.forward(0.5 * (a + b)))
        if float(potential(mid)) > energy:
            weight += float(c @ _interval_overlap(basis, a, b) @ c)
    return float(np.clip(weight / total, 0.0, 1.0))


def position_matrix(basis: BasisSpec, quad: QuadratureRule) -> np.ndarray:
    tab = radial_table(basis, quad)
    a = tab.value * np.sqrt(tab.weights)[:, None]
    x = (a * tab.r[:, None]).T @ a
    return 0.5 * (x + x.T)


def trk_sum_rule(decomp: EigenDecomposition, basis: BasisSpec, quad: QuadratureRule,
                 ground_index: int = 0) -> float:
    """Thomas-Reiche-Kuhn sum ``sum_k (E_k - E_0) |<k|x|0>|^2`` (1/2 when complete)."""
    if decomp.vectors.shape[0] != basis.n_basis:
        raise NotApplicable("the TRK sum needs a one-component Schrodinger decomposition")
    if not 0 <= ground_index < len(decomp):
        raise InvalidArgument(f"ground_index {ground_index} out of range")
    X = position_matrix(basis, quad)
    vecs = decomp.vectors
    x0 = vecs.T @ (X @ vecs[:, ground_index])
    gaps = decomp.values - decomp.values[ground_index]
    return float(np.sum(gaps * x0 * x0))
