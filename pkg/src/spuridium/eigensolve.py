"""Dense symmetric eigensolver, Lanczos with full reorthogonalization, and
eigenvalue tracking across basis sizes or Lanczos iterations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidArgument, NoConvergence, NotSymmetric

BREAKDOWN_TOL = 1e-13


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class RitzPair:
    value: float
    vector: np.ndarray = field(repr=False)
    iteration: int
    track_id: int = -1


def eigh_dense(matrix, sym_tol: float = 1e-10) -> EigenDecomposition:
    """Full spectrum of a real symmetric matrix, ascending.

    Delegates to LAPACK (Householder tridiagonalization followed by an
    implicitly shifted tridiagonal solve).
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > sym_tol * scale:
        raise NotSymmetric(f"matrix asymmetry {np.max(np.abs(a - a.T)):.3e} exceeds {sym_tol:g}")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(w, v)


def eigenpairs(decomp: EigenDecomposition, iteration: int) -> list[RitzPair]:
    return [RitzPair(float(decomp.values[k]), decomp.vectors[:, k], iteration)
            for k in range(len(decomp))]


def _as_apply(op) -> Callable[[np.ndarray], np.ndarray]:
    if callable(op):
        return op
    mat = np.asarray(op, dtype=float)
    return lambda v: mat @ v


def probe_symmetry(apply, dim: int, n_probes: int = 3, seed: int = 0, tol: float = 1e-10) -> bool:
    """Check ``<u, A v> == <A u, v>`` on random probes, relative to ``|A|`` scale."""
    apply = _as_apply(apply)
    rng = np.random.default_rng(seed)
    for _ in range(n_probes):
        u = rng.standard_normal(dim)
        v = rng.standard_normal(dim)
        au, av = apply(u), apply(v)
        scale = 1.0 + np.linalg.norm(au) * np.linalg.norm(v)
        if abs(u @ av - au @ v) > tol * scale:
            return False
    return True


@dataclass
class LanczosState:
    """Tridiagonal coefficients and Krylov basis after ``iteration`` steps.

    ``krylov`` has one more column than ``alpha`` until the run terminates;
    the extra column is the next Lanczos vector.
    """

    alpha: list[float]
    beta: list[float]
    krylov: np.ndarray
    iteration: int = 0
    breakdown: bool = False
    scale: float = 0.0

    @property
    def krylov_vectors(self) -> np.ndarray:
        return self.krylov[:, : self.iteration]

    @property
    def dim(self) -> int:
        return self.krylov.shape[0]

    def tridiagonal(self) -> np.ndarray:
        l = self.iteration
        return np.diag(self.alpha) + np.diag(self.beta[: l - 1], 1) + np.diag(self.beta[: l - 1], -1)


def start_vector(dim: int, kind: str = "ones", seed: int | None = None) -> np.ndarray:
    if kind == "ones":
        v = np.ones(dim)
    elif kind == "random":
        if seed is None:
            raise InvalidArgument("a random start vector needs a seed")
        v = np.random.default_rng(seed).standard_normal(dim)
    else:
        raise InvalidArgument(f"unknown start vector kind {kind!r}")
    return v / np.linalg.norm(v)


def lanczos_start(start: np.ndarray) -> LanczosState:
    v = np.asarray(start, dtype=float)
    nrm = np.linalg.norm(v)
    if v.ndim != 1 or not nrm > 0:
        raise InvalidArgument("start vector must be a nonzero 1-D array")
    return LanczosState([], [], (v / nrm)[:, None])


def lanczos_step(apply, state: LanczosState) -> LanczosState:
    """Advance one Lanczos step in place and return the state.

    Full reorthogonalization (two classical Gram-Schmidt passes) against every
    stored Krylov vector. A new ``beta`` below ``1e-13`` times the running
    operator scale marks an invariant subspace: the state is flagged
    ``breakdown`` and no further vector is added.
    """
    if state.breakdown:
        return state
    apply = _as_apply(apply)
    l = state.iteration
    Q = state.krylov
    q = Q[:, l]
    z = np.asarray(apply(q), dtype=float)
    if z.shape != q.shape:
        raise DimensionMismatch(f"operator returned shape {z.shape}, expected {q.shape}")
    a = float(q @ z)
    state.scale = max(state.scale, float(np.linalg.norm(z)), abs(a))
    z = z - a * q
    if l > 0:
        z = z - state.beta[l - 1] * Q[:, l - 1]
    basis = Q[:, : l + 1]
    for _ in range(2):
        z = z - basis @ (basis.T @ z)
    b = float(np.linalg.norm(z))
    state.alpha.append(a)
    state.iteration = l + 1
    if b < BREAKDOWN_TOL * max(state.scale, 1e-300) or state.iteration == state.dim:
        state.breakdown = True
        state.krylov = Q[:, : l + 1]
        return state
    state.beta.append(b)
    state.krylov = np.column_stack([basis, z / b])
    return state


def lanczos_iterations(apply, start: np.ndarray, max_iter: int) -> Iterator[LanczosState]:
    """Yield the state after each of up to ``max_iter`` steps; stops at breakdown."""
    state = lanczos_start(start)
    if max_iter > state.dim:
        raise InvalidArgument(f"max_iter {max_iter} exceeds the dimension {state.dim}")
    for _ in range(max_iter):
        lanczos_step(apply, state)
        yield state
        if state.breakdown:
            return


def ritz_pairs(state: LanczosState) -> list[RitzPair]:
    l = state.iteration
    if l < 1:
        raise InvalidArgument("no Lanczos step has been taken")
    alpha = np.asarray(state.alpha)
    beta = np.asarray(state.beta[: l - 1])
    if l == 1:
        theta, s = alpha.copy(), np.ones((1, 1))
    else:
        try:
            theta, s = scipy.linalg.eigh_tridiagonal(alpha, beta)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    lifted = state.krylov[:, :l] @ s
    lifted /= np.linalg.norm(lifted, axis=0)
    return [RitzPair(float(theta[k]), lifted[:, k], l) for k in range(l)]


def track_window(value: float) -> float:
    return max(1e-6, 1e-3 * abs(value))


def track_assignments(values: Sequence[Sequence[float]]) -> list[list[int]]:
    """Track id for every value, iteration by iteration.

    ``values[t]`` must be ascending. Greedy nearest-value matching: candidate
    links between the previous iteration's tracks and the current values are
    accepted in order of distance (ties by lower index) when within
    ``track_window`` of the previous value. Unmatched values open new tracks
    numbered in order of appearance.
    """
    out: list[list[int]] = []
    last: dict[int, float] = {}
    active: list[int] = []
    n_tracks = 0
    for vals in values:
        cur = np.asarray(vals, dtype=float)
        if np.any(np.diff(cur) < 0):
            raise InvalidArgument("values must be sorted ascending within each iteration")
        ids = [-1] * len(cur)
        cand = []
        for i, tid in enumerate(active):
            pv = last[tid]
            w = track_window(pv)
            lo = np.searchsorted(cur, pv - w, side="left")
            hi = np.searchsorted(cur, pv + w, side="right")
            cand.extend((abs(cur[j] - pv), i, j) for j in range(lo, hi))
        cand.sort()
        used = set()
        for _, i, j in cand:
            if i in used or ids[j] != -1:
                continue
            used.add(i)
            ids[j] = active[i]
        for j in range(len(cur)):
            if ids[j] == -1:
                ids[j] = n_tracks
                n_tracks += 1
            last[ids[j]] = float(cur[j])
        active = ids
        out.append(ids)
    return out


def track_states(histories: Sequence[Sequence[RitzPair]]) -> list[list[RitzPair]]:
    """Chain eigenpairs across iterations into tracks ordered by ``track_id``.

    See :func:`track_assignments` for the matching rule.
    """
    ordered = [sorted(pairs, key=lambda p: p.value) for pairs in histories]
    ids = track_assignments([[p.value for p in pairs] for pairs in ordered])
    n = 1 + max((max(row) for row in ids if row), default=-1)
    tracks: list[list[RitzPair]] = [[] for _ in range(n)]
    for pairs, row in zip(ordered, ids):
        for p, tid in zip(pairs, row):
            tracks[tid].append(replace(p, track_id=tid))
    return tracks
