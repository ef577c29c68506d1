"""End-to-end pipelines behind the CLI: assemble, solve, test every state, classify."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .basis import BasisSpec, build_mapped_basis, build_sine_basis, quadrature_rule
from .config import RunConfig
from .diagnostics import DeltaRecord, classify, delta_records, forbidden_fraction, trk_sum_rule
from .eigensolve import (
    RitzPair,
    eigenpairs,
    eigh_dense,
    lanczos_iterations,
    probe_symmetry,
    ritz_pairs,
    start_vector,
    track_assignments,
)
from .errors import ConfigError, NotApplicable
from .hamiltonians import DiracParams, OperatorPair, assemble_dirac, assemble_schrodinger
from .potentials import CoulombRadial, HarmonicOscillator, PoschlTeller, Potential, SquareWell
from .report import Report, Row, SumRuleReport

log = logging.getLogger(__name__)


def build_problem(cfg: RunConfig) -> Potential | DiracParams:
    p = cfg.problem
    center = cfg.center()
    if p.name == "harmonic":
        return HarmonicOscillator(p.omega, center)
    if p.name == "hydrogen":
        return CoulombRadial(p.z, p.ell, p.soft_core)
    if p.name == "poschl_teller":
        return PoschlTeller(p.lam, p.a, center)
    if p.name == "square_well":
        return SquareWell(p.v0, p.width, center)
    if p.name == "dirac_coulomb":
        return DiracParams(p.z, p.kappa, p.c)
    raise ConfigError(f"unknown problem {p.name!r}")


def build_basis(cfg: RunConfig, n_basis: int) -> BasisSpec:
    b = cfg.basis
    if b.map_kind == "rational":
        return build_mapped_basis(n_basis, b.box_length, b.map_strength)
    return build_sine_basis(n_basis, b.box_length)


@dataclass
class Problem:
    """One assembled instance at a fixed basis size."""

    model: Potential | DiracParams
    basis: BasisSpec
    quad: object
    ops: OperatorPair

    @property
    def is_dirac(self) -> bool:
        return isinstance(self.model, DiracParams)


def assemble(cfg: RunConfig, n_basis: int) -> Problem:
    model = build_problem(cfg)
    basis = build_basis(cfg, n_basis)
    cmap = basis.coordinate_map
    kinks = () if isinstance(model, DiracParams) else [float(cmap.inverse(x)) for x in model.breakpoints()]
    quad = quadrature_rule(basis, cfg.diagnostics.oversampling, breakpoints=kinks)
    if isinstance(model, DiracParams):
        ops = assemble_dirac(model, basis, quad)
    else:
        ops = assemble_schrodinger(model, basis, quad)
    return Problem(model, basis, quad, ops)


def thread_count() -> int:
    raw = os.environ.get("SPURIDIUM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n >= 1 else (os.cpu_count() or 1)


@dataclass
class StateRecord:
    pair: RitzPair
    record: DeltaRecord
    forbidden: float | None


def _evaluate(prob: Problem, pairs: list[RitzPair]) -> list[StateRecord]:
    recs = delta_records(pairs, prob.ops)
    out = []
    for p, r in zip(pairs, recs):
        ff = None
        if not prob.is_dirac:
            ff = forbidden_fraction(replace(p, value=r.value), prob.model, prob.basis, prob.quad)
        # drop the vector: only values are needed for tracking from here on
        out.append(StateRecord(replace(p, vector=np.empty(0)), r, ff))
    return out


def _dense_point(cfg: RunConfig, n: int):
    prob = assemble(cfg, n)
    decomp = eigh_dense(prob.ops.h)
    states = _evaluate(prob, eigenpairs(decomp, n))
    trk = None if prob.is_dirac else trk_sum_rule(decomp, prob.basis, prob.quad)
    return states, trk


def run_dense(cfg: RunConfig):
    sizes = cfg.sizes()
    workers = min(thread_count(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: _dense_point(cfg, n), sizes))
    else:
        results = [_dense_point(cfg, n) for n in sizes]
    history = [states for states, _ in results]
    adequacy = None
    if not cfg.problem.is_dirac:
        adequacy = {n: trk for n, (_, trk) in zip(sizes, results)}
    return history, adequacy


def run_lanczos(cfg: RunConfig):
    n = cfg.sizes()[-1]
    prob = assemble(cfg, n)
    dim = prob.ops.dim
    if not probe_symmetry(prob.ops.apply, dim, seed=cfg.solver.seed):
        raise NotApplicable("operator failed the symmetry probe")
    start = start_vector(dim, cfg.solver.start, cfg.solver.seed)
    max_iter = cfg.solver.max_iter or dim
    history = []
    for state in lanczos_iterations(prob.ops.apply, start, max_iter):
        history.append(_evaluate(prob, ritz_pairs(state)))
    adequacy = None
    if not prob.is_dirac:
        decomp = eigh_dense(prob.ops.h)
        adequacy = {n: trk_sum_rule(decomp, prob.basis, prob.quad)}
    return history, adequacy


def _rows_from_history(history: list[list[StateRecord]]) -> list[Row]:
    ordered = [sorted(states, key=lambda s: s.record.value) for states in history]
    ids = track_assignments([[s.record.value for s in states] for states in ordered])
    rows = []
    for states, row in zip(ordered, ids):
        for s, tid in zip(states, row):
            r = s.record
            rows.append(Row(tid, s.pair.iteration, r.value, r.delta, r.delta_rel,
                            forbidden_fraction=s.forbidden))
    return rows


def apply_classification(report: Report, tol_bound: float, plateau_factor: float,
                         zero_floor: float) -> Report:
    series = {tid: [DeltaRecord(r.track_id, r.iteration, r.energy, r.delta, r.delta_rel) for r in rows]
              for tid, rows in report.tracks().items()}
    verdicts = classify(series, tol_bound, plateau_factor, zero_floor)
    for r in report.rows:
        c = verdicts[r.track_id]
        r.verdict = c.verdict.value
        r.trend = c.trend.value
    return report


def solve(cfg: RunConfig) -> Report:
    cfg.validate()
    t0 = time.perf_counter()
    if cfg.solver.kind == "dense":
        history, adequacy = run_dense(cfg)
    else:
        history, adequacy = run_lanczos(cfg)
    report = Report(_rows_from_history(history), cfg.to_dict(), __version__, adequacy).sort()
    d = cfg.diagnostics
    apply_classification(report, d.tol_bound, d.plateau_factor, d.zero_floor)
    report.wall_time = time.perf_counter() - t0
    log.info("solved %s with %d rows in %.2fs", cfg.problem.name, len(report.rows), report.wall_time)
    return report


def sumrule(cfg: RunConfig) -> SumRuleReport:
    cfg.validate()
    if cfg.problem.is_dirac:
        raise ConfigError("the TRK sum rule applies to Schrodinger problems only")
    sizes = list(cfg.basis.scan) if cfg.basis.scan else [cfg.basis.n_basis]
    rows = []
    for n in sizes:
        prob = assemble(cfg, n)
        rows.append((n, trk_sum_rule(eigh_dense(prob.ops.h), prob.basis, prob.quad)))
    return SumRuleReport(rows, cfg.to_dict(), __version__)
