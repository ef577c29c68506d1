import numpy as np
import pytest

from spuridium import (
    assemble_schrodinger,
    build_sine_basis,
    eigh_dense,
    quadrature_rule,
)


def schrodinger(potential, n_basis, box, oversampling=6):
    """Assemble on a plain sine basis, splitting quadrature at the potential's kinks."""
    basis = build_sine_basis(n_basis, box)
    quad = quadrature_rule(basis, oversampling, breakpoints=potential.breakpoints())
    ops = assemble_schrodinger(potential, basis, quad)
    return basis, quad, ops


@pytest.fixture
def solve_schrodinger():
    def run(potential, n_basis, box, oversampling=6):
        basis, quad, ops = schrodinger(potential, n_basis, box, oversampling)
        return basis, quad, ops, eigh_dense(ops.h)
    return run


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    for mod in list(sys.modules.values()):
        results = getattr(mod, "ACCEPTANCE_RESULTS", None)
        if isinstance(results, dict) and results:
            terminalreporter.section("acceptance criteria")
            for k in sorted(results):
                terminalreporter.write_line(results[k])
            break
