"""Run configuration: defaults, JSON file loading, validation and canonical echo."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .diagnostics import PLATEAU_FACTOR, TOL_BOUND, ZERO_FLOOR
from .errors import ConfigError, InvalidArgument
from .hamiltonians import SPEED_OF_LIGHT

PROBLEMS = ("harmonic", "hydrogen", "poschl_teller", "square_well", "dirac_coulomb")
SOLVERS = ("dense", "lanczos")
FORMATS = ("csv", "json")
MAP_KINDS = ("identity", "rational")
START_KINDS = ("ones", "random")


@dataclass
class ProblemConfig:
    name: str = "harmonic"
    omega: float = 1.0
    z: float = 1.0
    ell: int = 0
    lam: float = 4.0
    a: float = 1.0
    v0: float = 10.0
    width: float = 2.0
    kappa: int = -1
    c: float = SPEED_OF_LIGHT
    soft_core: float = 0.0
    center: float | None = None

    @property
    def is_dirac(self) -> bool:
        return self.name == "dirac_coulomb"


@dataclass
class BasisConfig:
    n_basis: int | None = None
    scan: list[int] = field(default_factory=list)
    box_length: float = 20.0
    map_kind: str = "identity"
    map_strength: float = 0.0


@dataclass
class SolverConfig:
    kind: str = "dense"
    max_iter: int | None = None
    seed: int | None = None
    start: str = "ones"


@dataclass
class DiagnosticsConfig:
    tol_bound: float = TOL_BOUND
    plateau_factor: float = PLATEAU_FACTOR
    zero_floor: float = ZERO_FLOOR
    oversampling: int = 6


@dataclass
class OutputConfig:
    path: str | None = None
    format: str = "csv"


_SECTIONS = {
    "problem": ProblemConfig,
    "basis": BasisConfig,
    "solver": SolverConfig,
    "diagnostics": DiagnosticsConfig,
    "output": OutputConfig,
}


@dataclass
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    basis: BasisConfig = field(default_factory=BasisConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        cfg.update(data)
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def update(self, data: dict):
        """Overlay a nested ``{section: {key: value}}`` mapping; unknown keys are errors."""
        for section, values in data.items():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section {section!r}")
            if not isinstance(values, dict):
                raise ConfigError(f"config section {section!r} must be an object")
            target = getattr(self, section)
            known = {f.name for f in fields(target)}
            for key, value in values.items():
                if key not in known:
                    raise ConfigError(f"unknown key {section}.{key}")
                if key == "scan" and value is not None:
                    value = list(value)
                setattr(target, key, value)

    def sizes(self) -> list[int]:
        """Basis sizes visited by a dense run.

        A single ``n_basis`` expands to the trailing scan ``(N - 2s, N - s, N)``
        with ``s = max(1, N // 10)`` so every track gets three records.
        """
        if self.basis.scan:
            return list(self.basis.scan)
        n = self.basis.n_basis
        if self.solver.kind == "lanczos" or n < 3:
            return [n]
        s = max(1, n // 10)
        return [n - 2 * s, n - s, n]

    def dimension(self, n_basis: int) -> int:
        return 2 * n_basis if self.problem.is_dirac else n_basis

    def center(self) -> float:
        p = self.problem
        return 0.5 * self.basis.box_length if p.center is None else p.center

    def validate(self) -> "RunConfig":
        p, b, s, d, o = self.problem, self.basis, self.solver, self.diagnostics, self.output
        if p.name not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {p.name!r}")
        if s.kind not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {s.kind!r}")
        if o.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {o.format!r}")
        if b.map_kind not in MAP_KINDS:
            raise ConfigError(f"map must be one of {MAP_KINDS}, got {b.map_kind!r}")
        if s.start not in START_KINDS:
            raise ConfigError(f"start must be one of {START_KINDS}, got {s.start!r}")
        if not _is_number(b.box_length) or not b.box_length > 0:
            raise ConfigError(f"box length must be positive, got {b.box_length!r}")
        if not _is_number(b.map_strength) or b.map_strength < 0:
            raise ConfigError("map strength must be nonnegative")
        if b.map_kind == "identity" and b.map_strength != 0:
            raise ConfigError("map strength requires --map rational")
        if b.scan:
            if not all(_is_int(n) and n >= 1 for n in b.scan):
                raise ConfigError("scan entries must be positive integers")
            if any(b2 <= b1 for b1, b2 in zip(b.scan[:-1], b.scan[1:])):
                raise ConfigError("scan list must be strictly increasing")
            if b.n_basis is not None and b.n_basis != b.scan[-1]:
                raise ConfigError("give either --n or --scan, not both")
        elif b.n_basis is None:
            raise ConfigError("a basis size (--n or --scan) is required")
        elif not _is_int(b.n_basis) or b.n_basis < 1:
            raise ConfigError(f"n must be a positive integer, got {b.n_basis!r}")
        for name in ("tol_bound", "plateau_factor"):
            v = getattr(d, name)
            if not _is_number(v) or not v > 0:
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if not _is_number(d.zero_floor) or d.zero_floor < 0:
            raise ConfigError("zero_floor must be nonnegative")
        if not _is_int(d.oversampling) or d.oversampling < 2:
            raise ConfigError("oversampling must be an integer >= 2")
        if s.kind == "lanczos":
            if s.seed is None or not _is_int(s.seed) or s.seed < 0:
                raise ConfigError("the lanczos solver requires a nonnegative integer --seed")
            if b.scan and len(b.scan) > 1:
                raise ConfigError("the lanczos solver runs at a single basis size")
            dim = self.dimension(self.sizes()[-1])
            if s.max_iter is not None and (not _is_int(s.max_iter) or not 1 <= s.max_iter <= dim):
                raise ConfigError(f"max_iter must lie in 1..{dim}")
        try:
            from .runner import build_problem
            build_problem(self)
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)
