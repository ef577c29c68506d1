"""Report rows and their CSV / JSON serialization.

CSV layout (schema 1)::

    # schema: spuridium-report/1
    # version: <package version>
    # config: <canonical JSON of the run configuration>
    # adequacy: <JSON object {N: TRK sum}>            (Schrodinger only)
    track_id,iteration,energy,delta,delta_rel,verdict,trend,forbidden_fraction
    ...

Floats are written with 17 significant digits in lowercase scientific
notation, so a CSV round-trips bit-exactly and identical runs give
identical bytes. Wall time only appears in the JSON form.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass

from .errors import ConfigError

REPORT_SCHEMA = "spuridium-report/1"
SUMRULE_SCHEMA = "spuridium-sumrule/1"
COLUMNS = ("track_id", "iteration", "energy", "delta", "delta_rel", "verdict", "trend",
           "forbidden_fraction")
SUMRULE_COLUMNS = ("n_basis", "trk_sum", "deviation")


def fmt_float(x: float | None) -> str:
    return "" if x is None else format(float(x), ".16e")


@dataclass
class Row:
    track_id: int
    iteration: int
    energy: float
    delta: float
    delta_rel: float
    verdict: str = "Undecided"
    trend: str = "Plateau"
    forbidden_fraction: float | None = None

    def cells(self) -> list[str]:
        return [str(self.track_id), str(self.iteration), fmt_float(self.energy),
                fmt_float(self.delta), fmt_float(self.delta_rel), self.verdict, self.trend,
                fmt_float(self.forbidden_fraction)]

    @classmethod
    def from_cells(cls, rec: dict) -> "Row":
        ff = rec["forbidden_fraction"]
        return cls(int(rec["track_id"]), int(rec["iteration"]), float(rec["energy"]),
                   float(rec["delta"]), float(rec["delta_rel"]), rec["verdict"], rec["trend"],
                   None if ff in ("", None) else float(ff))


@dataclass
class Report:
    rows: list[Row]
    config: dict
    version: str
    adequacy: dict[int, float] | None = None
    wall_time: float | None = None

    def sort(self):
        self.rows.sort(key=lambda r: (r.track_id, r.iteration))
        return self

    def tracks(self) -> dict[int, list[Row]]:
        out: dict[int, list[Row]] = {}
        for r in self.rows:
            out.setdefault(r.track_id, []).append(r)
        return out

    def final_rows(self) -> list[Row]:
        return [rows[-1] for rows in self.tracks().values()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {REPORT_SCHEMA}\n")
        buf.write(f"# version: {self.version}\n")
        buf.write(f"# config: {_canonical(self.config)}\n")
        if self.adequacy is not None:
            buf.write(f"# adequacy: {_canonical(_adequacy_out(self.adequacy))}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema": REPORT_SCHEMA,
            "metadata": {"version": self.version, "config": self.config, "wall_time": self.wall_time},
            "adequacy": None if self.adequacy is None else _adequacy_out(self.adequacy),
            "rows": [{c: getattr(r, c) for c in COLUMNS} for r in self.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _adequacy_out(adequacy: dict) -> dict:
    return {str(k): float(v) for k, v in adequacy.items()}


def _adequacy_in(obj) -> dict[int, float] | None:
    if obj is None:
        return None
    return {int(k): float(v) for k, v in obj.items()}


def parse_report(text: str) -> tuple[Report, str]:
    """Parse CSV or JSON report text; returns the report and the detected format."""
    try:
        if text.lstrip().startswith("{"):
            return _parse_json(text), "json"
        return _parse_csv(text), "csv"
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"malformed report: {exc}") from exc


def _parse_json(text: str) -> Report:
    doc = json.loads(text)
    if doc.get("schema") != REPORT_SCHEMA:
        raise ConfigError(f"unsupported report schema {doc.get('schema')!r}")
    meta = doc["metadata"]
    rows = [Row.from_cells(r) for r in doc["rows"]]
    return Report(rows, meta["config"], meta["version"], _adequacy_in(doc.get("adequacy")),
                  meta.get("wall_time"))


def _parse_csv(text: str) -> Report:
    lines = text.splitlines()
    header: dict[str, str] = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, _, value = line[1:].strip().partition(":")
        header[key.strip()] = value.strip()
    else:
        raise ConfigError("report has no table")
    if header.get("schema") != REPORT_SCHEMA:
        raise ConfigError(f"unsupported report schema {header.get('schema')!r}")
    reader = csv.DictReader(lines[body_start:])
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ConfigError(f"unexpected columns {reader.fieldnames}")
    rows = [Row.from_cells(rec) for rec in reader]
    adequacy = _adequacy_in(json.loads(header["adequacy"])) if "adequacy" in header else None
    return Report(rows, json.loads(header["config"]), header.get("version", ""), adequacy)


@dataclass
class SumRuleReport:
    rows: list[tuple[int, float]]
    config: dict
    version: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SUMRULE_SCHEMA}\n")
        buf.write(f"# version: {self.version}\n")
        buf.write(f"# config: {_canonical(self.config)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMRULE_COLUMNS)
        for n, s in self.rows:
            w.writerow([str(n), fmt_float(s), fmt_float(abs(s - 0.5))])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema": SUMRULE_SCHEMA,
            "metadata": {"version": self.version, "config": self.config},
            "rows": [{"n_basis": n, "trk_sum": s, "deviation": abs(s - 0.5)} for n, s in self.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def parse_sumrule(text: str) -> SumRuleReport:
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = [(int(r["n_basis"]), float(r["trk_sum"])) for r in doc["rows"]]
        return SumRuleReport(rows, doc["metadata"]["config"], doc["metadata"]["version"])
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    meta = dict(l[1:].strip().split(":", 1) for l in text.splitlines() if l.startswith("#"))
    rows = [(int(r["n_basis"]), float(r["trk_sum"])) for r in csv.DictReader(lines)]
    return SumRuleReport(rows, json.loads(meta["config"]), meta["version"].strip())


def write_atomic(path: str, text: str):
    """Write via a temporary file in the target directory and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".spuridium-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
