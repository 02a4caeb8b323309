"""Definition-file parsing, CSV emission, and experiment reports.

All CSV floats are written with 17 significant digits so values round-trip
losslessly; all output files are written to a temporary sibling and renamed,
so failed runs leave no partial files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field

from .circle_map import CircleFamily, TPoly
from .errors import InputError
from .skew import SkewMap

CSV_SCHEMAS = {
    "rho": ("t", "rho", "error_bound", "classification", "p", "q"),
    "windows": ("p", "q", "t_lo", "t_hi", "width", "bracket_radius"),
    "tongues": ("delta", "p", "q", "t_lo", "t_hi"),
    "measure": ("q_max", "lower", "mc", "unresolved", "seed"),
    "dio": ("C", "n_max", "estimate", "analytic_lower", "grid_error"),
    "circles": ("k", "n", "x0_num", "x0_den", "sup_c3", "passes"),
    "search": ("t", "found", "k", "n", "rho", "classification"),
    "intersection": ("N", "mu_locked", "mu_pessimistic"),
    "eta": ("r", "eta", "eta_raw"),
}


def fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path, header, rows):
    """Atomic CSV write with a fixed header and LF line endings."""
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(fmt_cell(v) for v in row) + "\n"
    _atomic_write(path, text.encode())


def _atomic_write(path, data: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def content_hash(data: bytes) -> str:
    """Hash of file contents in git blob form: sha1('blob <len>\\0' + data)."""
    h = hashlib.sha1()
    h.update(b"blob %d\x00" % len(data))
    h.update(data)
    return h.hexdigest()


def hash_file(path) -> str:
    with open(path, "rb") as fh:
        return content_hash(fh.read())


def load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}")
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")


def _tpoly(obj, where: str) -> TPoly:
    if isinstance(obj, (int, float)):
        return TPoly((float(obj),))
    if isinstance(obj, list) and all(isinstance(v, (int, float)) for v in obj):
        return TPoly(obj)
    raise InputError(f"{where}: expected a number or a list of t-polynomial coefficients")


def family_from_dict(d: dict, where: str = "family") -> CircleFamily:
    try:
        winding = int(d.get("winding", 1))
    except (TypeError, ValueError):
        raise InputError(f"{where}: 'winding' must be an integer")
    if winding < 1:
        raise InputError(f"{where}: 'winding' must be >= 1")
    harmonics = []
    for i, h in enumerate(d.get("harmonics", [])):
        if "j" not in h:
            raise InputError(f"{where}: harmonic #{i} is missing 'j'")
        harmonics.append(
            (
                int(h["j"]),
                _tpoly(h.get("a", 0.0), f"{where}: harmonic #{i} 'a'"),
                _tpoly(h.get("b", 0.0), f"{where}: harmonic #{i} 'b'"),
            )
        )
    return CircleFamily(
        winding,
        _tpoly(d.get("const", 0.0), f"{where}: 'const'"),
        tuple(harmonics),
        label=str(d.get("label", "")),
    )


def load_family(path) -> CircleFamily:
    return family_from_dict(load_json(path), where=str(path))


def skew_from_dict(d: dict, where: str = "skew map") -> SkewMap:
    try:
        m = int(d["m"])
    except KeyError:
        raise InputError(f"{where}: missing base 'm'")
    except (TypeError, ValueError):
        raise InputError(f"{where}: 'm' must be an integer")
    harmonics = []
    for i, h in enumerate(d.get("harmonics", [])):
        if "jx" not in h or "jy" not in h:
            raise InputError(f"{where}: harmonic #{i} needs 'jx' and 'jy'")
        harmonics.append(
            (
                int(h["jx"]),
                int(h["jy"]),
                _tpoly(h.get("a", 0.0), f"{where}: harmonic #{i} 'a'"),
                _tpoly(h.get("b", 0.0), f"{where}: harmonic #{i} 'b'"),
            )
        )
    return SkewMap(m, tuple(harmonics), label=str(d.get("label", "")))


def load_skew(path) -> SkewMap:
    return skew_from_dict(load_json(path), where=str(path))


@dataclass
class ExperimentReport:
    """Self-contained record of one experiment run.

    Rerunning with identical inputs and seed reproduces every table
    bit-for-bit; the wall clock is informational and excluded from that
    guarantee.
    """

    experiment: str
    tool_version: str
    inputs: dict = field(default_factory=dict)
    input_hashes: dict = field(default_factory=dict)
    hypotheses: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> {header, rows}
    wall_clock_s: float = 0.0

    def add_table(self, name: str, header, rows):
        self.tables[name] = {
            "header": list(header),
            "rows": [[fmt_cell(v) for v in row] for row in rows],
        }

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "tool_version": self.tool_version,
            "inputs": self.inputs,
            "input_hashes": self.input_hashes,
            "hypotheses": self.hypotheses,
            "tables": self.tables,
            "wall_clock_s": self.wall_clock_s,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_report(path, report: ExperimentReport):
    _atomic_write(path, report.to_json().encode())
