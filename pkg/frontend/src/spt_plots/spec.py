"""Figure specifications and CSV schema checks.

The component consumes only the CSV artifacts written by the `spt` CLI; the
column sets below are the documented schema for each figure kind.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List


class SpecError(Exception):
    """Invalid figure spec or CSV schema mismatch."""


KINDS = ("dispersion", "phase-diagram", "pole-map", "residuals")

REQUIRED_COLUMNS: Dict[str, tuple] = {
    "dispersion": ("lam", "coulomb_re_0", "coulomb_re_1",
                   "dipole_re_0", "dipole_re_1"),
    "phase-diagram": ("n_atoms", "g", "photon_density"),
    "pole-map": ("re_omega", "im_omega", "abs_D", "phase_D"),
    "residuals": ("field_index", "residual_decomposition",
                  "orthogonality_rel", "parseval_rel"),
}

DEFAULT_LABELS = {
    "dispersion": ("coupling strength", "mode frequency"),
    "phase-diagram": ("coupling strength", "atom count"),
    "pole-map": ("Re omega", "Im omega"),
    "residuals": ("field index", "residual"),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    output_image: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"kind must be one of {KINDS}, got {self.kind!r}")


def spec_from_dict(doc: dict, where: str = "spec") -> FigureSpec:
    if not isinstance(doc, dict):
        raise SpecError(f"{where}: expected an object, got {type(doc).__name__}")
    allowed = {"input_csv", "kind", "output_image", "title", "xlabel", "ylabel"}
    unknown = set(doc) - allowed
    if unknown:
        raise SpecError(f"{where}: unknown keys {sorted(unknown)}")
    for key in ("input_csv", "kind", "output_image"):
        if key not in doc:
            raise SpecError(f"{where}: missing required key '{key}'")
        if not isinstance(doc[key], str):
            raise SpecError(f"{where}.{key}: expected a string")
    for key in ("title", "xlabel", "ylabel"):
        if key in doc and not isinstance(doc[key], str):
            raise SpecError(f"{where}.{key}: expected a string")
    return FigureSpec(**doc)


def load_specs(path: str) -> List[FigureSpec]:
    """Parse a spec file holding one spec object or a list of them."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(doc, list):
        return [spec_from_dict(d, f"spec[{i}]") for i, d in enumerate(doc)]
    return [spec_from_dict(doc)]


def read_table(spec: FigureSpec) -> Dict[str, "list[float]"]:
    """Load the CSV behind a spec and validate its schema for the kind."""
    path = Path(spec.input_csv)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SpecError(f"{path}: empty file, no header row")
            rows = list(reader)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    required = REQUIRED_COLUMNS[spec.kind]
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise SpecError(
            f"{path}: schema mismatch for kind '{spec.kind}': "
            f"missing columns {missing}, found {reader.fieldnames}")
    if not rows:
        raise SpecError(f"{path}: empty CSV body")
    table: Dict[str, List[float]] = {c: [] for c in required}
    for i, row in enumerate(rows):
        for c in required:
            try:
                table[c].append(float(row[c]))
            except (TypeError, ValueError) as exc:
                raise SpecError(
                    f"{path}: row {i + 1}, column '{c}': not a number "
                    f"({row[c]!r})") from exc
    return table
