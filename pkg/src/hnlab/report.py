"""Rendering of result rows as JSON, CSV or a human table.

A run produces a list of flat-ish dict rows.  Every exact number is written
as a ``"num/den"`` string in machine formats; the table view adds a marked
decimal approximation.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .exact import approx, fraction_str
from .profile import GradedPiece, HNProfile

FORMATS = ("table", "json", "csv")


def to_plain(value: Any) -> Any:
    """Convert to JSON-ready values; Fractions become canonical strings."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, int):
        return value
    if isinstance(value, HNProfile):
        return value.to_json()
    if isinstance(value, GradedPiece):
        return {"rank": value.rank, "degree": fraction_str(value.degree)}
    if isinstance(value, Mapping):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    raise TypeError(f"cannot serialise {value!r}")


def dumps(rows: Sequence[Mapping]) -> str:
    return json.dumps([to_plain(r) for r in rows], indent=2, ensure_ascii=False) + "\n"


def _cell(value: Any) -> str:
    plain = to_plain(value)
    if plain is None:
        return ""
    if isinstance(plain, bool):
        return "true" if plain else "false"
    if isinstance(plain, (dict, list)):
        return json.dumps(plain, separators=(",", ":"), ensure_ascii=False)
    return str(plain)


def _columns(rows: Iterable[Mapping]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def render_csv(rows: Sequence[Mapping]) -> str:
    buf = io.StringIO()
    cols = _columns(rows)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def _human(value: Any) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{fraction_str(value)} (~{approx(value)})"
    if isinstance(value, HNProfile):
        return " ".join(f"({pc.rank},{pc.degree})" for pc in value.pieces)
    if isinstance(value, GradedPiece):
        return f"({value.rank},{value.degree})"
    if isinstance(value, (list, tuple)) and value and all(isinstance(v, GradedPiece) for v in value):
        return " ".join(_human(v) for v in value)
    return _cell(value)


def render_table(rows: Sequence[Mapping]) -> str:
    """Group rows by their ``section`` key and print aligned columns."""
    out: list[str] = []
    groups: list[tuple[Any, list[Mapping]]] = []
    for row in rows:
        section = row.get("section")
        if groups and groups[-1][0] == section:
            groups[-1][1].append(row)
        else:
            groups.append((section, [row]))
    for section, group in groups:
        if section is not None:
            out.append(f"== {section} ==")
        cols = [c for c in _columns(group) if c != "section"]
        cells = [[_human(r.get(c)) for c in cols] for r in group]
        widths = [max(len(c), *(len(line[i]) for line in cells)) for i, c in enumerate(cols)]
        out.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        for line in cells:
            out.append("  ".join(v.ljust(w) for v, w in zip(line, widths)).rstrip())
        out.append("")
    return "\n".join(out)


def render(rows: Sequence[Mapping], fmt: str) -> str:
    if fmt == "json":
        return dumps(rows)
    if fmt == "csv":
        return render_csv(rows)
    return render_table(rows)
