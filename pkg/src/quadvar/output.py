"""Rendering of suite rows and reports.

Floats are written with 12 significant digits everywhere, so reruns with the
same inputs give byte-identical text. Formatting never goes through the
locale, so the decimal separator is always '.'.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence

__all__ = ["SIG_DIGITS", "fmt_complex", "fmt_fixed", "fmt_value", "normalise", "to_csv", "to_json", "to_text"]

SIG_DIGITS = 12


def fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{SIG_DIGITS}g")
    return str(value)


def fmt_fixed(value: float, places: int = 6) -> str:
    """Fixed-point with negative zero folded to zero."""
    text = format(value, f".{places}f")
    return text[1:] if text.startswith("-") and float(text) == 0 else text


def fmt_complex(z: complex, places: int = 6) -> str:
    im = fmt_fixed(z.imag, places)
    sign, mag = ("-", im[1:]) if im.startswith("-") else ("+", im)
    return f"{fmt_fixed(z.real, places)} {sign} {mag}i"


def normalise(obj):
    """Round floats to 12 significant digits and make keys strings, recursively.

    Non-finite floats become None, which JSON writes as null.
    """
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(format(obj, f".{SIG_DIGITS}g")) if math.isfinite(obj) else None
    if isinstance(obj, Mapping):
        return {str(k): normalise(v) for k, v in obj.items()}
    if isinstance(obj, Sequence):
        return [normalise(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return normalise(obj.item())
    return str(obj)


def to_json(obj) -> str:
    return json.dumps(normalise(obj), indent=2) + "\n"


def _columns(rows: Sequence[Mapping]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    return cols


def to_csv(rows: Sequence[Mapping]) -> str:
    buf = io.StringIO()
    cols = _columns(rows)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow(fmt_value(row.get(c, "")) for c in cols)
    return buf.getvalue()


def to_text(rows: Sequence[Mapping], summary: Mapping | None = None) -> str:
    """Aligned columns, numbers right-aligned, then ``key: value`` summary lines."""
    lines = []
    if rows:
        cols = _columns(rows)
        cells = [[fmt_value(row.get(c, "")) for c in cols] for row in rows]
        widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        lines.extend("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells)
    for key, value in (summary or {}).items():
        lines.append(f"{key}: {fmt_value(value)}")
    return "\n".join(lines) + "\n"
