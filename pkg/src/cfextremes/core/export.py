"""CSV and JSON writers shared by the CLI.

JSON is written with sorted keys and a ``schema_version`` so identical runs
give identical bytes; rationals are ``num/den`` strings. CSV always uses ``.``
as the decimal separator.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import Any

from cfextremes.core.errors import DomainError
from cfextremes.core.gauss_lab import ExtremeSample, log_ratio_stat, trimmed_sum_stat
from cfextremes.core.intervals import Interval, fraction_str, parse_fraction

SCHEMA_VERSION = 1


def _default(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(payload: dict[str, Any]) -> str:
    """Stable JSON text for a payload (``schema_version`` added)."""
    body = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(body, sort_keys=True, indent=2, default=_default, allow_nan=False) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


SAMPLE_COLUMNS = ("trial", "n", "T_n", "S_n", "trimmed_stat", "log_ratio")


def samples_csv(samples: Sequence[ExtremeSample]) -> str:
    """Per-trial table; statistics are empty for aborted trials."""
    rows = []
    for s in samples:
        if s.failed:
            rows.append((s.trial_index, s.n, "", "", "", ""))
            continue
        trimmed = trimmed_sum_stat(s) if s.n >= 2 else ""
        log_ratio = log_ratio_stat(s) if s.n >= 3 else ""
        rows.append((s.trial_index, s.n, s.T_n, s.S_n, trimmed, log_ratio))
    return dumps_csv(SAMPLE_COLUMNS, rows)


def dim_curve_csv(parameter: str, rows: Sequence[tuple[float, Fraction]]) -> str:
    return dumps_csv(
        (parameter, "dimension", "dimension_float"),
        ((x, value, float(value)) for x, value in rows),
    )


def intervals_from_tree(data: dict[str, Any], level: int | None = None) -> list[Interval]:
    """Level intervals from a ``levelset`` tree JSON (deepest level by default).

    Raises:
        DomainError: the document has no node levels or the level is missing.
    """
    tree = data.get("tree", data)
    levels = tree.get("levels")
    if not levels:
        raise DomainError("tree JSON has no levels (was it built in log_only mode?)")
    index = len(levels) - 1 if level is None else level
    if not 0 <= index < len(levels):
        raise DomainError(f"tree has levels 0..{len(levels) - 1}, asked for {index}")
    out = []
    for node in levels[index]:
        iv = node["interval"]
        out.append(Interval.closed(parse_fraction(iv["left"]), parse_fraction(iv["right"])))
    return out
