"""Report rows and their CSV / JSON serialisations."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

SCHEMA = "kresultant-report/1"
COLUMNS = ("p", "n", "q", "d", "k", "set", "check", "hypothesis_met",
           "lhs", "rhs", "status", "ratio", "seconds")
STATUSES = ("pass", "fail", "tracked", "n/a", "skipped")


@dataclass
class ReportRow:
    p: int
    n: int
    d: int
    set_label: str
    check: str
    status: str
    k: int | None = None
    hypothesis_met: bool = True
    lhs: object = None
    rhs: object = None
    ratio: object = None
    seconds: float | None = None
    note: str = ""
    exact: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return self.p**self.n

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return repr(float(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _json_num(x):
    if x is None or isinstance(x, (bool, int)):
        return x
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator, "float": float(x)}
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def to_csv(rows: list[ReportRow], timings: bool = False) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([r.p, r.n, r.q, r.d, _num(r.k), r.set_label, r.check,
                    _num(r.hypothesis_met), _num(r.lhs), _num(r.rhs), r.status,
                    _num(r.ratio), _num(r.seconds) if timings else ""])
    return buf.getvalue()


def to_json(rows: list[ReportRow], provenance: dict, timings: bool = False) -> str:
    summary = {s: sum(r.status == s for r in rows) for s in STATUSES}
    doc = {
        "schema": SCHEMA,
        "provenance": provenance,
        "summary": summary,
        "rows": [
            {
                "p": r.p, "n": r.n, "q": r.q, "d": r.d, "k": r.k, "set": r.set_label,
                "check": r.check, "hypothesis_met": r.hypothesis_met,
                "lhs": _json_num(r.lhs), "rhs": _json_num(r.rhs), "status": r.status,
                "ratio": _json_num(r.ratio),
                "seconds": r.seconds if timings else None,
                "note": r.note,
                "exact": {k: _json_num(v) for k, v in r.exact.items()},
            }
            for r in rows
        ],
    }
    return json.dumps(doc, indent=1) + "\n"
