"""Render coefficient tables and test results as text, CSV or markdown.

Layout follows the usual quantile-regression results table: one block per
point estimator (OLS, 2SLS) with one row per regressor, then one block per
quantile estimator with rows grouped by regressor and ordered by quantile,
then the test block. Output depends only on the inputs, byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..errors import UsageError
from ..model import CoefficientRow, CoefficientTable, TestResult, stars_for
from .study import intercept_last

LABELS = {"ols": "OLS", "tsls": "2SLS", "qr": "QR", "bqr": "BQR", "bqr_2sls": "BQR-2SLS"}
NOTE = "Notes: ***, ** and * imply significance at the 1%, 5% and 10% levels, respectively."
FORMATS = ("text", "csv", "markdown")


def star_string(prob):
    return "*" * stars_for(prob)


def _fmt_prob(p):
    return "" if p is None else f"{p:.4f}"


def _blocks(table):
    """[(estimator, [rows in display order])], point blocks first."""
    point, quantile = [], []
    for est in table.estimators():
        rows = [r for r in table if r.estimator == est]
        if all(r.tau is None for r in rows):
            order = intercept_last([r.regressor for r in rows])
            point.append((est, sorted(rows, key=lambda r: order.index(r.regressor))))
        else:
            names = intercept_last(list(dict.fromkeys(r.regressor for r in rows)))
            ordered = []
            for name in names:
                ordered += sorted((r for r in rows if r.regressor == name), key=lambda r: r.tau)
            quantile.append((est, ordered))
    return point + quantile


def _test_label(t):
    return f"{t.name} [{t.note}]" if t.note else t.name


def render_report(table, tests=(), format="text", title=None):
    if len(table) == 0:
        raise UsageError("cannot render an empty coefficient table")
    if format == "text":
        return _render_text(table, tests, title)
    if format == "csv":
        return _render_csv(table, tests)
    if format == "markdown":
        return _render_markdown(table, tests, title)
    raise UsageError(f"unknown report format {format!r}; expected one of {FORMATS}")


def _render_text(table, tests, title):
    out = []
    if title:
        out += [title, ""]
    width = max([len(f"{LABELS.get(r.estimator, r.estimator)}({r.regressor})") for r in table] + [12]) + 2
    head = f"{'':<{width}}{'Quantile':>9}{'Coefficient':>16}{'Prob.':>10}  Sig."
    out.append(head)
    out.append("-" * len(head))
    for est, rows in _blocks(table):
        label = LABELS.get(est, est)
        out.append(f"{label} Results")
        prev = None
        for r in rows:
            if r.tau is None:
                name, q = f"{label}({r.regressor})", ""
            else:
                name = r.regressor if r.regressor != prev else ""
                q = f"{r.tau:.3f}"
                prev = r.regressor
            out.append(f"{name:<{width}}{q:>9}{r.estimate:>16.6f}{_fmt_prob(r.prob):>10}  "
                       f"{star_string(r.prob)}".rstrip())
    if tests:
        out.append("Tests")
        tw = max(len(_test_label(t)) for t in tests) + 2
        out.append(f"{'':<{tw}}{'Statistic':>12}{'df':>5}{'Prob.':>10}  Sig.")
        for t in tests:
            out.append(f"{_test_label(t):<{tw}}{t.statistic:>12.4f}{t.df:>5d}"
                       f"{t.p_value:>10.4f}  {star_string(t.p_value)}".rstrip())
    out.append("-" * len(head))
    out.append(NOTE)
    return "\n".join(out) + "\n"


CSV_HEADER = ["section", "estimator", "label", "quantile", "coefficient", "interval_lo",
              "interval_hi", "prob", "stars", "df"]


def _render_csv(table, tests):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for est, rows in _blocks(table):
        section = "point" if rows[0].tau is None else "quantile"
        for r in rows:
            w.writerow([section, est, r.regressor, "" if r.tau is None else repr(r.tau),
                        repr(r.estimate), repr(r.interval_lo), repr(r.interval_hi),
                        "" if r.prob is None else repr(r.prob), r.stars, ""])
    for t in tests:
        w.writerow(["test", "", _test_label(t), "", repr(t.statistic), "", "",
                    repr(t.p_value), stars_for(t.p_value), t.df])
    return buf.getvalue()


def _render_markdown(table, tests, title):
    out = []
    if title:
        out += [f"# {title}", ""]
    for est, rows in _blocks(table):
        label = LABELS.get(est, est)
        out += [f"## {label} Results", "", "| Regressor | Quantile | Coefficient | Prob. | Sig. |",
                "|---|---:|---:|---:|:---|"]
        for r in rows:
            q = "" if r.tau is None else f"{r.tau:.3f}"
            sig = star_string(r.prob).replace("*", "\\*")
            out.append(f"| {r.regressor} | {q} | {r.estimate:.6f} | {_fmt_prob(r.prob)} | {sig} |")
        out.append("")
    if tests:
        out += ["## Tests", "", "| Test | Statistic | df | Prob. | Sig. |", "|---|---:|---:|---:|:---|"]
        for t in tests:
            sig = star_string(t.p_value).replace("*", "\\*")
            out.append(f"| {_test_label(t)} | {t.statistic:.4f} | {t.df} | {t.p_value:.4f} | {sig} |")
        out.append("")
    out.append(NOTE.replace("*", "\\*"))
    return "\n".join(out) + "\n"


def results_to_json(table, tests, meta=None):
    doc = {
        "meta": meta or {},
        "coefficients": [
            {"estimator": r.estimator, "regressor": r.regressor, "tau": r.tau,
             "estimate": r.estimate, "interval_lo": r.interval_lo,
             "interval_hi": r.interval_hi, "prob": r.prob}
            for r in table
        ],
        "tests": [{"name": t.name, "statistic": t.statistic, "df": t.df,
                   "p_value": t.p_value, "note": t.note} for t in tests],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_results(path, table, tests, meta=None):
    Path(path).write_text(results_to_json(table, tests, meta), encoding="utf-8")


def load_results(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        table = CoefficientTable(CoefficientRow(**row) for row in doc["coefficients"])
        tests = [TestResult(**t) for t in doc["tests"]]
    except (KeyError, TypeError) as e:
        raise UsageError(f"{path}: not a saved results file ({e})") from None
    return table, tests, doc.get("meta", {})
