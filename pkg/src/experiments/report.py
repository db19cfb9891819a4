"""
Deterministic report files: report.json, errors.csv and rate_plot.svg
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from src import __version__
from src.errors import DegenerateReportError
from src.models import ConeExample, FitResult, RateReport

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "homog-mcf"
REPORT_FILES = ("report.json", "errors.csv", "rate_plot.svg")

Report = Union[RateReport, ConeExample]


def _rows(report: Report) -> List[Tuple[float, float, float]]:
    if isinstance(report, RateReport):
        return [(r.eps, r.error, r.h) for r in report.records]
    return list(zip(report.eps, report.lower_bound_values, report.h))


def report_payload(report: Report, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """JSON document {scenario, records, fit, monitors, version, ...}"""
    fit = report.fit.model_dump() if report.fit is not None else None
    if isinstance(report, RateReport):
        payload = {
            "scenario": report.scenario,
            "records": [r.model_dump() for r in report.records],
            "fit": fit,
            "monitors": report.monitors,
            "note": report.note,
            "failures": report.failures,
        }
    else:
        payload = {
            "scenario": {"experiment": "cone", "variant": report.variant.value, "n": report.n},
            "records": [{"eps": e, "error": v, "h": h, "times": [1.0]} for e, v, h in _rows(report)],
            "fit": fit,
            "monitors": {
                "expander_constant": report.expander_constant,
                "oracle_constant": report.oracle_constant,
                "self_similarity_residual": report.self_similarity_residual,
                "consistent": report.consistent,
            },
            "cone": report.model_dump(mode="json"),
        }
    payload["version"] = __version__
    if config is not None:
        payload["config"] = config
    return payload


def _write_plot(path: Path, rows: List[Tuple[float, float, float]], fit: Optional[FitResult]):
    eps = np.array([r[0] for r in rows])
    err = np.abs(np.array([r[1] for r in rows]))
    shown = err > 0

    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    ax.set_xscale("log")
    ax.set_yscale("log")
    if np.any(shown):
        ax.plot(eps[shown], err[shown], "o", color="black", label="measured")
    if fit is not None:
        line = np.geomspace(eps.min(), eps.max(), 2)
        ax.plot(line, fit.constant * line ** fit.exponent, "-", color="tab:blue",
                label=f"slope {fit.exponent:.3f}")
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()

    description = f"fitted exponent {fit.exponent:.6f}" if fit is not None else "no fit"
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})


def emit_report(report: Report, out_dir: Union[str, Path], config: Optional[Dict[str, Any]] = None) -> List[Path]:
    """
    Write report.json, errors.csv and rate_plot.svg into out_dir.

    Args:
        report: Rate sweep or cone example
        out_dir: Destination directory, created if missing
        config: Resolved run configuration embedded for provenance

    Returns:
        Written paths

    Raises:
        DegenerateReportError: the report has no records
        OSError: destination not writable
    """
    rows = _rows(report)
    if not rows:
        raise DegenerateReportError("report has no records to emit")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    json_path = out_dir / REPORT_FILES[0]
    json_path.write_text(json.dumps(report_payload(report, config), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    csv_path = out_dir / REPORT_FILES[1]
    np.savetxt(csv_path, np.array(rows, dtype=float).reshape(-1, 3), fmt="%.17g", delimiter=",",
               header="eps,error,h", comments="")

    svg_path = out_dir / REPORT_FILES[2]
    _write_plot(svg_path, rows, report.fit)

    logger.info(f"report written to {out_dir}")
    return [json_path, csv_path, svg_path]
