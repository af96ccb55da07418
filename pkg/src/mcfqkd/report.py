"""Report assembly for each CLI command and CSV/JSON rendering.

Reports are deterministic: no timestamps, floats written with ``repr`` so
they round-trip, and the resolved scenario is embedded so a report can be
re-run exactly.
"""

import csv
import io
import json
from dataclasses import dataclass

from . import __version__
from .leakage import DataChannel
from .planner import plan_allocation
from .qkd import sweep_distance, sweep_wavelength
from .scenario import scenario_to_dict

KEYRATE_COLUMNS = ("length_km", "eta", "Y0", "Q_mu", "E_mu", "Q1", "e1", "R_per_gate", "R_bps",
                   "mu", "Y1", "R_raw", "noise_hz", "status")
LEAKAGE_COLUMNS = ("row", "core", "wavelength_nm", "launch_dbm", "isolation_db", "leaked_dbm",
                   "detected_hz", "per_gate_prob")
PLAN_COLUMNS = ("rank", "core", "wavelength_nm", "launch_dbm", "per_gate_prob",
                "cumulative_prob", "selected")


@dataclass(frozen=True)
class Report:
    command: str
    columns: tuple
    rows: tuple
    metadata: dict
    summary: dict | None = None


def _metadata(command, scenario):
    return {
        "tool": "mcfqkd",
        "version": __version__,
        "command": command,
        "presets": {section: name for section, name in scenario.presets},
        "scenario": scenario_to_dict(scenario),
    }


def _keyrate_row(length_km, point_result, noise, status):
    row = dict.fromkeys(KEYRATE_COLUMNS)
    row["length_km"] = length_km
    row["status"] = status
    if point_result is not None:
        r = point_result
        row.update(eta=r.eta_total, Y0=r.Y0, Q_mu=r.Q_mu, E_mu=r.E_mu, Q1=r.Q1, e1=r.e1,
                   R_per_gate=r.R_per_gate, R_bps=r.R_bps, mu=r.mu, Y1=r.Y1, R_raw=r.R_raw)
    if noise is not None:
        row["noise_hz"] = noise.total_rate_hz
    return row


def _keyrate_rows(points, length_of):
    return tuple(_keyrate_row(length_of(p), p.result, p.noise, p.status) for p in points)


def leakage_report(scenario):
    link = scenario.link()
    blocks = [(None, scenario.allocation)]
    if scenario.launch_powers_dbm:
        blocks = [
            (p, scenario.allocation.with_channels(
                DataChannel(c.core, c.wavelength_nm, p) for c in scenario.allocation.data_channels))
            for p in scenario.launch_powers_dbm
        ]
    rows = []
    for power, alloc in blocks:
        noise = link.noise(scenario.length_km, alloc)  # SaturationError propagates
        for cn in noise.per_channel:
            ch = cn.channel
            rows.append({
                "row": "channel", "core": ch.core, "wavelength_nm": ch.wavelength_nm,
                "launch_dbm": ch.launch_dbm, "isolation_db": cn.isolation_db,
                "leaked_dbm": None if cn.leaked_w == 0 else cn.leaked_dbm,
                "detected_hz": cn.detected_rate_hz, "per_gate_prob": cn.per_gate_prob,
            })
        rows.append({**dict.fromkeys(LEAKAGE_COLUMNS), "row": "dark", "launch_dbm": power,
                     "detected_hz": noise.dark_rate_hz, "per_gate_prob": noise.dark_prob})
        rows.append({**dict.fromkeys(LEAKAGE_COLUMNS), "row": "total", "launch_dbm": power,
                     "detected_hz": noise.total_rate_hz,
                     "per_gate_prob": noise.total_per_gate_prob})
    return Report("leakage", LEAKAGE_COLUMNS, tuple(rows), _metadata("leakage", scenario))


def keyrate_report(scenario):
    result, noise = scenario.link().evaluate(scenario.length_km)
    status = "ok" if result.R_per_gate > 0 else "no-key"
    rows = (_keyrate_row(scenario.length_km, result, noise, status),)
    return Report("keyrate", KEYRATE_COLUMNS, rows, _metadata("keyrate", scenario))


def sweep_distance_report(scenario):
    points = sweep_distance(scenario.link(), scenario.distances_km)
    return Report("sweep-distance", KEYRATE_COLUMNS, _keyrate_rows(points, lambda p: p.x),
                  _metadata("sweep-distance", scenario))


def sweep_wavelength_report(scenario):
    points = sweep_wavelength(
        scenario.link(), scenario.wavelengths_nm, scenario.length_km,
        lambda wl: scenario.layout_allocation([wl]),
    )
    rows = tuple(
        {"wavelength_nm": p.x, **_keyrate_row(scenario.length_km, p.result, p.noise, p.status)}
        for p in points
    )
    return Report("sweep-wavelength", ("wavelength_nm",) + KEYRATE_COLUMNS, rows,
                  _metadata("sweep-wavelength", scenario))


def plan_report(scenario):
    plan = plan_allocation(scenario.planning_problem())  # NoBudgetError propagates
    chosen = set(plan.selected)
    rows = []
    running = scenario.detector.dark_count_prob_per_gate
    for i, (ch, prob) in enumerate(plan.ranking, start=1):
        running += prob
        rows.append({
            "rank": i, "core": ch.core, "wavelength_nm": ch.wavelength_nm,
            "launch_dbm": ch.launch_dbm, "per_gate_prob": prob,
            "cumulative_prob": running, "selected": ch in chosen,
        })
    summary = {
        "min_key_rate_bps": scenario.min_key_rate_bps,
        "achieved_key_rate_bps": plan.achieved_key_rate_bps,
        "selected_count": len(plan.selected),
        "candidate_count": len(plan.ranking),
        "noise_budget_per_gate": plan.noise_budget_per_gate,
        "total_per_gate_prob": plan.noise.total_per_gate_prob,
        "budget_utilization_pct": 100.0 * plan.budget_utilization,
        "mu": plan.key.mu,
    }
    return Report("plan", PLAN_COLUMNS, tuple(rows), _metadata("plan", scenario), summary)


BUILDERS = {
    "leakage": leakage_report,
    "keyrate": keyrate_report,
    "sweep-distance": sweep_distance_report,
    "sweep-wavelength": sweep_wavelength_report,
    "plan": plan_report,
}


def run_command(command, scenario):
    scenario.require(command)
    return BUILDERS[command](scenario)


# ---------------------------------------------------------------- rendering

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(report):
    buf = io.StringIO()
    buf.write(f"# {report.metadata['tool']} {report.metadata['version']} {report.command}\n")
    buf.write("# scenario: " + json.dumps(report.metadata["scenario"], sort_keys=True) + "\n")
    if report.summary is not None:
        for key, value in report.summary.items():
            buf.write(f"# {key}: {_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row[c]) for c in report.columns])
    return buf.getvalue()


def render_json(report):
    doc = {"metadata": report.metadata, "columns": list(report.columns),
           "rows": [[row[c] for c in report.columns] for row in report.rows]}
    if report.summary is not None:
        doc["summary"] = report.summary
    return json.dumps(doc, indent=2) + "\n"


def render_plan_table(report, scenario):
    """Cores x wavelengths grid: Q quantum slot, # selected, . dropped, blank not a candidate."""
    wavelengths = sorted({r["wavelength_nm"] for r in report.rows}
                         | {scenario.allocation.quantum_wavelength_nm})
    state = {(r["core"], r["wavelength_nm"]): "#" if r["selected"] else "." for r in report.rows}
    state[scenario.allocation.quantum_slot] = "Q"
    lines = ["core " + " ".join(f"{wl:>7g}" for wl in wavelengths)]
    for core in range(7):
        lines.append(f"{core:>4} " + " ".join(f"{state.get((core, wl), ' '):>7}" for wl in wavelengths))
    s = report.summary
    lines.append("")
    lines.append(f"selected {s['selected_count']}/{s['candidate_count']} slots")
    lines.append(f"key rate {s['achieved_key_rate_bps']:.1f} bps (floor {s['min_key_rate_bps']:g} bps)")
    lines.append(f"noise budget {s['noise_budget_per_gate']:.4g} per gate, "
                 f"{s['budget_utilization_pct']:.1f}% of leakage headroom used")
    return "\n".join(lines) + "\n"


def render(report, fmt, scenario=None):
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    if fmt == "table" and report.command == "plan":
        return render_plan_table(report, scenario)
    raise ValueError(f"format {fmt!r} not available for {report.command}")
