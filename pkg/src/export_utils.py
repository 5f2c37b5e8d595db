"""
Export utilities for generating DOT, CSV, Markdown and one-line summaries.
"""

import csv
import io
from typing import Any, Dict, Iterable, List, Mapping, Optional

import graphviz

from src.frame import TwoFrame, is_reflexive


# -------------------------------
# Frame → Graphviz DOT
# -------------------------------


def frame_to_dot(
    frame: TwoFrame,
    name: str = "frame",
    valuation: Optional[Mapping[str, Iterable[str]]] = None,
    highlight: Optional[str] = None,
) -> str:
    """Render a frame as DOT source.

    R edges point upwards; each E-cluster is a same-rank subgraph joined by
    dashed undirected edges. Reflexive loops are drawn only when R is not
    reflexive everywhere.
    """
    dot = graphviz.Digraph(name=name)
    dot.attr(rankdir="BT")
    dot.attr("node", shape="circle", fontsize="10")

    true_at: Dict[str, List[str]] = {w: [] for w in frame.worlds}
    for var, worlds in (valuation or {}).items():
        for w in worlds:
            true_at[w].append(var)

    for i, cluster in enumerate(frame.e_classes()):
        with dot.subgraph(name=f"e_{i}") as sg:
            sg.attr(rank="same")
            for idx in cluster:
                world = frame.worlds[idx]
                label = world if not true_at[world] else f"{world}\\n{','.join(true_at[world])}"
                attrs = {"penwidth": "2"} if world == highlight else {}
                sg.node(world, label=label, **attrs)
            members = [frame.worlds[idx] for idx in cluster]
            for a, b in zip(members, members[1:]):
                sg.edge(a, b, style="dashed", dir="none", constraint="false")

    draw_loops = not is_reflexive(frame.r)
    for a, b in frame.r_pairs():
        if a == b and not draw_loops:
            continue
        dot.edge(a, b)

    return dot.source


# -------------------------------
# CSV Export
# -------------------------------


def frames_to_csv(frames: List[Dict[str, Any]]) -> str:
    """Convert enumerated frames (frame_to_dict payloads plus "depth") to CSV."""
    if not frames:
        return ""

    output = io.StringIO()

    fieldnames = ["index", "size", "worlds", "R", "E", "depth"]

    writer = csv.DictWriter(output, fieldnames=fieldnames)
    writer.writeheader()

    for idx, frame in enumerate(frames, 1):
        writer.writerow({
            "index": idx,
            "size": len(frame.get("worlds", [])),
            "worlds": " ".join(frame.get("worlds", [])),
            "R": "; ".join(f"{a}>{b}" for a, b in frame.get("R", [])),
            "E": "; ".join(f"{a}~{b}" for a, b in frame.get("E", [])),
            "depth": "" if frame.get("depth") is None else frame["depth"],
        })

    return output.getvalue()


# -------------------------------
# Markdown Export
# -------------------------------


def suite_to_markdown(report: Dict[str, Any]) -> str:
    """Convert a suite report payload to Markdown."""
    status = "passed" if report.get("passed") else "FAILED"
    lines = [
        f"# Suite {report.get('suite', '?')}",
        "",
        f"- **Size cap:** {report.get('size_cap', 'N/A')}",
        f"- **Theorem-backed:** {'yes' if report.get('theorem_backed') else 'no (empirical)'}",
        f"- **Checked:** {report.get('checked', 0)}",
        f"- **Counterexamples:** {report.get('failures', 0)}",
        f"- **Status:** {status}",
    ]
    notes = report.get("notes", [])
    if notes:
        lines.append(f"- **Notes:** {'; '.join(notes)}")
    lines.append("")

    examples = report.get("counterexamples", [])
    for i, example in enumerate(examples, 1):
        lines.append(f"## Counterexample {i}")
        lines.append("")
        for key, value in example.items():
            lines.append(f"- **{key}:** `{value}`")
        lines.append("")

    return "\n".join(lines)


def filtration_to_markdown(report: Dict[str, Any]) -> str:
    """Convert a filtration report payload to Markdown: points, step log and checks."""
    checks = report.get("checks") or {}
    lines = [
        f"# Filtration ({report.get('variant', '?')})",
        "",
        f"- **Formula:** `{report.get('formula', '')}`",
        f"- **Points:** {len(report.get('worlds', []))}",
        f"- **Rounds:** {report.get('rounds', 'N/A')}",
        f"- **Depth:** {report.get('depth', 'N/A')} (bound {report.get('depth_bound', 'N/A')})",
        f"- **Checks passed:** {'yes' if checks.get('passed') else 'no'}",
        "",
        "## Points",
        "",
    ]
    for point in report.get("points", []):
        lines.append(f"- `{point.get('world')}` ({point.get('tag')}, round {point.get('round')})")
    lines.append("")

    lines.append("## Steps")
    lines.append("")
    for step in report.get("log", []):
        formula = f" `{step['formula']}`" if step.get("formula") else ""
        added = " new" if step.get("new_point") else ""
        lines.append(f"- r{step.get('round')}.{step.get('inner')} {step.get('step')}{formula} -> `{step.get('point')}`{added}")
    lines.append("")

    if checks:
        lines.append("## Checks")
        lines.append("")
        for key, value in checks.items():
            lines.append(f"- {key}: {value}")
        lines.append("")

    return "\n".join(lines)


# -------------------------------
# Summary
# -------------------------------


def format_frame_summary(frame: Dict[str, Any]) -> str:
    worlds = frame.get("worlds", [])
    parts = [f"{len(worlds)} worlds", f"{len(frame.get('R', []))} R-pairs"]
    if frame.get("E"):
        parts.append(f"{len(frame['E'])} E-pairs")
    return " • ".join(parts)


def format_outcome_summary(outcome: Dict[str, Any]) -> str:
    """One line for a countermodel search outcome."""
    text = f"{outcome.get('formula')} in {outcome.get('logic')}: {outcome.get('status')}"
    witness = outcome.get("witness")
    if witness:
        text += f" at {witness.get('world')} ({format_frame_summary(witness)})"
    else:
        text += f" (sizes ≤ {outcome.get('bound')}, {outcome.get('frames_examined')} frames)"
    return text


def format_suite_summary(report: Dict[str, Any]) -> str:
    status = "passed" if report.get("passed") else "failed"
    return (
        f"{report.get('suite')}: {status} • {report.get('checked', 0)} checked"
        f" • {report.get('failures', 0)} counterexamples"
    )
