"""Golden-file corpus: run recorded CLI invocations and diff against committed output.

Usage::

    python -m cmfs.goldens                 # regenerate, refusing [PAPER] drift
    python -m cmfs.goldens --check         # report drift only, exit 1 on any
    python -m cmfs.goldens --accept-paper  # also overwrite [PAPER]-anchored cases

A case file is a JSON list of objects with keys ``name``, ``args`` (CLI
argument list), ``expected`` (path relative to the case file),
``provenance`` (``"PAPER"`` or ``"DERIVED"``) and ``note``.
"""
from __future__ import annotations

import argparse
import difflib
import io
import json
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from cmfs import __version__
from cmfs.cli import main as cli_main

PROVENANCE = ("PAPER", "DERIVED")
DEFAULT_CASES = Path(__file__).resolve().parents[2] / "tests" / "goldens" / "cases.json"


@dataclass(frozen=True)
class GoldenCase:
    name: str
    args: tuple[str, ...]
    expected: Path
    provenance: str
    note: str = ""

    @property
    def seed(self) -> str:
        if "--seed" in self.args:
            return self.args[self.args.index("--seed") + 1]
        return "none"


@dataclass(frozen=True)
class CaseChange:
    name: str
    status: str  # unchanged | new | changed | blocked
    provenance: str
    diff: str = ""

    @property
    def drifted(self) -> bool:
        return self.status in ("changed", "blocked")


def load_cases(path: str | Path = DEFAULT_CASES) -> list[GoldenCase]:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    cases = []
    for entry in raw:
        if entry["provenance"] not in PROVENANCE:
            raise ValueError(f"case {entry['name']}: provenance must be one of {PROVENANCE}")
        cases.append(
            GoldenCase(
                name=entry["name"],
                args=tuple(entry["args"]),
                expected=path.parent / entry["expected"],
                provenance=entry["provenance"],
                note=entry.get("note", ""),
            )
        )
    names = [c.name for c in cases]
    if len(set(names)) != len(names):
        raise ValueError("duplicate golden case names")
    return cases


def render_case(case: GoldenCase) -> str:
    """Run the case in-process and return its golden text (banner + CLI output)."""
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(list(case.args), stdout=out, stderr=err)
    if code != 0:
        raise RuntimeError(f"golden case {case.name} exited {code}: {err.getvalue().strip()}")
    banner = (
        f"# golden: {case.name} provenance={case.provenance} seed={case.seed} version={__version__}\n"
    )
    return banner + out.getvalue()


def _diff_summary(old: str, new: str, name: str, context: int = 1, limit: int = 40) -> str:
    lines = list(
        difflib.unified_diff(old.splitlines(), new.splitlines(), f"{name} (committed)", f"{name} (current)", n=context, lineterm="")
    )
    if len(lines) > limit:
        lines = lines[:limit] + [f"... {len(lines) - limit} more diff lines"]
    return "\n".join(lines)


def _working_tree_dirty(paths: list[Path]) -> bool:
    try:
        proc = subprocess.run(
            ["git", "status", "--porcelain", "--", *map(str, paths)],
            cwd=paths[0].parent,
            capture_output=True,
            text=True,
            check=False,
        )
    except (OSError, IndexError):
        return False
    return proc.returncode == 0 and bool(proc.stdout.strip())


def regenerate_goldens(
    cases: list[GoldenCase],
    write: bool = True,
    accept_paper: bool = False,
    require_clean: bool = True,
) -> list[CaseChange]:
    """Re-run every case and update expected files that drifted.

    Drift in a ``PAPER`` case is reported as ``blocked`` and left on disk
    unless ``accept_paper`` is set.
    """
    if write and require_clean and _working_tree_dirty([c.expected for c in cases]):
        raise RuntimeError("golden files have uncommitted changes; commit or pass --allow-dirty")
    changes = []
    for case in cases:
        current = render_case(case)
        if not case.expected.exists():
            status, diff = "new", ""
        else:
            committed = case.expected.read_text(encoding="utf-8")
            if committed == current:
                changes.append(CaseChange(case.name, "unchanged", case.provenance))
                continue
            diff = _diff_summary(committed, current, case.name)
            status = "blocked" if case.provenance == "PAPER" and not accept_paper else "changed"
        if write and status != "blocked":
            case.expected.parent.mkdir(parents=True, exist_ok=True)
            case.expected.write_text(current, encoding="utf-8", newline="\n")
        changes.append(CaseChange(case.name, status, case.provenance, diff))
    return changes


def format_report(changes: list[CaseChange]) -> str:
    drifted = [c for c in changes if c.status != "unchanged"]
    if not drifted:
        return ""
    out = []
    for c in drifted:
        marker = "!!! PAPER-ANCHORED DRIFT, NOT ACCEPTED" if c.status == "blocked" else c.status
        out.append(f"[{c.provenance}] {c.name}: {marker}")
        if c.diff:
            out.append(c.diff)
    return "\n".join(out) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m cmfs.goldens")
    parser.add_argument("--cases", type=Path, default=DEFAULT_CASES)
    parser.add_argument("--check", action="store_true", help="report drift without writing")
    parser.add_argument("--accept-paper", action="store_true", help="overwrite drifted PAPER-anchored goldens")
    parser.add_argument("--allow-dirty", action="store_true", help="skip the clean-working-tree check")
    args = parser.parse_args(argv)
    try:
        changes = regenerate_goldens(
            load_cases(args.cases),
            write=not args.check,
            accept_paper=args.accept_paper,
            require_clean=not args.allow_dirty,
        )
    except RuntimeError as exc:
        print(f"goldens: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(format_report(changes))
    if any(c.status == "blocked" for c in changes):
        return 1
    if args.check and any(c.status != "unchanged" for c in changes):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
