import json

import pytest

import cmfs.scoring
from cmfs import __version__
from cmfs.goldens import DEFAULT_CASES, format_report, load_cases, regenerate_goldens, render_case

CASES = load_cases(DEFAULT_CASES)


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_golden_reproduces(case):
    assert case.expected.read_text(encoding="utf-8") == render_case(case)


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_golden_records_seed_and_version(case):
    banner = case.expected.read_text(encoding="utf-8").splitlines()[0]
    assert f"seed={case.seed}" in banner
    assert f"version={__version__}" in banner
    assert f"provenance={case.provenance}" in banner


def test_unchanged_code_gives_empty_report():
    changes = regenerate_goldens(CASES, write=False)
    assert format_report(changes) == ""
    assert all(c.status == "unchanged" for c in changes)


def _tie_case(tmp_path, provenance="DERIVED"):
    data = tmp_path / "ties.csv"
    data.write_text("a,b,c,cls\n1,1,5,x\n2,2,3,y\n3,3,4,x\n4,4,1,y\n")
    cases = [
        {"name": "ties", "args": ["rank", str(data), "--method", "pearson", "--format", "delimited"],
         "expected": "ties.csv.out", "provenance": provenance},
    ]
    path = tmp_path / "cases.json"
    path.write_text(json.dumps(cases))
    return load_cases(path)


def test_changed_tie_break_reports_drift(tmp_path, monkeypatch):
    cases = _tie_case(tmp_path)
    first = regenerate_goldens(cases, require_clean=False)
    assert [c.status for c in first] == ["new"]

    original = cmfs.scoring._order

    def reversed_ties(scores, degenerate, higher_is_better=True):
        order = original(scores, degenerate, higher_is_better)
        key = -scores if higher_is_better else scores
        return tuple(sorted(order, key=lambda i: (bool(degenerate[i]), float(key[i]), -i)))

    monkeypatch.setattr(cmfs.scoring, "_order", reversed_ties)
    changes = regenerate_goldens(cases, write=False)
    assert [(c.name, c.status) for c in changes] == [("ties", "changed")]
    assert "ties" in format_report(changes)


def test_paper_drift_is_blocked(tmp_path):
    cases = _tie_case(tmp_path, provenance="PAPER")
    cases[0].expected.write_text("stale\n")
    changes = regenerate_goldens(cases, require_clean=False)
    assert changes[0].status == "blocked"
    assert cases[0].expected.read_text() == "stale\n"
    assert "PAPER-ANCHORED DRIFT" in format_report(changes)
    changes = regenerate_goldens(cases, require_clean=False, accept_paper=True)
    assert changes[0].status == "changed"
    assert cases[0].expected.read_text() == render_case(cases[0])


def test_bad_provenance_rejected(tmp_path):
    path = tmp_path / "cases.json"
    path.write_text(json.dumps([{"name": "x", "args": [], "expected": "x", "provenance": "GUESS"}]))
    with pytest.raises(ValueError):
        load_cases(path)
