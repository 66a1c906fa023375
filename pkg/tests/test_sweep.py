import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from almost_commuting.cli import main
from almost_commuting.structures import StructureKind
from almost_commuting.sweep import (
    CSV_HEADER,
    SweepSpec,
    records_csv,
    run_sweep,
    run_trial,
    summarize,
)

GOLDEN = Path(__file__).parent / "golden"


def write_spec(path, **kw):
    spec = {"dims": [6], "kinds": ["real-orthogonal"], "deltas": [0.1], "trials": 1,
            "base_seed": 5, "output_path": str(path.with_suffix(".csv"))}
    spec.update(kw)
    path.write_text(json.dumps(spec))
    return path


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_header_exact():
    assert ",".join(CSV_HEADER) == (
        "dim,kind,target_delta,measured_delta,epsilon,residual,status,winding,trace_log,seed,wall_time_ms")


@pytest.mark.parametrize("bad", [
    {"trials": 0},
    {"deltas": [0.05, 0.1]},
    {"deltas": [0.1, 0.1]},
    {"deltas": [0.0]},
    {"kinds": ["general-unitary"]},
    {"kinds": ["hermitian"]},
])
def test_spec_validation(bad):
    d = {"dims": [4], "kinds": ["real-orthogonal"], "deltas": [0.1]}
    d.update(bad)
    with pytest.raises(ValueError):
        SweepSpec.from_dict(d)


def test_spec_unknown_field():
    with pytest.raises(ValueError):
        SweepSpec.from_dict({"dims": [4], "kinds": [], "deltas": [0.1], "color": "red"})


def test_seeds_depend_only_on_coordinates():
    a = SweepSpec([4, 6], ["real-orthogonal"], [0.1, 0.05], trials=3, base_seed=1)
    b = SweepSpec([6], ["real-orthogonal"], [0.1, 0.05], trials=3, base_seed=1)
    assert len({t[3] for t in a.tasks()}) == 12
    assert [t[3] for t in b.tasks()] == [t[3] for t in a.tasks() if t[0] == 6]


def test_one_cell_deterministic(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json")
    outs = []
    for name in ("a.csv", "b.csv"):
        assert main(["sweep", str(spec), "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    assert len(rows(outs[0].decode())) == 1


def test_parallel_matches_serial():
    spec = SweepSpec([6], ["real-orthogonal", "real-contraction"], [0.1, 0.05], trials=2, base_seed=3)
    assert records_csv(run_sweep(spec, jobs=2)) == records_csv(run_sweep(spec, jobs=1))


def test_empty_dims_header_only(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json", dims=[])
    assert main(["sweep", str(spec), "--out", str(tmp_path / "e.csv")]) == 0
    capsys.readouterr()
    assert (tmp_path / "e.csv").read_text() == ",".join(CSV_HEADER) + "\n"
    summary = json.loads((tmp_path / "e.csv.summary.json").read_text())
    assert summary == {"cells": [], "epsilon_delta_table": {}}


def test_unwritable_output(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json")
    code = main(["sweep", str(spec), "--out", str(tmp_path / "missing" / "x.csv")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_bad_spec_file(capsys, tmp_path):
    (tmp_path / "s.json").write_text("{not json")
    assert main(["sweep", str(tmp_path / "s.json")]) == 1


def test_sweep_golden(capsys, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["sweep", str(GOLDEN / "sweep_spec.json"), "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_bytes() == (GOLDEN / "sweep_golden.csv").read_bytes()
    summary = (tmp_path / "g.csv.summary.json").read_bytes()
    assert summary == (GOLDEN / "sweep_golden.summary.json").read_bytes()


def test_record_invariants():
    text = (GOLDEN / "sweep_golden.csv").read_text()
    for r in rows(text):
        if r["status"] != "Converged":
            continue
        target, measured = float(r["target_delta"]), float(r["measured_delta"])
        assert target / 4 <= measured <= 4 * target
        assert float(r["residual"]) <= 1e-10
        assert float(r["epsilon"]) >= 0
        if StructureKind.parse(r["kind"]) in (StructureKind.REAL_ORTHOGONAL,
                                              StructureKind.SYMPLECTIC_UNITARY):
            assert r["winding"] == "0"


def test_timing_flag_records_wall_time():
    kind = StructureKind.REAL_ORTHOGONAL
    assert run_trial(6, kind, 0.1, 1).wall_time_ms == 0.0
    assert run_trial(6, kind, 0.1, 1, timing=True).wall_time_ms > 0.0


def test_json_summary_output(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json", deltas=[0.1, 0.05], trials=2)
    assert main(["sweep", str(spec), "--json", "--out", str(tmp_path / "j.csv")]) == 0
    summary = json.loads(capsys.readouterr().out)
    cells = summary["cells"]
    assert [c["target_delta"] for c in cells] == [0.1, 0.05]
    for c in cells:
        assert set(c) == {"dim", "kind", "target_delta", "trials", "convergence_rate",
                          "median_measured_delta", "median_epsilon", "max_epsilon"}
        assert c["trials"] == 2
    assert summary["epsilon_delta_table"]["real-orthogonal/6"][0][0] == 0.1


def test_trials_and_seed_overrides(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json")
    main(["sweep", str(spec), "--trials", "3", "--seed", "99", "--out", str(tmp_path / "o.csv")])
    capsys.readouterr()
    got = rows((tmp_path / "o.csv").read_text())
    assert len(got) == 3
    expected = [t[3] for t in SweepSpec([6], ["real-orthogonal"], [0.1], 3, 99).tasks()]
    assert [int(r["seed"]) for r in got] == expected


def test_figure_written(capsys, tmp_path):
    spec = write_spec(tmp_path / "s.json", deltas=[0.1, 0.05], trials=2)
    fig = tmp_path / "eps.png"
    assert main(["sweep", str(spec), "--out", str(tmp_path / "f.csv"), "--figure", str(fig)]) == 0
    capsys.readouterr()
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


@pytest.mark.slow
def test_median_epsilon_nonincreasing_dim16():
    spec = SweepSpec([16], ["real-orthogonal"], [0.1, 0.05], trials=50, base_seed=2024)
    cells = summarize(run_sweep(spec))["cells"]
    med = [c["median_epsilon"] for c in cells]
    assert all(c["convergence_rate"] == 1.0 for c in cells)
    assert med[1] <= med[0]
    assert np.isfinite(med).all()
