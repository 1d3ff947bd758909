import json

import numpy as np
import pytest

from branchspace import Configuration
from branchspace.cli import main, parse_linear_field
from branchspace.config import write_configuration
from branchspace.hausdorff import trajectory_to_dict, two_particle_merge_trajectory
from branchspace.measure import GridFunction, make_translated_bump_path, write_grid


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# global flags
# ---------------------------------------------------------------------------

def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("branchspace ")


def test_schema_dump(capsys):
    code, out, _ = run(capsys, "--schema")
    assert code == 0
    schemas = json.loads(out)
    assert {"configuration", "trajectory", "chart", "branched_path", "section", "grid_function"} <= set(schemas)


def test_no_command_is_parse_error(capsys):
    code, _, err = run(capsys)
    assert code == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# hausdorff
# ---------------------------------------------------------------------------

def test_hausdorff_files(capsys, tmp_path):
    write_configuration(Configuration.from_points([[0.0], [2.0]]), tmp_path / "u.json")
    write_configuration(Configuration.from_points([[1.0]]), tmp_path / "v.json")
    code, out, _ = run(capsys, "hausdorff", str(tmp_path / "u.json"), str(tmp_path / "v.json"))
    assert code == 0
    assert json.loads(out)["distance"] == 1.0

    code, out, _ = run(
        capsys, "hausdorff", str(tmp_path / "u.json"), str(tmp_path / "v.json"), "--indexed"
    )
    assert json.loads(out)["distance"] == 1.0


def test_hausdorff_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "hausdorff", str(tmp_path / "nope.json"), str(tmp_path / "nope2.json"))
    assert code == 4


def test_hausdorff_malformed_json_is_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "hausdorff", str(bad), str(bad))
    assert code == 2


def test_hausdorff_bench(capsys):
    code, out, _ = run(capsys, "hausdorff", "--bench", "500", "--dim", "2")
    assert code == 0
    rec = json.loads(out)
    assert rec["difference"] <= 1e-12
    assert rec["n"] == 500


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_demo_merge_event(capsys):
    code, out, _ = run(capsys, "simulate", "--demo", "two-particle-merge")
    assert code == 0
    events = [json.loads(line) for line in out.strip().splitlines()]
    assert events == [{"t": 1.0, "kind": "merge", "from": 2, "to": 1, "at": [0.0]}]


def test_simulate_input_file(capsys, tmp_path):
    traj = two_particle_merge_trajectory([0.0, 0.5, 1.0])
    path = tmp_path / "traj.json"
    path.write_text(json.dumps(trajectory_to_dict(traj)))
    code, out, _ = run(capsys, "simulate", "--input", str(path), "--merge-tol", "1.0")
    assert code == 0
    assert json.loads(out.strip().splitlines()[0])["kind"] == "merge"


def test_simulate_nonmonotone_times_rejected(capsys, tmp_path):
    traj = trajectory_to_dict(two_particle_merge_trajectory([0.0, 0.5, 1.0]))
    traj["times"] = [0.0, 0.5, 0.5]
    path = tmp_path / "traj.json"
    path.write_text(json.dumps(traj))
    code, _, _ = run(capsys, "simulate", "--input", str(path))
    assert code == 2


# ---------------------------------------------------------------------------
# chart
# ---------------------------------------------------------------------------

def test_chart_demo(capsys):
    code, out, _ = run(capsys, "chart", "--demo", "three-points")
    assert code == 0
    rec = json.loads(out)
    assert rec["radii"] == [0.5, 0.5, 1.0]
    assert rec["disjoint"] is True


def test_chart_duplicate_points_rejected(capsys, tmp_path):
    path = tmp_path / "dup.json"
    path.write_text(json.dumps({"dim": 1, "points": [[0.0], [0.0]]}))
    code, _, _ = run(capsys, "chart", "--input", str(path))
    assert code == 2


# ---------------------------------------------------------------------------
# branched-path
# ---------------------------------------------------------------------------

def test_branched_path_demo_validates(capsys):
    code, out, _ = run(capsys, "branched-path", "--demo", "paper-circle")
    assert code == 0
    rec = json.loads(out)
    assert rec["valid"] is True
    assert rec["stages"] == [1, 2, 1]
    assert len(rec["junctions"]) == 2
    for junction in rec["junctions"]:
        for check in junction["checks"]:
            assert check["residuals"]["3"] <= 1e-4


def test_branched_path_perturbed_fails_with_gap(capsys):
    code, _, err = run(capsys, "branched-path", "--demo", "paper-circle", "--perturb", "0.1")
    assert code == 3
    assert "0.09999999999" in err or "0.1" in err


def test_branched_path_dot_output(capsys):
    code, out, _ = run(capsys, "branched-path", "--demo", "circle-split", "--format", "dot")
    assert code == 0
    assert out.startswith("digraph") and out.count("->") == 4


# ---------------------------------------------------------------------------
# bifurcate / section
# ---------------------------------------------------------------------------

def test_bifurcate_csv_fixed_point(capsys):
    code, out, _ = run(capsys, "bifurcate", "--a-min", "2.5", "--a-max", "3.2", "--steps", "8")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "A,orbit_point"
    at_25 = [float(line.split(",")[1]) for line in lines[1:] if line.startswith("2.5,")]
    assert at_25 == [pytest.approx(0.6, abs=1e-10)]


def test_section_linear_field(capsys):
    code, out, _ = run(
        capsys, "section", "--field", "2.5+1.0*x", "--grid-n", "21", "--format", "json"
    )
    assert code == 0
    rec = json.loads(out)
    assert len(rec["grid"]) == 21
    cards = [len(f) for f in rec["fibers"]]
    assert cards[0] == 1 and 2 in cards
    kinds = {(L["cardinality_before"], L["cardinality_after"]) for L in rec["loci"]}
    assert (1, 2) in kinds


def test_parse_linear_field():
    f = parse_linear_field("2.5+1.0*x")
    assert f(np.array([0.25])) == pytest.approx(2.75)
    g = parse_linear_field("3.0")
    assert g(np.array([9.0])) == 3.0
    h = parse_linear_field("4.0-2.0*x")
    assert h(np.array([0.5])) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        parse_linear_field("sin(x)")


def test_section_field_out_of_range_is_parse_error(capsys):
    code, _, _ = run(capsys, "section", "--field", "5.0", "--grid-n", "3")
    assert code == 2


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def test_measure_demo_translated(capsys):
    code, out, _ = run(capsys, "measure", "--demo", "translated-bump")
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_measure_demo_growing(capsys):
    code, out, err = run(capsys, "measure", "--demo", "growing-bump")
    assert code == 3
    assert json.loads(out)["violating_step"] == 3


def test_measure_frame_directory(capsys, tmp_path):
    frames, region = make_translated_bump_path()
    frame_dir = tmp_path / "frames"
    frame_dir.mkdir()
    for i, f in enumerate(frames):
        write_grid(f, frame_dir / f"frame_{i:03d}.json")
    region_fn = GridFunction(region.astype(float), frames[0].spacing)
    write_grid(region_fn, tmp_path / "region.json")
    code, out, _ = run(
        capsys, "measure", "--frames", str(frame_dir), "--region", str(tmp_path / "region.json")
    )
    assert code == 0
    assert json.loads(out)["ok"] is True


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def test_byte_identical_reruns(capsys, tmp_path):
    args_sets = [
        ("bifurcate", "--a-min", "2.5", "--a-max", "3.3", "--steps", "6"),
        ("section", "--field", "2.9+0.3*x", "--grid-n", "9"),
        ("branched-path", "--demo", "paper-circle", "--samples", "64"),
        ("simulate", "--demo", "two-particle-merge"),
        ("chart", "--demo", "three-points"),
    ]
    for argv in args_sets:
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2


def test_output_file_matches_stdout(capsys, tmp_path):
    out_file = tmp_path / "events.jsonl"
    code, _, _ = run(
        capsys, "simulate", "--demo", "two-particle-merge", "--output", str(out_file)
    )
    assert code == 0
    _, stdout, _ = run(capsys, "simulate", "--demo", "two-particle-merge")
    assert out_file.read_text() == stdout
