import pytest

from bikeframe.cli import main
from bikeframe.dataset import read_designs, read_results


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full CLI pass: generate -> check -> simulate, shared by tests."""
    root = tmp_path_factory.mktemp("cli")
    designs = root / "designs.csv"
    checks = root / "checks.csv"
    results = root / "results.csv"
    assert main(["generate", "--count", "12", "--seed", "4", "--out", str(designs)]) == 0
    assert main(["check", "--in", str(designs), "--out", str(checks)]) == 0
    assert main(["simulate", "--in", str(designs), "--out", str(results)]) == 0
    return root, designs, checks, results


def test_generate_writes_design_file(pipeline):
    _, designs, _, _ = pipeline
    table = read_designs(designs)
    assert len(table) == 12
    assert table.ids[0] == "00000"


def test_generate_is_byte_deterministic(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["generate", "--count", "5", "--seed", "8", "--out", str(a)]) == 0
    assert main(["generate", "--count", "5", "--seed", "8", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_report_shape(pipeline):
    _, _, checks, _ = pipeline
    lines = checks.read_text().splitlines()
    assert lines[0] == "row_id,feasible,violations"
    assert len(lines) == 13


def test_simulate_results(pipeline):
    _, _, _, results = pipeline
    table = read_results(results)
    assert len(table) == 12
    assert all(v in ("Valid", "StructuralFailure", "GeometricInfeasible", "BuildFailed", "SimFailed")
               for v in table.validity)


def test_simulate_rerun_byte_identical(pipeline, tmp_path):
    _, designs, _, results = pipeline
    again = tmp_path / "again.csv"
    assert main(["simulate", "--in", str(designs), "--out", str(again)]) == 0
    assert again.read_bytes() == results.read_bytes()


def test_simulate_parallel_matches_sequential(pipeline, tmp_path):
    _, designs, _, results = pipeline
    parallel = tmp_path / "par.csv"
    assert main(["simulate", "--in", str(designs), "--jobs", "2", "--out", str(parallel)]) == 0
    assert parallel.read_bytes() == results.read_bytes()


def test_empty_config_equals_defaults(pipeline, tmp_path):
    _, designs, _, results = pipeline
    config = tmp_path / "empty.cfg"
    config.write_text("")
    out = tmp_path / "cfg.csv"
    assert main(["simulate", "--in", str(designs), "--config", str(config), "--out", str(out)]) == 0
    assert out.read_bytes() == results.read_bytes()


def test_analyze_and_plot(pipeline, tmp_path):
    _, _, _, results = pipeline
    report_dir = tmp_path / "report"
    assert main(["analyze", "--in", str(results), "--out-dir", str(report_dir)]) == 0
    for name in ("validity_breakdown.csv", "pareto_ids.csv", "correlation_matrix.csv", "summary_stats.csv"):
        assert (report_dir / name).exists()
    header = (report_dir / "correlation_matrix.csv").read_text().splitlines()[0]
    assert header == (
        "objective,abs_inplane_dropout_vertical_disp,abs_transverse_bb_lateral_disp,"
        "abs_eccentric_bb_twist,inplane_safety_factor,mass"
    )

    plot_dir = tmp_path / "plots"
    assert main(["plot", "--in", str(results), "--out-dir", str(plot_dir)]) == 0
    assert (plot_dir / "correlation_heatmap.svg").exists()
    assert (plot_dir / "pairplot.png").exists()
    assert len(list(plot_dir.glob("scatter_*.csv"))) == 10


def test_analyze_subset(pipeline, tmp_path):
    _, _, _, results = pipeline
    report_dir = tmp_path / "sub"
    assert main(
        ["analyze", "--in", str(results), "--out-dir", str(report_dir), "--subset", "6", "--seed", "2"]
    ) == 0
    counts = report_dir / "validity_breakdown.csv"
    total = sum(int(line.split(",")[1]) for line in counts.read_text().splitlines()[1:])
    assert total == 6


def test_converge(pipeline, tmp_path):
    _, designs, _, _ = pipeline
    out = tmp_path / "sweep.csv"
    assert main(
        [
            "converge",
            "--in", str(designs),
            "--row", "00001",
            "--case", "inplane",
            "--subdivisions", "1,2",
            "--out", str(out),
        ]
    ) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("elements_per_tube,")


def test_converge_unknown_row_exits_3(pipeline, tmp_path):
    _, designs, _, _ = pipeline
    code = main(
        ["converge", "--in", str(designs), "--row", "zzz", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 3


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--count", "0", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--count", "3", "--out", str(tmp_path / "x.csv"), "--bogus"])
    assert exc.value.code == 2


def test_schema_error_exits_3(pipeline, tmp_path):
    _, designs, _, _ = pipeline
    broken = tmp_path / "broken.csv"
    lines = designs.read_text().splitlines()
    header = lines[0].split(",")
    drop = header.index("stack")
    trimmed = [",".join(c for i, c in enumerate(line.split(",")) if i != drop) for line in lines]
    broken.write_text("\n".join(trimmed) + "\n")
    assert main(["simulate", "--in", str(broken), "--out", str(tmp_path / "o.csv")]) == 3


def test_unknown_config_key_exits_3(pipeline, tmp_path):
    _, designs, _, _ = pipeline
    config = tmp_path / "bad.cfg"
    config.write_text("frame_count = 7\n")
    assert main(
        ["simulate", "--in", str(designs), "--config", str(config), "--out", str(tmp_path / "o.csv")]
    ) == 3


def test_missing_input_exits_4(tmp_path):
    assert main(["simulate", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv")]) == 4


def test_infeasible_rows_do_not_fail_simulate(pipeline, tmp_path):
    _, designs, _, _ = pipeline
    lines = designs.read_text().splitlines()
    header = lines[0].split(",")
    angle = header.index("head_tube_angle_deg")
    row = lines[1].split(",")
    row[0] = "bad"
    row[angle] = "190.0"
    lines.append(",".join(row))
    spiked = tmp_path / "spiked.csv"
    spiked.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out.csv"
    assert main(["simulate", "--in", str(spiked), "--out", str(out)]) == 0
    table = read_results(out)
    assert table.records[-1].status == "GeometricInfeasible"
