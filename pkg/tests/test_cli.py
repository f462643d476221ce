import json

import pytest

from qmcmc.cli import main


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "lcu-state-prep" in out and "dual-overlap" in out


def test_run_json_report(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code = main([
        "run", "--experiment", "lcu-qae", "--shots", "1000", "--seed", "7",
        "--out", str(out_file),
    ])
    assert code == 0
    payload = json.loads(out_file.read_text())
    assert payload["derived"]["mean_estimate_histogram"] == {
        "0.5": payload["derived"]["prep_success_count"]
    }
    assert payload["bit_order"] == ["x", "c", "j1", "j0", "f", "a"]


def test_run_csv_format(capsys):
    assert main([
        "run", "--experiment", "lcu-state-prep", "--shots", "300", "--seed", "1",
        "--format", "csv",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "outcome,count,probability"
    assert sum(int(row.split(",")[1]) for row in lines[1:]) == 300


def test_run_with_noise_file(tmp_path, capsys):
    noise_file = tmp_path / "noise.json"
    noise_file.write_text('{"p1": 2e-5, "p2": 5e-3, "p_meas": 1e-3, "attach": "native"}')
    code = main([
        "run", "--experiment", "dual-overlap", "--shots", "400", "--seed", "3",
        "--noise", str(noise_file),
    ])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["derived"]["overlap_estimate"] < 1.0


def test_run_assert_threshold(capsys):
    ok = main([
        "run", "--experiment", "dual-overlap", "--shots", "200", "--seed", "2",
        "--assert", "0.05",
    ])
    assert ok == 0
    bad = main([
        "run", "--experiment", "dual-overlap", "--shots", "200", "--seed", "2",
        "--compare-to", "H2-1", "--assert", "0.05",
    ])
    assert bad == 1


def test_compare_subcommand(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    main([
        "run", "--experiment", "szegedy-state-prep", "--shots", "2000", "--seed", "4",
        "--out", str(out_file),
    ])
    capsys.readouterr()
    assert main(["compare", str(out_file), "--reference", "expected"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["tvd"] < 0.05


def test_spectra_subcommand(capsys):
    assert main(["spectra", "--encoding", "dual"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"]


def test_transpile_report_subcommand(capsys):
    assert main(["transpile-report"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert "szegedy-state-prep" in payload


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--experiment", "not-a-thing"])
    assert exc.value.code == 2
