import json

from app.cli import EXIT_ERROR, EXIT_OK, main


def run_cli(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured


def test_build_core_for_identity_pair(capsys, fixtures_dir, tmp_path):
    rose = str(fixtures_dir / "rose2.json")
    status, captured = run_cli(capsys, "build-core", rose, rose, "--out", str(tmp_path))
    assert status == EXIT_OK
    summary = json.loads(captured.out)
    assert summary["area"] == 0
    assert (tmp_path / "core.json").exists()
    assert (tmp_path / "core.dot").exists()


def test_build_core_single_square(capsys, fixtures_dir, tmp_path):
    status, captured = run_cli(
        capsys, "build-core",
        str(fixtures_dir / "rose2.json"), str(fixtures_dir / "rose_single_square.json"),
        "--out", str(tmp_path),
    )
    assert status == EXIT_OK
    assert json.loads(captured.out)["area"] == 1
    saved = json.loads((tmp_path / "core.json").read_text(encoding="utf-8"))
    assert saved["schema_version"] == 1
    assert [r["index"] for r in saved["rectangles"]] == list(range(len(saved["rectangles"])))


def test_corrupt_json_exits_with_error(capsys, fixtures_dir, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{ not json", encoding="utf-8")
    status, captured = run_cli(capsys, "build-core", str(broken), str(fixtures_dir / "rose2.json"), "--out", str(tmp_path))
    assert status == EXIT_ERROR
    assert '"error": "input_error"' in captured.err


def test_non_object_graph_is_rejected(capsys, fixtures_dir, tmp_path):
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    status, _ = run_cli(capsys, "build-core", str(listed), str(fixtures_dir / "rose2.json"), "--out", str(tmp_path))
    assert status == EXIT_ERROR


def test_surgery_and_replay(capsys, fixtures_dir, tmp_path):
    pair = [str(fixtures_dir / "rose2.json"), str(fixtures_dir / "rose_single_square.json")]
    status, captured = run_cli(capsys, "surgery", *pair, "--policy", "seeded", "--seed", "9", "--out", str(tmp_path))
    assert status == EXIT_OK
    assert json.loads(captured.out)["areas"] == [1, 0]
    recorded = json.loads((tmp_path / "replay.json").read_text(encoding="utf-8"))
    assert recorded["seed"] == 9

    again = tmp_path / "again"
    replay = str(tmp_path / "replay.json")
    status, _ = run_cli(capsys, "surgery", *pair, "--replay", replay, "--out", str(again))
    assert status == EXIT_OK
    assert json.loads((again / "replay.json").read_text(encoding="utf-8"))["steps"] == recorded["steps"]


def test_verify_commands(capsys, fixtures_dir, tmp_path):
    pair = [str(fixtures_dir / "rose2.json"), str(fixtures_dir / "rose_single_square.json")]
    status, captured = run_cli(capsys, "verify-fellow-traveling", *pair, "--out", str(tmp_path))
    assert status == EXIT_OK
    assert json.loads(captured.out)["certified"] is True
    status, _ = run_cli(capsys, "verify-theorem2", *pair, "--seed", "2", "--seed2", "3", "--out", str(tmp_path))
    assert status == EXIT_OK
    chained = json.loads((tmp_path / "chained.json").read_text(encoding="utf-8"))
    assert chained["bound"] == 4


def test_oracle_window_too_small(capsys, fixtures_dir, tmp_path):
    pair = [str(fixtures_dir / "rose2.json"), str(fixtures_dir / "rose_single_square.json")]
    status, captured = run_cli(capsys, "oracle", *pair, "--window", "0", "--out", str(tmp_path))
    assert status == EXIT_ERROR
    assert "resource_limit" in captured.err


def test_export_dot_for_product_core(capsys, fixtures_dir, tmp_path):
    status, captured = run_cli(capsys, "export-dot", str(fixtures_dir / "seven_square_slice.json"), "--out", str(tmp_path))
    assert status == EXIT_OK
    assert json.loads(captured.out)["area"] == 16
    dot = (tmp_path / "seven_square_slice.dot").read_text(encoding="utf-8")
    assert dot.startswith("graph ")
    assert "run 0" in dot


def test_oracle_with_band(capsys, fixtures_dir, tmp_path):
    pair = [str(fixtures_dir / "rose2.json"), str(fixtures_dir / "rose_ab.json")]
    status, captured = run_cli(
        capsys, "oracle", *pair, "--depth", "3", "--period", "2", "--window", "2", "--band", "1", "--out", str(tmp_path),
    )
    assert status == EXIT_OK
    assert json.loads(captured.out)["agrees_with_core"] is True
    saved = json.loads((tmp_path / "oracle.json").read_text(encoding="utf-8"))
    assert saved["bounds"]["band"] == 1
    assert "band" in {v["reason"] for v in saved["verdicts"]}
