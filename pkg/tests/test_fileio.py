import pytest

from citegeo import fileio


def test_text_round_trip(tmp_path):
    path = tmp_path / "a.txt"
    fileio.write_text(path, "hello\n")
    assert path.read_text(encoding="utf-8") == "hello\n"
    assert not path.with_name("a.txt.partial").exists()


def test_json_round_trip_sorts_keys(tmp_path):
    path = tmp_path / "a.json"
    fileio.write_json(path, {"b": 2, "a": 1})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert fileio.read_json(path) == {"a": 1, "b": 2}


def test_jsonl_round_trip(tmp_path):
    path = tmp_path / "rows.jsonl"
    rows = [{"id": 1}, {"id": 2, "x": "y"}]
    fileio.write_jsonl(path, rows)
    assert fileio.read_jsonl(path) == rows


def test_failed_write_leaves_partial_marker_not_final_file(tmp_path):
    path = tmp_path / "out.bin"
    with pytest.raises(TypeError):
        fileio.write_bytes(path, object())  # not bytes: fails during the staged write
    assert not path.exists()
    assert path.with_name("out.bin.partial").exists()


def test_successful_write_replaces_previous_content(tmp_path):
    path = tmp_path / "out.txt"
    fileio.write_text(path, "old")
    fileio.write_text(path, "new")
    assert path.read_text(encoding="utf-8") == "new"
