import database
import view_results


def test_save_and_load_runs(tmp_path):
    db = str(tmp_path / "runs.db")
    first = database.save_run("group", ["group", "--group", "cyclic:6"], 0, 0, "{}\n", db)
    second = database.save_run("set", ["set", "--op", "triangle"], 0, 1, "{}\n", db)
    assert second == first + 1

    runs = database.load_runs_df(db)
    assert list(runs["command"]) == ["group", "set"]
    assert list(runs["exit_code"]) == [0, 1]
    assert runs["argv"].iloc[0] == "group --group cyclic:6"
    assert database.get_last_updated(db) is not None

    stats = database.get_db_stats(db)
    assert stats["runs"] == 2
    assert stats["exists"]


def test_missing_archive(tmp_path):
    db = str(tmp_path / "none.db")
    assert database.load_runs_df(db) is None
    assert database.get_last_updated(db) is None
    assert database.get_db_stats(db) is None


def test_viewer(tmp_path, capsys):
    db = str(tmp_path / "runs.db")
    database.save_run("verify", ["verify", "freiman"], 0, 0, "{}\n", db)
    database.save_run("set", ["set", "--op", "triangle"], 0, 1, "{}\n", db)
    view_results.main(db)
    out = capsys.readouterr().out
    assert "[OK] Loaded 2 runs" in out
    assert "PROPERTY VIOLATIONS" in out
    assert "set --op triangle" in out


def test_viewer_without_runs(tmp_path, capsys):
    view_results.main(str(tmp_path / "none.db"))
    assert "[ERROR] No runs found" in capsys.readouterr().out
