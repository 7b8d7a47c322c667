import json
import subprocess
import sys

import pytest

from hyperunitary import catalog
from hyperunitary.cli import EXIT_CAP, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, load_config, main, parse_report
from hyperunitary.suites import ConfigError, Record

SMALL = """
[DEFAULT]
seed = 3

[steinberg]
rings = sympl-z2
relations = R2,R4

[absolute-formula]
ring = sympl-z4
ideal = 2A
samples = 50

[calculus]
rings = dyadic-symplectic
instances = 2
lmax = 2
mmax = 2
anchor_range = 2
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_list(capsys):
    code, out, _ = run(["catalog", "list"], capsys)
    assert code == EXIT_OK
    names = [line.split("\t")[0] for line in out.splitlines()]
    assert names == catalog.names()
    assert "order GU(6)=1451520" in out


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "hyperunitary.cli", "catalog", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "sympl-z4" in res.stdout


def test_config_keys_keep_case(tmp_path):
    runs = load_config(write(tmp_path, "[levels]\nI = I\nJ = J\n"))
    assert runs == [("levels", "levels", {"I": "I", "J": "J"})]


@pytest.mark.parametrize("text", ["[nosuch]\nx = 1\n", "", "not an ini file"])
def test_config_errors(tmp_path, text, capsys):
    code, _, err = run(["verify", "--config", write(tmp_path, text)], capsys)
    assert code == EXIT_CONFIG
    assert "config error" in err


def test_missing_config_file(tmp_path, capsys):
    code, _, _ = run(["verify", "--config", str(tmp_path / "absent.ini")], capsys)
    assert code == EXIT_CONFIG


def test_bad_values_are_config_errors(tmp_path, capsys):
    assert run(["verify", "--config", write(tmp_path, "[steinberg]\nseed = x\n")], capsys)[0] == EXIT_CONFIG
    assert run(["verify", "--config", write(tmp_path, "[steinberg]\nrings = nosuch\n")], capsys)[0] == EXIT_CONFIG
    assert run(["verify", "--config", write(tmp_path, SMALL), "--suite", "nosuch"], capsys)[0] == EXIT_CONFIG
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "[x]\nsuite = bogus\n"))


def test_cap_exceeded_exit(tmp_path, capsys):
    cfg = write(tmp_path, "[subgroups]\norder_ring = sympl-z2\ngenelm_ring =\n")
    code, out, _ = run(["verify", "--config", cfg, "--cap", "1000"], capsys)
    assert code == EXIT_CAP
    recs = parse_report(out)
    assert [r.status for r in recs] == ["cap"]
    assert recs[0].counts["cap"] == 1000


def test_report_format_and_suite_filter(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    code, out, err = run(["verify", "--config", cfg, "--suite", "steinberg"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("# section=steinberg suite=steinberg")
    assert "seed=3" in lines[0]
    recs = parse_report(out)
    assert {r.check for r in recs} == {"R2", "R4"}
    assert all(r.status == "pass" for r in recs)
    for line in lines:
        if line.startswith("{"):
            assert Record.from_line(line).to_line() == line
            json.loads(line)
    assert "# summary" in lines and any(l.startswith("records=") for l in lines)
    # timing stays on stderr
    assert "records in" in err
    assert not any("records in" in l for l in lines)


def test_reports_are_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    reports = []
    for workers in ("1", "1", "2"):
        path = tmp_path / f"r{len(reports)}.txt"
        code, _, _ = run(["verify", "--config", cfg, "--report", str(path), "--workers", workers], capsys)
        reports.append(path.read_bytes())
        assert code in (EXIT_OK, EXIT_FAIL)
    assert reports[0] == reports[1] == reports[2]


def test_seed_changes_sampled_witnesses_not_structure(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    _, a, _ = run(["verify", "--config", cfg, "--suite", "absolute-formula", "--seed", "1"], capsys)
    _, b, _ = run(["verify", "--config", cfg, "--suite", "absolute-formula", "--seed", "2"], capsys)
    ra, rb = parse_report(a), parse_report(b)
    assert [(r.check, r.status) for r in ra] == [(r.check, r.status) for r in rb]


def test_cache_directory_reused(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    cache = tmp_path / "cache"
    _, a, _ = run(["verify", "--config", cfg, "--suite", "absolute-formula", "--cache", str(cache)], capsys)
    assert any(cache.iterdir())
    _, b, _ = run(["verify", "--config", cfg, "--suite", "absolute-formula", "--cache", str(cache)], capsys)
    assert a == b
