"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL`` line; the lines are printed in the
pytest terminal summary (see conftest.py) and when this file is run directly.
The suites run from ``configs/acceptance.ini``, the same config the CLI uses.
"""
import os
import subprocess
import sys
import time

import pytest

from hyperunitary.calculus import COMM_TAGS, CONG_TAGS
from hyperunitary.cli import format_report, load_config
from hyperunitary.suites import PASS, Context, run_suite

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG = os.path.join(ROOT, "configs", "acceptance.ini")
LINES = {}


def report(n, ok, detail=""):
    LINES[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    print(LINES[n])


def sections():
    return {section: (suite, cfg) for section, suite, cfg in load_config(CONFIG)}


def run_section(name, workers=1, **override):
    suite, cfg = sections()[name]
    cfg = dict(cfg, **override)
    t0 = time.perf_counter()
    recs = run_suite(suite, cfg, Context(seed=int(cfg.get("seed", 0)), workers=workers))
    return recs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def results():
    """All sections once, single worker, with timings."""
    out = {}
    for name in sections():
        if name == "steinberg":
            continue
        out[name] = run_section(name)
    return out


def failing(recs):
    return [f"{r.instance} {r.check}" for r in recs if r.status != PASS]


def test_criterion_01_steinberg():
    suite, cfg = sections()["steinberg"]
    rings = cfg["rings"].split(",")
    bad, slowest = [], 0.0
    for r in rings:
        recs, dt = run_section("steinberg", rings=r)
        slowest = max(slowest, dt)
        bad += failing(recs)
        assert {rec.check for rec in recs} == {"R1", "R2", "R3", "R4", "R5", "R6"}
        assert all(rec.counts["instances"] > 0 for rec in recs)
    ok = not bad and slowest <= 300
    report(1, ok, f"{len(rings)} rings, slowest {slowest:.1f}s" + (f", failures {bad}" if bad else ""))
    assert ok


def test_criterion_02_enumeration_oracle(results):
    recs, dt = results["subgroups"]
    order = next(r for r in recs if r.check == "order")
    eugu = next(r for r in recs if r.check == "EU=GU")
    ok = (order.status == PASS and order.counts["order"] == 1451520 and order.counts["formula"] == 1451520
          and eugu.status == PASS and eugu.counts["GU"] == 1451520 and dt <= 300)
    report(2, ok, f"|EU| = {order.counts['order']}, |GU| = {eugu.counts['GU']}, {dt:.1f}s")
    assert ok


def test_criterion_03_quadratic_compatibility(results):
    recs, _ = results["identities"]
    q = [r for r in recs if r.check == "quadratic"]
    ok = len(q) == 1 and q[0].status == PASS and q[0].counts["pairs"] == 4096 ** 2
    report(3, ok, f"{q[0].counts['pairs']} pairs, {q[0].counts['failures']} failures")
    assert ok


def test_criterion_04_identities(results):
    recs, _ = results["identities"]
    ids = [r for r in recs if r.check != "quadratic"]
    rings = {r.instance for r in ids}
    ok = not failing(ids) and all(r.counts["triples"] >= 10 ** 4 for r in ids) and len(rings) == 6
    report(4, ok, f"{len(ids)} identity/ring records, failures {failing(ids)}")
    assert ok


def test_criterion_05_theorem1(results):
    recs, dt = results["theorem1"]
    checks = {r.check: r for r in recs}
    sampled = checks["sampled [FU(I), GU(J)] in RHS"]
    ok = (not failing(recs) and len(recs) == 3 and checks["enumerate RHS"].counts["cap"] <= 2 ** 22
          and sampled.counts["samples"] >= 1000 and dt <= 900)
    report(5, ok, f"|RHS| = {checks['enumerate RHS'].counts['order']}, {sampled.counts['samples']} samples, "
                  f"{dt:.1f}s")
    assert ok


def test_criterion_06_absolute_formula(results):
    recs, _ = results["absolute-formula"]
    sampled = recs[-1]
    ok = not failing(recs) and sampled.counts["samples"] >= 1000
    report(6, ok, f"|EU(2A)| = {recs[0].counts['order']}, {sampled.counts['failures']} failures")
    assert ok


def test_criterion_07_level_sandwich(results):
    recs, _ = results["levels"]
    ok = len(recs) == 3 and not failing(recs)
    report(7, ok, f"failures {failing(recs)}")
    assert ok


def test_criterion_08_comaximal(results):
    recs, _ = results["comaximal"]
    ok = len(recs) == 1 and recs[0].status == PASS and recs[0].counts["order"] == 1
    report(8, ok, f"|[EU(2A), EU(3A)]| = {recs[0].counts['order']}")
    assert ok


def test_criterion_09_calculus(results):
    recs, dt = results["calculus"]
    certs = [r for r in recs if r.instance != "anchors"]
    anchors = [r for r in recs if r.instance == "anchors"]
    expected = 2 * (len(CONG_TAGS) + len(COMM_TAGS))
    cert_ok = (len(certs) == expected and not failing(certs)
               and all(r.counts["instances"] >= 50 for r in certs)
               and all(r.counts["min_margin"] is None or r.counts["min_margin"] >= 0 for r in certs))
    anchor_bad = [(r.check, r.witnesses[:3]) for r in anchors if r.status != PASS]
    ok = cert_ok and not anchor_bad and dt <= 300
    detail = (f"{len(certs)} case/ring records, certificates {'ok' if cert_ok else 'FAIL'}, "
              f"{dt:.1f}s; anchor violations: {anchor_bad or 'none'}")
    report(9, ok, detail)
    assert cert_ok, failing(certs)
    assert not anchor_bad, f"anchor bound below mechanical bound: {anchor_bad}"


def test_criterion_10_genelm(results):
    recs, _ = results["subgroups"]
    g = next(r for r in recs if r.check == "genelm")
    ok = g.status == PASS and g.counts["generate(z)"] == g.counts["EU"]
    report(10, ok, f"|<Z>| = {g.counts['generate(z)']}, |EU| = {g.counts['EU']}")
    assert ok


def test_criterion_11_determinism(tmp_path, results):
    runs = load_config(CONFIG)
    base = []
    for section, suite, cfg in runs:
        base.append(results[section][0] if section in results else run_section(section)[0])
    first = format_report(runs, base)
    threaded = format_report(runs, [run_section(section, workers=2)[0] for section, _, _ in runs])
    path = tmp_path / "report.txt"
    proc = subprocess.run([sys.executable, "-m", "hyperunitary.cli", "verify", "--config", CONFIG,
                           "--report", str(path), "--workers", "1"], capture_output=True, text=True)
    again = path.read_text()
    ok = first == again == threaded
    report(11, ok, f"{len(first.splitlines())} report lines; same-seed rerun "
                   f"{'identical' if first == again else 'differs'}, 1 vs 2 workers "
                   f"{'identical' if first == threaded else 'differs'}; CLI exit {proc.returncode}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
