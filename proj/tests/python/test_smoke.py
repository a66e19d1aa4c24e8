import csv
import io
import json

import pytest

import meghasim

SMALL = {
    "topology": {"gm_count": 2, "lm_count": 2, "workers_per_partition": 3},
    "workload": {"synthetic": {"jobs": 10, "tasks_per_job": 4, "duration": 1.0, "load": 0.5}},
}


def test_idle_floor():
    cfg = {
        "topology": {"gm_count": 3, "lm_count": 3, "workers_per_partition": 3},
        "workload": {"synthetic": {"jobs": 1, "tasks_per_job": 1, "duration": 1.0, "load": 0.01}},
    }
    r = meghasim.run(cfg)
    assert r["summary"]["job_delay"]["median"] == 0.0015
    assert r["jobs"][0]["delay"] == pytest.approx(0.0015)
    assert r["topology"] == [3, 3, 3]


def test_run_writes_report(tmp_path):
    r = meghasim.run(SMALL, out_dir=tmp_path)
    assert r["summary"]["tasks"] == 40
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary == r["summary"]
    rows = list(csv.DictReader((tmp_path / "jobs.csv").open()))
    assert len(rows) == 10
    assert rows[0]["class"] == "short"


def test_compare_all_schedulers():
    configs = [dict(SMALL, scheduler=s) for s in ("megha", "sparrow", "eagle", "pigeon")]
    results, text = meghasim.compare(configs, threads=2)
    assert [r["summary"]["scheduler"] for r in results] == ["megha", "sparrow", "eagle", "pigeon"]
    table = list(csv.DictReader(io.StringIO(text)))
    assert table[0]["mean_factor"] == "1.0000"


def test_sweep():
    rows = meghasim.sweep(SMALL, [0.2, 0.8], [12])
    assert [r["load"] for r in rows] == [0.2, 0.8]
    assert all(r["dc_size"] == 12 for r in rows)


def test_deterministic():
    a = meghasim.run(dict(SMALL, scheduler="eagle", seed=3))
    b = meghasim.run(dict(SMALL, scheduler="eagle", seed=3))
    assert a == b


def test_config_errors():
    with pytest.raises(meghasim.ConfigError, match="unknown key 'schedulr'"):
        meghasim.run({"schedulr": "megha"})
    with pytest.raises(ValueError):
        meghasim.run({"scheduler": "yarn"})


def test_normalized_config_round_trips():
    full = meghasim.normalize_config(SMALL)
    assert full["scheduler"] == "megha"
    assert meghasim.normalize_config(full) == full
    assert meghasim.config_digest(full) == meghasim.config_digest(SMALL)


def test_workload_helpers():
    jobs = meghasim.generate_fixed_load(5, 10, 1.0, 0.5, 100)
    assert len(jobs) == 5
    assert jobs[1][0] == pytest.approx(0.2)
    assert meghasim.compute_load(jobs, 100) == pytest.approx(0.5)
    text = meghasim.serialize_trace(jobs)
    assert meghasim.parse_trace(text) == jobs
    with pytest.raises(meghasim.TraceParseError, match="expected 3 durations, found 2"):
        meghasim.parse_trace("0.0 3 1.0 2.0\n")
    mixed = meghasim.generate_mixed(jobs=50, dc_size=200)
    assert len(mixed) == 50


def test_percentile_and_topology():
    assert meghasim.percentile(list(range(1, 101)), 0.95) == 95
    assert meghasim.resolve_topology(13000) == (8, 10, 163)
    with pytest.raises(ValueError):
        meghasim.percentile([], 0.5)
