#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "meghasim/config.hpp"
#include "meghasim/runner.hpp"

using namespace meghasim;
using nlohmann::json;

namespace {

RunConfig parse(const std::string& text) { return parse_config(json::parse(text)); }

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("meghasim_unit_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    RunConfig c = parse("{}");
    CHECK(c.scheduler == "megha");
    CHECK(c.topology.target_workers == 1000);
    CHECK(c.net_delay == 0.0005);
    CHECK(c.heartbeat == 5.0);
    CHECK(c.batch_limit == 50);
    CHECK(c.workload.source == WorkloadConfig::Source::kSynthetic);
    auto p = to_params(c);
    CHECK(p.net_delay == SimTime::ticks(500'000));
    CHECK(p.short_threshold == 90.0);
  }

  TEST_CASE("unknown keys are named") {
    CHECK_THROWS_WITH_AS(parse(R"({"sheduler": "megha"})"), "unknown key 'sheduler'", ConfigError);
    CHECK_THROWS_WITH_AS(parse(R"({"pigeon": {"w": 2}})"), "unknown key 'pigeon.w'", ConfigError);
    CHECK_THROWS_WITH_AS(parse(R"({"workload": {"synthetic": {"load": 0.5, "iat": 1}}})"),
                         "unknown key 'workload.synthetic.iat'", ConfigError);
  }

  TEST_CASE("bad values are refused") {
    CHECK_THROWS_AS(parse(R"({"scheduler": "yarn"})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"net_delay": 0})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"batch_limit": 0})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"batch_limit": -3})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"heartbeat": "5"})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"owner_notify": "later"})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"topology": {"gm_count": 2, "target_workers": 9}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"workload": {"synthetic": {"load": 1.5}}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"workload": {"trace": "a", "synthetic": {}}})"), ConfigError);
    CHECK_THROWS_AS(parse(R"({"eagle": {"short_fraction": 1.0}})"), ConfigError);
  }

  TEST_CASE("echo re-parses to the same config") {
    const char* docs[] = {
        "{}",
        R"({"scheduler": "pigeon", "topology": {"gm_count": 2, "lm_count": 3, "workers_per_partition": 4},
            "pigeon": {"W": 3, "reserved_per_group": 1, "groups": 2}, "seed": 9,
            "workload": {"mixed": {"jobs": 40, "short_duration": [2, 3], "long_tasks": [5, 6]},
                         "poisson": {"mean_iat": 0.5}, "downsample": {"factor": 2}}})",
        R"({"scheduler": "eagle", "eagle": {"threshold": 50, "short_fraction": 0.2, "d": 3},
            "owner_notify": "heartbeat-only", "heartbeat": 2.5, "event_log": true})",
    };
    for (const char* d : docs) {
      auto c = parse(d);
      auto echo = to_json(c);
      auto again = parse_config(json::parse(echo.dump()));
      CHECK(to_json(again).dump() == echo.dump());
      CHECK(again.workload == c.workload);
      CHECK(config_digest(again) == config_digest(c));
    }
  }

  TEST_CASE("digest is stable and sensitive") {
    RunConfig a;
    RunConfig b;
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a).size() == 16);
    b.seed = 2;
    CHECK(config_digest(a) != config_digest(b));
  }

  TEST_CASE("relative trace paths follow the config file") {
    auto dir = scratch("trace");
    {
      std::ofstream(dir / "t.trace") << "0 1 1.0\n0.5 2 1.0 2.0\n";
      std::ofstream(dir / "c.json") << R"({"workload": {"trace": "t.trace"}, "topology": {"target_workers": 10}})";
    }
    auto c = load_config((dir / "c.json").string());
    auto w = build_workload(c, c.topology.resolve());
    CHECK(w.size() == 2);
    std::ofstream(dir / "bad.json") << R"({"workload": {"trace": "missing.trace"}})";
    auto bad = load_config((dir / "bad.json").string());
    CHECK_THROWS_AS(build_workload(bad, bad.topology.resolve()), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "nope.json").string()), ConfigError);
  }
}

TEST_SUITE("runner") {
  TEST_CASE("report files are byte-identical across runs") {
    RunConfig c;
    c.workload.synthetic = SyntheticConfig{20, 10, 1.0, 0.7};
    c.topology = TopologyConfig{2, 2, 5, 0};
    auto d1 = scratch("rep1"), d2 = scratch("rep2");
    write_report(d1.string(), execute(c));
    write_report(d2.string(), execute(c));
    for (const char* f : {"summary.json", "jobs.csv", "config.json"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK_FALSE(std::filesystem::exists(d1 / "events.log"));
  }

  TEST_CASE("compare shares one workload and refuses mismatches") {
    RunConfig base;
    base.workload.synthetic = SyntheticConfig{10, 5, 1.0, 0.5};
    base.topology = TopologyConfig{2, 2, 3, 0};
    std::vector<RunConfig> cs;
    for (const char* s : {"megha", "sparrow", "eagle", "pigeon"}) {
      auto c = base;
      c.scheduler = s;
      cs.push_back(c);
    }
    auto rows = compare(cs, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1].metrics.summary.scheduler == "sparrow");
    for (const auto& r : rows) CHECK(r.metrics.summary.tasks == 50);
    std::ostringstream csv;
    write_compare_csv(csv, rows);
    CHECK(csv.str().rfind("scheduler,workers,jobs,mean_delay", 0) == 0);
    cs[2].seed = 5;
    CHECK_THROWS_AS(compare(cs), ConfigError);
    cs[2].seed = base.seed;
    cs[3].workload.synthetic.jobs = 11;
    CHECK_THROWS_AS(compare(cs), ConfigError);
  }

  TEST_CASE("sweep covers loads x sizes") {
    RunConfig base;
    base.workload.synthetic = SyntheticConfig{10, 20, 1.0, 0.5};
    auto rows = sweep(base, {0.2, 0.6}, {100, 200}, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].load == 0.2);
    CHECK(rows[1].load == 0.6);
    CHECK(rows[2].dc_size >= 198);
    CHECK_THROWS_AS(sweep(base, {1.2}, {100}), ConfigError);
    CHECK_THROWS_AS(sweep(base, {}, {100}), ConfigError);
    base.workload.source = WorkloadConfig::Source::kMixed;
    CHECK_THROWS_AS(sweep(base, {0.5}, {100}), ConfigError);
  }
}
