#include "meghasim/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>

namespace meghasim {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

double get_number(const json& obj, const std::string& where, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path_of(where, key) + ": expected a number");
  return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& where, const char* key, std::uint64_t dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint32_t get_u32(const json& obj, const std::string& where, const char* key, std::uint32_t dflt) {
  auto v = get_uint(obj, where, key, dflt);
  if (v > UINT32_MAX) throw ConfigError(path_of(where, key) + ": value too large");
  return static_cast<std::uint32_t>(v);
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path_of(where, key) + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path_of(where, key) + ": expected true or false");
  return v.get<bool>();
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

void parse_workload(const json& w, const std::string& base_dir, WorkloadConfig& out) {
  only_keys(w, "workload", {"trace", "synthetic", "mixed", "poisson", "downsample"});
  int sources = int(w.contains("trace")) + int(w.contains("synthetic")) + int(w.contains("mixed"));
  require(sources == 1, "workload: exactly one of trace, synthetic or mixed is required");
  if (w.contains("trace")) {
    out.source = WorkloadConfig::Source::kTrace;
    out.trace = get_string(w, "workload", "trace", "");
    require(!out.trace.empty(), "workload.trace: empty path");
    std::filesystem::path p(out.trace);
    if (p.is_relative() && !base_dir.empty()) out.trace = (std::filesystem::path(base_dir) / p).lexically_normal().string();
  } else if (w.contains("synthetic")) {
    out.source = WorkloadConfig::Source::kSynthetic;
    const auto& s = w.at("synthetic");
    const std::string at = "workload.synthetic";
    only_keys(s, at, {"jobs", "tasks_per_job", "duration", "load"});
    auto& sc = out.synthetic;
    sc.jobs = get_u32(s, at, "jobs", sc.jobs);
    sc.tasks_per_job = get_u32(s, at, "tasks_per_job", sc.tasks_per_job);
    sc.duration = get_number(s, at, "duration", sc.duration);
    sc.load = get_number(s, at, "load", sc.load);
    require(sc.jobs > 0 && sc.tasks_per_job > 0, at + ": jobs and tasks_per_job must be positive");
    require(sc.duration > 0.0, at + ".duration must be positive (seconds)");
    require(sc.load > 0.0 && sc.load <= 1.0, at + ".load must be in (0, 1]");
  } else {
    out.source = WorkloadConfig::Source::kMixed;
    const auto& m = w.at("mixed");
    const std::string at = "workload.mixed";
    only_keys(m, at, {"jobs", "short_fraction", "short_duration", "long_duration", "short_tasks", "long_tasks", "load"});
    auto& mp = out.mixed;
    mp.jobs = get_u32(m, at, "jobs", mp.jobs);
    mp.short_fraction = get_number(m, at, "short_fraction", mp.short_fraction);
    mp.load = get_number(m, at, "load", mp.load);
    auto range = [&](const char* key, auto& lo, auto& hi) {
      if (!m.contains(key)) return;
      const auto& r = m.at(key);
      require(r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number(),
              at + "." + key + ": expected [lo, hi]");
      using T = std::remove_reference_t<decltype(lo)>;
      if constexpr (std::is_integral_v<T>) {
        require(r[0].is_number_unsigned() && r[1].is_number_unsigned(), at + "." + key + ": expected integers");
      }
      lo = r[0].get<T>();
      hi = r[1].get<T>();
    };
    range("short_duration", mp.short_duration_lo, mp.short_duration_hi);
    range("long_duration", mp.long_duration_lo, mp.long_duration_hi);
    range("short_tasks", mp.short_tasks_lo, mp.short_tasks_hi);
    range("long_tasks", mp.long_tasks_lo, mp.long_tasks_hi);
    require(mp.jobs > 0, at + ".jobs must be positive");
    require(mp.load > 0.0 && mp.load <= 1.0, at + ".load must be in (0, 1]");
  }
  if (w.contains("poisson")) {
    const auto& p = w.at("poisson");
    only_keys(p, "workload.poisson", {"mean_iat"});
    require(p.contains("mean_iat"), "workload.poisson.mean_iat is required");
    out.poisson_mean_iat = get_number(p, "workload.poisson", "mean_iat", 1.0);
    require(*out.poisson_mean_iat > 0.0, "workload.poisson.mean_iat must be positive (seconds)");
  }
  if (w.contains("downsample")) {
    const auto& d = w.at("downsample");
    only_keys(d, "workload.downsample", {"factor"});
    require(d.contains("factor"), "workload.downsample.factor is required");
    out.downsample_factor = get_u32(d, "workload.downsample", "factor", 1);
    require(*out.downsample_factor >= 1, "workload.downsample.factor must be >= 1");
  }
}

}  // namespace

bool WorkloadConfig::operator==(const WorkloadConfig& o) const {
  if (source != o.source || poisson_mean_iat != o.poisson_mean_iat || downsample_factor != o.downsample_factor)
    return false;
  switch (source) {
    case Source::kTrace: return trace == o.trace;
    case Source::kSynthetic:
      return synthetic.jobs == o.synthetic.jobs && synthetic.tasks_per_job == o.synthetic.tasks_per_job &&
             synthetic.duration == o.synthetic.duration && synthetic.load == o.synthetic.load;
    case Source::kMixed: {
      const auto &a = mixed, &b = o.mixed;
      return a.jobs == b.jobs && a.short_fraction == b.short_fraction && a.load == b.load &&
             a.short_duration_lo == b.short_duration_lo && a.short_duration_hi == b.short_duration_hi &&
             a.long_duration_lo == b.long_duration_lo && a.long_duration_hi == b.long_duration_hi &&
             a.short_tasks_lo == b.short_tasks_lo && a.short_tasks_hi == b.short_tasks_hi &&
             a.long_tasks_lo == b.long_tasks_lo && a.long_tasks_hi == b.long_tasks_hi;
    }
  }
  return false;
}

Topology TopologyConfig::resolve() const {
  if (explicit_counts()) return build_topology(gm_count, lm_count, workers_per_partition);
  return resolve_topology(target_workers);
}

RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir) {
  only_keys(doc, "", {"scheduler", "topology", "net_delay", "heartbeat", "heartbeat_offset", "batch_limit",
                      "owner_notify", "seed", "event_log", "event_limit", "sparrow", "eagle", "pigeon", "workload"});
  RunConfig c;
  c.scheduler = get_string(doc, "", "scheduler", c.scheduler);
  try {
    parse_scheduler(c.scheduler);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheduler: ") + e.what());
  }
  if (doc.contains("topology")) {
    const auto& t = doc.at("topology");
    only_keys(t, "topology", {"gm_count", "lm_count", "workers_per_partition", "target_workers"});
    bool counts = t.contains("gm_count") || t.contains("lm_count") || t.contains("workers_per_partition");
    require(counts != t.contains("target_workers"),
            "topology: give either gm_count/lm_count/workers_per_partition or target_workers");
    if (counts) {
      c.topology = TopologyConfig{get_u32(t, "topology", "gm_count", 0), get_u32(t, "topology", "lm_count", 0),
                                  get_u32(t, "topology", "workers_per_partition", 0), 0};
      require(c.topology.gm_count > 0 && c.topology.lm_count > 0 && c.topology.workers_per_partition > 0,
              "topology: gm_count, lm_count and workers_per_partition must all be >= 1");
    } else {
      c.topology = TopologyConfig{0, 0, 0, get_uint(t, "topology", "target_workers", 0)};
      require(c.topology.target_workers > 0, "topology.target_workers must be >= 1");
    }
  }
  c.net_delay = get_number(doc, "", "net_delay", c.net_delay);
  require(c.net_delay > 0.0, "net_delay must be positive (seconds)");
  c.heartbeat = get_number(doc, "", "heartbeat", c.heartbeat);
  require(c.heartbeat >= 0.0, "heartbeat must be >= 0 (seconds; 0 disables)");
  c.heartbeat_offset = get_number(doc, "", "heartbeat_offset", c.heartbeat_offset);
  require(c.heartbeat_offset >= 0.0, "heartbeat_offset must be >= 0 (seconds)");
  c.batch_limit = get_u32(doc, "", "batch_limit", c.batch_limit);
  require(c.batch_limit >= 1, "batch_limit must be >= 1");
  c.owner_notify = get_string(doc, "", "owner_notify", c.owner_notify);
  try {
    parse_owner_notify(c.owner_notify);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("owner_notify: ") + e.what());
  }
  c.seed = get_uint(doc, "", "seed", c.seed);
  c.event_log = get_bool(doc, "", "event_log", c.event_log);
  c.event_limit = get_uint(doc, "", "event_limit", c.event_limit);
  require(c.event_limit > 0, "event_limit must be positive");
  if (doc.contains("sparrow")) {
    const auto& s = doc.at("sparrow");
    only_keys(s, "sparrow", {"d"});
    c.sparrow.d = get_u32(s, "sparrow", "d", c.sparrow.d);
    require(c.sparrow.d >= 1, "sparrow.d must be >= 1");
  }
  if (doc.contains("eagle")) {
    const auto& e = doc.at("eagle");
    only_keys(e, "eagle", {"threshold", "short_fraction", "d"});
    c.eagle_threshold = get_number(e, "eagle", "threshold", c.eagle_threshold);
    c.eagle.short_fraction = get_number(e, "eagle", "short_fraction", c.eagle.short_fraction);
    c.eagle.d = get_u32(e, "eagle", "d", c.eagle.d);
    require(c.eagle_threshold > 0.0, "eagle.threshold must be positive (seconds)");
    require(c.eagle.short_fraction >= 0.0 && c.eagle.short_fraction < 1.0, "eagle.short_fraction must be in [0, 1)");
    require(c.eagle.d >= 1, "eagle.d must be >= 1");
  }
  if (doc.contains("pigeon")) {
    const auto& p = doc.at("pigeon");
    only_keys(p, "pigeon", {"W", "reserved_per_group", "groups"});
    c.pigeon.weight = get_u32(p, "pigeon", "W", c.pigeon.weight);
    c.pigeon.reserved_per_group = get_u32(p, "pigeon", "reserved_per_group", c.pigeon.reserved_per_group);
    c.pigeon.groups = get_u32(p, "pigeon", "groups", c.pigeon.groups);
    require(c.pigeon.weight >= 1, "pigeon.W must be >= 1");
  }
  if (doc.contains("workload")) parse_workload(doc.at("workload"), base_dir, c.workload);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config(doc, dir);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["scheduler"] = c.scheduler;
  if (c.topology.explicit_counts()) {
    j["topology"] = {{"gm_count", c.topology.gm_count},
                     {"lm_count", c.topology.lm_count},
                     {"workers_per_partition", c.topology.workers_per_partition}};
  } else {
    j["topology"] = {{"target_workers", c.topology.target_workers}};
  }
  j["net_delay"] = c.net_delay;
  j["heartbeat"] = c.heartbeat;
  j["heartbeat_offset"] = c.heartbeat_offset;
  j["batch_limit"] = c.batch_limit;
  j["owner_notify"] = c.owner_notify;
  j["seed"] = c.seed;
  j["event_log"] = c.event_log;
  j["event_limit"] = c.event_limit;
  j["sparrow"] = {{"d", c.sparrow.d}};
  j["eagle"] = {{"threshold", c.eagle_threshold}, {"short_fraction", c.eagle.short_fraction}, {"d", c.eagle.d}};
  j["pigeon"] = {{"W", c.pigeon.weight}, {"reserved_per_group", c.pigeon.reserved_per_group},
                 {"groups", c.pigeon.groups}};
  nlohmann::ordered_json w;
  const auto& wc = c.workload;
  switch (wc.source) {
    case WorkloadConfig::Source::kTrace: w["trace"] = wc.trace; break;
    case WorkloadConfig::Source::kSynthetic:
      w["synthetic"] = {{"jobs", wc.synthetic.jobs},
                        {"tasks_per_job", wc.synthetic.tasks_per_job},
                        {"duration", wc.synthetic.duration},
                        {"load", wc.synthetic.load}};
      break;
    case WorkloadConfig::Source::kMixed: {
      const auto& m = wc.mixed;
      w["mixed"] = {{"jobs", m.jobs},
                    {"short_fraction", m.short_fraction},
                    {"short_duration", {m.short_duration_lo, m.short_duration_hi}},
                    {"long_duration", {m.long_duration_lo, m.long_duration_hi}},
                    {"short_tasks", {m.short_tasks_lo, m.short_tasks_hi}},
                    {"long_tasks", {m.long_tasks_lo, m.long_tasks_hi}},
                    {"load", m.load}};
      break;
    }
  }
  if (wc.poisson_mean_iat) w["poisson"] = {{"mean_iat", *wc.poisson_mean_iat}};
  if (wc.downsample_factor) w["downsample"] = {{"factor", *wc.downsample_factor}};
  j["workload"] = w;
  return j;
}

std::string config_digest(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

SimParams to_params(const RunConfig& c) {
  SimParams p;
  p.net_delay = SimTime::seconds(c.net_delay);
  if (p.net_delay <= SimTime{}) throw ConfigError("net_delay rounds to zero nanoseconds");
  p.heartbeat = SimTime::seconds(c.heartbeat);
  p.heartbeat_offset = SimTime::seconds(c.heartbeat_offset);
  p.batch_limit = c.batch_limit;
  p.owner_notify = parse_owner_notify(c.owner_notify);
  p.short_threshold = c.eagle_threshold;
  p.seed = c.seed;
  p.event_limit = c.event_limit;
  p.event_log = c.event_log;
  p.sparrow = c.sparrow;
  p.eagle = c.eagle;
  p.pigeon = c.pigeon;
  return p;
}

Workload build_workload(const RunConfig& c, const Topology& topo) {
  const auto& wc = c.workload;
  Workload w;
  try {
    switch (wc.source) {
      case WorkloadConfig::Source::kTrace: w = parse_trace_file(wc.trace); break;
      case WorkloadConfig::Source::kSynthetic:
        w = generate_fixed_load(wc.synthetic.jobs, wc.synthetic.tasks_per_job, wc.synthetic.duration,
                                wc.synthetic.load, topo.total_workers(), c.seed);
        break;
      case WorkloadConfig::Source::kMixed: w = generate_mixed(wc.mixed, topo.total_workers(), c.seed); break;
    }
    if (wc.downsample_factor) w = downsample(w, *wc.downsample_factor, c.seed);
    if (wc.poisson_mean_iat) w = poissonize(w, *wc.poisson_mean_iat, c.seed);
  } catch (const TraceParseError& e) {
    throw ConfigError(wc.trace + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  if (w.empty()) throw ConfigError("workload has no jobs");
  return w;
}

}  // namespace meghasim
