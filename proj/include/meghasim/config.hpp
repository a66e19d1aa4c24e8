#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "meghasim/cluster.hpp"
#include "meghasim/scheduler.hpp"
#include "meghasim/workload.hpp"

namespace meghasim {

// Bad config file, bad flag value, or unreadable input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologyConfig {
  // Either explicit counts or a target size for resolve_topology.
  std::uint32_t gm_count = 0;
  std::uint32_t lm_count = 0;
  std::uint32_t workers_per_partition = 0;
  std::uint64_t target_workers = 0;

  bool explicit_counts() const { return gm_count != 0; }
  Topology resolve() const;
};

struct SyntheticConfig {
  std::uint32_t jobs = 200;
  std::uint32_t tasks_per_job = 100;
  double duration = 1.0;  // seconds
  double load = 0.5;
};

struct WorkloadConfig {
  enum class Source { kTrace, kSynthetic, kMixed };
  Source source = Source::kSynthetic;
  std::string trace;  // path
  SyntheticConfig synthetic;
  MixedWorkloadParams mixed;
  std::optional<double> poisson_mean_iat;  // seconds
  std::optional<std::uint32_t> downsample_factor;

  bool operator==(const WorkloadConfig& o) const;
};

struct RunConfig {
  std::string scheduler = "megha";
  TopologyConfig topology{0, 0, 0, 1000};
  double net_delay = 0.0005;  // seconds
  double heartbeat = 5.0;     // seconds, 0 disables
  double heartbeat_offset = 0.0;
  std::uint32_t batch_limit = 50;
  std::string owner_notify = "immediate";
  std::uint64_t seed = 1;
  bool event_log = false;
  std::uint64_t event_limit = 2'000'000'000ULL;
  SparrowParams sparrow;
  double eagle_threshold = 90.0;  // seconds; also the short/long cut for every scheduler
  EagleParams eagle;
  PigeonParams pigeon;
  WorkloadConfig workload;
};

// Parses a config document. Unknown keys, wrong types and out-of-range
// values raise ConfigError naming the offending key. Relative trace paths
// are resolved against base_dir when it is non-empty.
RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = {});
RunConfig load_config(const std::string& path);

// Every field written out, defaults included. parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const RunConfig& c);
// FNV-1a over the compact echo, as 16 hex digits.
std::string config_digest(const RunConfig& c);

SimParams to_params(const RunConfig& c);
Workload build_workload(const RunConfig& c, const Topology& topo);

}  // namespace meghasim
