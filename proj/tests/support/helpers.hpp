#pragma once

// Shared fixtures and hand-rolled generators for the test binaries.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "meghasim/random.hpp"
#include "meghasim/scheduler.hpp"
#include "meghasim/workload.hpp"

namespace meghasim::testing {

inline constexpr std::int64_t kHop = 500'000;  // default delta in ticks

inline JobSpec job(std::uint32_t id, double submit, std::vector<double> durations) {
  JobSpec j;
  j.job_id = id;
  j.submit_time = submit;
  for (std::uint32_t k = 0; k < durations.size(); ++k) j.tasks.push_back(TaskSpec{id, k, durations[k]});
  return j;
}

// Jobs given as (submit, durations), numbered in order.
inline Workload jobs(std::initializer_list<std::pair<double, std::vector<double>>> list) {
  Workload w;
  for (const auto& [submit, durs] : list) w.push_back(job(static_cast<std::uint32_t>(w.size()), submit, durs));
  return w;
}

inline SimParams params(std::uint64_t seed = 1) {
  SimParams p;
  p.seed = seed;
  return p;
}

inline double ticks_to_s(SimTime t) { return t.to_seconds(); }

// Random workload: up to max_jobs jobs of up to max_tasks tasks, durations on
// a 1 ms grid so every value is exact in ticks. Long jobs appear when
// long_share > 0.
inline Workload random_workload(Rng& rng, std::uint32_t max_jobs, std::uint32_t max_tasks, double max_gap,
                                double long_share = 0.0) {
  Workload w;
  auto n = 1 + static_cast<std::uint32_t>(rng.below(max_jobs));
  double t = 0.0;
  for (std::uint32_t j = 0; j < n; ++j) {
    t += static_cast<double>(rng.below(static_cast<std::uint64_t>(max_gap * 1000) + 1)) / 1000.0;
    bool is_long = rng.uniform() < long_share;
    auto k = 1 + static_cast<std::uint32_t>(rng.below(max_tasks));
    std::vector<double> d;
    for (std::uint32_t i = 0; i < k; ++i) {
      double base = is_long ? 91.0 + static_cast<double>(rng.below(10)) : 0.001 * (1 + rng.below(5000));
      d.push_back(base);
    }
    w.push_back(job(j, t, std::move(d)));
  }
  return w;
}

inline SchedulerKind kinds[] = {SchedulerKind::kMegha, SchedulerKind::kSparrow, SchedulerKind::kEagle,
                                SchedulerKind::kPigeon};

}  // namespace meghasim::testing
