#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "meghasim/metrics.hpp"
#include "meghasim/scheduler.hpp"

using namespace meghasim;
using namespace meghasim::testing;

namespace {

// Omniscient scheduler on an unbounded, zero-latency DC: every task gets its
// own worker the instant the job arrives.
double oracle_ideal(const JobSpec& j) {
  double finish = j.submit_time;
  for (const auto& t : j.tasks) finish = std::max(finish, j.submit_time + t.duration);
  return finish - j.submit_time;
}

double brute_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  // Smallest rank r with r >= p*n, done in integers over a 1e-6 grid of p.
  auto scaled = static_cast<std::uint64_t>(std::llround(p * 1e6));
  std::size_t r = 1;
  while (r < n && static_cast<std::uint64_t>(r) * 1'000'000 < scaled * n) ++r;
  return v[r - 1];
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("percentile examples") {
    CHECK(percentile({1, 2, 3}, 0.5) == 2);
    std::vector<double> hundred;
    for (int k = 1; k <= 100; ++k) hundred.push_back(k);
    CHECK(percentile(hundred, 0.95) == 95);
    CHECK(percentile(hundred, 0.0) == 1);
    CHECK(percentile(hundred, 1.0) == 100);
    for (double p : {0.0, 0.3, 0.5, 1.0}) CHECK(percentile({7}, p) == 7);
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1}, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1}, -0.1), std::invalid_argument);
  }

  TEST_CASE("percentile matches a full-sort oracle on 1000 multisets") {
    Rng rng(2024);
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<double> v(1 + rng.below(60));
      for (auto& x : v) x = static_cast<double>(rng.below(20));
      double p = static_cast<double>(rng.below(1'000'001)) / 1e6;
      REQUIRE(percentile(v, p) == brute_percentile(v, p));
    }
  }

  TEST_CASE("ideal_jct is the longest task") {
    CHECK(ideal_jct(job(0, 0, {1, 2, 5})) == 5);
    CHECK(ideal_jct(job(0, 0, {3})) == 3);
    CHECK(ideal_jct(job(0, 0, {1, 1, 1})) == 1);
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
      auto w = random_workload(rng, 3, 20, 5.0, 0.3);
      for (const auto& j : w) CHECK(ideal_jct(j) == doctest::Approx(oracle_ideal(j)));
    }
  }

  TEST_CASE("finalize rejects broken records") {
    CHECK_THROWS_AS(finalize(RunRecord{}), InvariantViolation);

    auto good = simulate_megha(params(), Topology(1, 1, 2), jobs({{0, {1.0}}}));
    CHECK_NOTHROW(finalize(good));

    auto twice = good;
    twice.tasks[0].launches = 2;
    CHECK_THROWS_WITH_AS(finalize(twice), doctest::Contains("launched 2 times"), InvariantViolation);

    auto lost = good;
    lost.jobs[0].done = false;
    CHECK_THROWS_AS(finalize(lost), InvariantViolation);

    auto skewed = good;
    skewed.tasks[0].comm += SimTime::ticks(1);
    CHECK_THROWS_WITH_AS(finalize(skewed), doctest::Contains("components"), InvariantViolation);

    auto short_run = good;
    short_run.tasks[0].end -= SimTime::ticks(1);
    CHECK_THROWS_AS(finalize(short_run), InvariantViolation);
  }

  TEST_CASE("summary fields") {
    auto w = jobs({{0, {1.0}}, {0, {1.0, 2.0}}, {0.5, {100.0}}});
    auto m = finalize(simulate_megha(params(), Topology(1, 1, 4), w));
    CHECK(m.summary.jobs == 3);
    CHECK(m.summary.tasks == 4);
    CHECK(m.summary.short_delay.count == 2);
    CHECK(m.summary.long_delay.count == 1);
    CHECK(m.jobs[1].ideal_jct == SimTime::seconds(2));
    CHECK(m.jobs[1].jct - m.jobs[1].ideal_jct == m.jobs[1].delay);
    CHECK(m.summary.job_delay.median == doctest::Approx(0.0015));
    CHECK(m.summary.mean_comm == doctest::Approx(0.0015));
    auto j = summary_json(m.summary);
    CHECK(j["job_delay"]["p95"].get<double>() == doctest::Approx(0.0015));
    CHECK(j.contains("inconsistency_ratio"));
  }

  TEST_CASE("job table layout") {
    auto m = finalize(simulate_megha(params(), Topology(1, 1, 2), jobs({{0.25, {1.0}}})));
    std::ostringstream out;
    write_jobs_csv(out, m.jobs);
    CHECK(out.str() ==
          "job_id,class,submit_time,finish_time,jct,ideal_jct,delay,task_count\n"
          "0,short,0.250000000,1.251500000,1.001500000,1.000000000,0.001500000,1\n");
  }

  TEST_CASE("delay_stats over ticks keeps the mean exact") {
    std::vector<SimTime> d(3, SimTime::ticks(1'500'000));
    auto s = delay_stats(d);
    CHECK(s.mean == 0.0015);
    CHECK(s.count == 3);
    CHECK(delay_stats(std::vector<double>{}).count == 0);
  }

  TEST_CASE("identical runs give identical summaries") {
    Rng rng(12);
    auto w = random_workload(rng, 40, 10, 0.3, 0.1);
    for (auto kind : kinds) {
      auto a = finalize(simulate(kind, params(3), Topology(2, 2, 3), w));
      auto b = finalize(simulate(kind, params(3), Topology(2, 2, 3), w));
      CHECK(summary_json(a.summary).dump() == summary_json(b.summary).dump());
    }
  }

  TEST_CASE("shrinking the DC never lowers Megha's total queuing") {
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
      auto w = random_workload(rng, 25, 8, 0.5);
      double prev = -1.0;
      for (std::uint32_t wpp : {6U, 4U, 2U, 1U}) {
        auto m = finalize(simulate_megha(params(), Topology(2, 2, wpp), w));
        double q = (m.summary.mean_queue_scheduler + m.summary.mean_queue_worker) * static_cast<double>(m.tasks.size());
        CHECK(q >= prev - 1e-9);
        prev = q;
      }
    }
  }
}
