#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "meghasim/config.hpp"
#include "meghasim/metrics.hpp"
#include "meghasim/runner.hpp"

namespace py = pybind11;
using namespace meghasim;
using nlohmann::json;

// Configs and results cross the boundary as JSON text; the Python wrapper
// converts to and from dicts.

namespace {

using JobTuple = std::pair<double, std::vector<double>>;

std::vector<JobTuple> to_tuples(const Workload& w) {
  std::vector<JobTuple> out;
  out.reserve(w.size());
  for (const auto& j : w) {
    std::vector<double> d;
    for (const auto& t : j.tasks) d.push_back(t.duration);
    out.emplace_back(j.submit_time, std::move(d));
  }
  return out;
}

Workload from_tuples(const std::vector<JobTuple>& jobs) {
  Workload w;
  for (const auto& [submit, durs] : jobs) {
    JobSpec j;
    j.job_id = static_cast<std::uint32_t>(w.size());
    j.submit_time = submit;
    for (std::uint32_t k = 0; k < durs.size(); ++k) j.tasks.push_back(TaskSpec{j.job_id, k, durs[k]});
    w.push_back(std::move(j));
  }
  return w;
}

RunConfig config_from(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc, base_dir);
}

std::string result_json(const RunResult& r) {
  nlohmann::ordered_json out;
  out["summary"] = summary_json(r.metrics.summary);
  auto& jobs = out["jobs"] = nlohmann::ordered_json::array();
  for (const auto& j : r.metrics.jobs) {
    jobs.push_back({{"job_id", j.job_id},
                    {"class", to_string(j.cls)},
                    {"submit_time", j.submit.to_seconds()},
                    {"finish_time", j.finish.to_seconds()},
                    {"jct", j.jct.to_seconds()},
                    {"ideal_jct", j.ideal_jct.to_seconds()},
                    {"delay", j.delay.to_seconds()},
                    {"task_count", j.task_count}});
  }
  out["topology"] = {r.topology.gm_count(), r.topology.lm_count(), r.topology.workers_per_partition()};
  out["wfq_sequences"] = r.wfq_sequences;
  out["config"] = to_json(r.config);
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_meghasim, m) {
  m.doc() = "Discrete-event simulator for Megha, Sparrow, Eagle and Pigeon";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception<TraceParseError>(m, "TraceParseError", PyExc_ValueError);

  m.def(
      "run_json",
      [](const std::string& config, const std::string& base_dir, const std::string& out_dir) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = execute(config_from(config, base_dir));
          if (!out_dir.empty()) write_report(out_dir, r);
        }
        return result_json(r);
      },
      py::arg("config"), py::arg("base_dir") = "", py::arg("out_dir") = "");

  m.def(
      "compare_json",
      [](const std::vector<std::string>& configs, const std::string& base_dir, unsigned threads) {
        std::vector<RunConfig> cs;
        for (const auto& c : configs) cs.push_back(config_from(c, base_dir));
        std::vector<RunResult> rows;
        std::ostringstream csv;
        {
          py::gil_scoped_release release;
          rows = compare(cs, threads);
          write_compare_csv(csv, rows);
        }
        std::vector<std::string> out;
        for (const auto& r : rows) out.push_back(result_json(r));
        return std::make_pair(out, csv.str());
      },
      py::arg("configs"), py::arg("base_dir") = "", py::arg("threads") = 1);

  m.def(
      "sweep_json",
      [](const std::string& config, const std::vector<double>& loads, const std::vector<std::uint64_t>& sizes,
         unsigned threads) {
        auto c = config_from(config, "");
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = sweep(c, loads, sizes, threads);
        }
        json out = json::array();
        for (const auto& r : rows)
          out.push_back({{"load", r.load},
                         {"dc_size", r.dc_size},
                         {"median_delay", r.median_delay},
                         {"p95_delay", r.p95_delay},
                         {"mean_delay", r.mean_delay},
                         {"inconsistency_ratio", r.inconsistency_ratio}});
        return out.dump();
      },
      py::arg("config"), py::arg("loads"), py::arg("sizes"), py::arg("threads") = 1);

  m.def("config_echo", [](const std::string& config) { return to_json(config_from(config, "")).dump(); });
  m.def("config_digest", [](const std::string& config) { return config_digest(config_from(config, "")); });

  m.def("percentile", &percentile, py::arg("values"), py::arg("p"));
  m.def(
      "resolve_topology",
      [](std::uint64_t target) {
        auto t = resolve_topology(target);
        return py::make_tuple(t.gm_count(), t.lm_count(), t.workers_per_partition());
      },
      py::arg("target_workers"));

  m.def(
      "generate_fixed_load",
      [](std::uint32_t jobs, std::uint32_t tasks_per_job, double duration, double load, std::uint64_t dc_size,
         std::uint64_t seed) {
        return to_tuples(generate_fixed_load(jobs, tasks_per_job, duration, load, dc_size, seed));
      },
      py::arg("jobs"), py::arg("tasks_per_job"), py::arg("duration"), py::arg("load"), py::arg("dc_size"),
      py::arg("seed") = 1);
  m.def(
      "generate_mixed",
      [](std::uint32_t jobs, double short_fraction, double load, std::uint64_t dc_size, std::uint64_t seed) {
        MixedWorkloadParams p;
        p.jobs = jobs;
        p.short_fraction = short_fraction;
        p.load = load;
        return to_tuples(generate_mixed(p, dc_size, seed));
      },
      py::arg("jobs") = 500, py::arg("short_fraction") = 0.8, py::arg("load") = 0.8, py::arg("dc_size") = 1000,
      py::arg("seed") = 1);
  m.def(
      "parse_trace",
      [](const std::string& text) {
        std::istringstream in(text);
        return to_tuples(parse_trace(in));
      },
      py::arg("text"));
  m.def(
      "serialize_trace",
      [](const std::vector<JobTuple>& jobs) {
        std::ostringstream out;
        serialize_trace(from_tuples(jobs), out);
        return out.str();
      },
      py::arg("jobs"));
  m.def(
      "compute_load", [](const std::vector<JobTuple>& jobs, std::uint64_t dc_size) {
        return compute_load(from_tuples(jobs), dc_size);
      },
      py::arg("jobs"), py::arg("dc_size"));
}
