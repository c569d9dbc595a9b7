#include "isched/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

#include "isched/error.hpp"
#include "isched/ripfile.hpp"

namespace isched {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

struct Loaded {
  std::string id;
  std::shared_ptr<const Instance> inst;
};

}  // namespace

BenchRow make_row(const Instance& inst, const std::string& instance_id, const std::string& method,
                  const Schedule& sched, double seconds, double budget, std::size_t iterations) {
  BenchRow row;
  row.instance = instance_id;
  row.method = method;
  row.seconds = seconds;
  row.budget = budget;
  row.over_budget = seconds > budget;
  row.iterations = iterations;
  try {
    auto verdict = check_schedule(inst, sched);
    row.feasible = verdict.feasible;
    if (!verdict.feasible && !verdict.diagnostics.empty()) row.note = verdict.diagnostics.front();
  } catch (const ConstraintError& e) {
    row.feasible = false;
    row.note = e.what();
  }
  if (row.feasible) {
    row.objective = objective_cost(inst, sched);
    Rational bound = lower_bound(inst).opt;
    if (bound > Rational(0)) row.ratio = (*row.objective / bound).to_double();
  }
  return row;
}

BenchReport run_bench(const BenchConfig& cfg) {
  std::vector<Loaded> loaded;
  for (const auto& path : cfg.files) {
    try {
      Loaded l;
      l.id = std::filesystem::path(path).stem().string();
      l.inst = std::make_shared<const Instance>(load_instance(path).record.instance);
      loaded.push_back(std::move(l));
    } catch (const std::exception& e) {
      throw Error("cannot load " + path + ": " + e.what());
    }
  }

  const std::size_t methods = cfg.methods.size();
  std::vector<BenchRow> rows(loaded.size() * methods);
  auto run_one = [&](std::size_t slot) {
    const std::size_t fi = slot / methods;
    const BenchMethod& m = cfg.methods[slot % methods];
    const Instance& inst = *loaded[fi].inst;
    const std::uint64_t seed = cfg.seed + 1000003ULL * fi;
    const double budget = cfg.time_limit ? *cfg.time_limit : 0.1 * static_cast<double>(inst.num_tasks());
    try {
      auto order = OrderingPolicy::from_name(m.policy, seed, cfg.qnet);
      auto sel = SelectionPolicy::from_name(m.selector, seed, cfg.selector);
      SolveOptions options;
      options.pool_size = cfg.pool_size;
      options.seed = seed;
      auto t0 = std::chrono::steady_clock::now();
      Episode ep = Episode::cold_start(loaded[fi].inst, options);
      while (!ep.done()) {
        ProcessId v = order.select_next(ep.graph(), ep.instance(), ep.rpu(), ep.next_iteration());
        ep.step(v, sel);
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows[slot] = make_row(inst, loaded[fi].id, m.label(), ep.schedule(), secs, budget, ep.trace().order.size());
    } catch (const std::exception& e) {
      BenchRow row;
      row.instance = loaded[fi].id;
      row.method = m.label();
      row.budget = budget;
      row.note = e.what();
      rows[slot] = row;
    }
  };

  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    for (std::size_t s = 0; s < rows.size(); ++s) run_one(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < rows.size(); s = next++) run_one(s);
      });
    }
    for (auto& th : pool) th.join();
  }
  BenchReport report;
  report.rows = std::move(rows);
  return report;
}

std::vector<BenchAggregate> BenchReport::aggregates() const {
  std::vector<BenchAggregate> out;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) {
    auto [it, inserted] = slot.try_emplace(r.method, out.size());
    if (inserted) {
      out.push_back({});
      out.back().method = r.method;
      groups.emplace_back();
    }
    ++out[it->second].runs;
    if (r.feasible) groups[it->second].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    auto& a = out[g];
    const auto& rs = groups[g];
    a.feasible = rs.size();
    if (rs.empty()) continue;
    double so = 0.0, ss = 0.0, sr = 0.0;
    std::size_t nr = 0;
    for (const auto* r : rs) {
      so += r->objective->to_double();
      ss += r->seconds;
      if (r->ratio) {
        sr += *r->ratio;
        ++nr;
      }
    }
    const double n = static_cast<double>(rs.size());
    a.mean_objective = so / n;
    a.mean_seconds = ss / n;
    a.mean_ratio = nr ? sr / static_cast<double>(nr) : 0.0;
    double vo = 0.0, vs = 0.0;
    for (const auto* r : rs) {
      vo += std::pow(r->objective->to_double() - a.mean_objective, 2);
      vs += std::pow(r->seconds - a.mean_seconds, 2);
    }
    a.std_objective = std::sqrt(vo / n);
    a.std_seconds = std::sqrt(vs / n);
  }
  return out;
}

std::string BenchReport::to_csv(bool include_timing) const {
  std::ostringstream out;
  out << "# seconds: monotonic wall clock around the solve call only; file I/O excluded\n";
  out << "# rows with feasible=0 failed re-verification and are excluded from aggregates\n";
  out << "instance,method,objval,seconds,budget,over_budget,feasible,obj_bound_ratio,iterations\n";
  for (const auto& r : rows) {
    out << r.instance << "," << r.method << "," << (r.objective ? r.objective->to_string() : "") << ","
        << (include_timing ? fmt(r.seconds) : "") << "," << fmt(r.budget) << ","
        << (include_timing ? (r.over_budget ? "1" : "0") : "") << "," << (r.feasible ? 1 : 0) << ","
        << (r.ratio ? fmt(*r.ratio) : "") << "," << r.iterations << "\n";
  }
  return out.str();
}

std::string BenchReport::summary_json(bool include_timing) const {
  std::ostringstream out;
  out << "{\n  \"methods\": [\n";
  auto aggs = aggregates();
  for (std::size_t i = 0; i < aggs.size(); ++i) {
    const auto& a = aggs[i];
    out << "    {\"method\": \"" << a.method << "\", \"runs\": " << a.runs << ", \"feasible\": " << a.feasible
        << ", \"objval_mean\": " << fmt(a.mean_objective) << ", \"objval_std\": " << fmt(a.std_objective);
    if (include_timing) out << ", \"seconds_mean\": " << fmt(a.mean_seconds) << ", \"seconds_std\": " << fmt(a.std_seconds);
    out << ", \"ratio_mean\": " << fmt(a.mean_ratio) << "}" << (i + 1 < aggs.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace isched
