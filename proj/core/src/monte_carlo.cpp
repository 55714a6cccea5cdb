#include "uuaudit/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "uuaudit/distance.hpp"
#include "uuaudit/errors.hpp"
#include "uuaudit/io.hpp"
#include "uuaudit/oracle.hpp"
#include "uuaudit/search.hpp"

namespace uuaudit {
namespace {

constexpr std::size_t kMetricCount = std::size(kMcMetrics);

// Per-step metric values of one run, metric-major.
using RunSeries = std::array<std::vector<double>, kMetricCount>;

struct RunOutcome {
  bool failed = false;
  std::string error;
  QueryTrace trace;
  RunSeries series;
};

// Replays a trace once, updating nearest-UU similarity incrementally.
RunSeries replay(const TestSet& ts, const PairwiseDistances& dist,
                 const QueryTrace& trace) {
  RunSeries out;
  const double cap = dist.diameter();
  std::vector<double> best_sim(ts.size(), 0.0);
  double coverage = 0.0;
  double expected = 0.0;
  std::size_t found = 0;
  for (const TraceStep& step : trace.steps) {
    const std::size_t q = ts.index_of(step.id);
    expected += 1.0 - step.confidence;
    if (step.is_uu) {
      ++found;
      coverage = 0.0;
      const auto row = dist.row(q);
      for (std::size_t x = 0; x < ts.size(); ++x) {
        best_sim[x] = std::max(best_sim[x], std::exp(-row[x]));
        coverage += ts.confidence(x) * best_sim[x];
      }
    }
    out[0].push_back(static_cast<double>(found));
    out[1].push_back(expected > 0.0 ? static_cast<double>(found) / expected
                                    : std::numeric_limits<double>::quiet_NaN());
    out[2].push_back(found == 0 ? 0.0 : step.utility + cap);
    out[3].push_back(coverage);
  }
  return out;
}

std::vector<RunOutcome> run_replication(const AuditData& data,
                                        std::span<const Strategy> strategies,
                                        const McOptions& opts, std::size_t r) {
  const std::uint64_t seed = opts.seed + r;
  const AuditData sample = sample_testset(data, opts.n, seed);
  const PairwiseDistances dist(sample.set);
  std::vector<RunOutcome> out(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    SearchConfig cfg = opts.base;
    cfg.strategy = strategies[s];
    cfg.budget = opts.budget;
    cfg.seed = seed;
    try {
      SimulatedOracle oracle(sample);
      out[s].trace = run_search(sample.set, oracle, cfg);
      out[s].series = replay(sample.set, dist, out[s].trace);
    } catch (const Error& e) {
      out[s].failed = true;
      out[s].error = "rep " + std::to_string(r) + ": " + e.what();
    }
  }
  return out;
}

}  // namespace

const McSummary& McResult::summary(std::string_view strategy,
                                   std::string_view metric) const {
  for (const McSummary& s : summaries) {
    if (s.strategy == strategy && s.metric == metric) return s;
  }
  throw ConfigError("no summary for " + std::string(strategy) + "/" +
                    std::string(metric));
}

McResult monte_carlo(const AuditData& data, std::span<const Strategy> strategies,
                     const McOptions& opts) {
  if (opts.reps == 0) throw ConfigError("reps must be >= 1");
  if (opts.n == 0 || opts.n > data.set.size()) {
    throw DimensionError("sample size " + std::to_string(opts.n) +
                         " outside [1, " + std::to_string(data.set.size()) + "]");
  }
  if (!data.fully_labeled()) {
    throw ConfigError("monte carlo needs a true label for every point");
  }
  if (strategies.empty()) throw ConfigError("no strategies given");

  std::vector<std::vector<RunOutcome>> results(opts.reps);
  std::size_t threads = opts.threads != 0
                            ? opts.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, opts.reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < opts.reps; r = next++) {
      results[r] = run_replication(data, strategies, opts, r);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  McResult res;
  res.options = opts;
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const std::string name(strategy_name(strategies[s]));
    res.strategies.push_back(name);
    McAttrition att{name, 0, 0, 0, {}};
    std::vector<QueryTrace> traces;
    for (std::size_t r = 0; r < opts.reps; ++r) {
      const RunOutcome& o = results[r][s];
      if (o.failed) {
        ++att.failed;
        att.errors.push_back(o.error);
      } else {
        if (o.trace.aborted) ++att.aborted;
        if (o.trace.early_stop) ++att.early_stop;
      }
      traces.push_back(o.trace);
    }
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      McSummary sum{name, std::string(kMcMetrics[m]), {}, opts.reps};
      for (std::size_t b = 0; b < opts.budget; ++b) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < opts.reps; ++r) {
          const auto& series = results[r][s].series[m];
          if (b < series.size() && !std::isnan(series[b])) vals.push_back(series[b]);
        }
        sum.steps.push_back(vals.empty() ? Band{} : band(std::move(vals)));
      }
      res.summaries.push_back(std::move(sum));
    }
    std::vector<double> finals;
    for (const QueryTrace& t : traces) {
      if (auto v = sdr(t)) finals.push_back(*v);
    }
    res.final_sdr.push_back(finals.empty() ? Band{} : band(std::move(finals)));
    res.attrition.push_back(std::move(att));
    if (opts.keep_traces) res.traces.push_back(std::move(traces));
  }
  return res;
}

void write_mc_csv(std::ostream& out, const McResult& result) {
  out << "step,strategy,metric,median,q05,q95,reps\n";
  for (const McSummary& s : result.summaries) {
    for (std::size_t b = 0; b < s.steps.size(); ++b) {
      const Band& band = s.steps[b];
      out << b + 1 << ',' << s.strategy << ',' << s.metric << ','
          << format_double(band.median) << ',' << format_double(band.q05) << ','
          << format_double(band.q95) << ',' << band.count << '\n';
    }
  }
}

nlohmann::ordered_json to_json(const McResult& result) {
  using nlohmann::ordered_json;
  ordered_json j;
  const McOptions& o = result.options;
  j["options"] = {{"n", o.n},           {"budget", o.budget},
                  {"reps", o.reps},     {"seed", o.seed},
                  {"config", to_json(o.base)}};
  auto band_json = [](const Band& b) {
    return ordered_json{{"median", b.median}, {"q05", b.q05}, {"q95", b.q95},
                        {"reps", b.count}};
  };
  ordered_json strategies = ordered_json::array();
  for (std::size_t s = 0; s < result.strategies.size(); ++s) {
    const McAttrition& a = result.attrition[s];
    ordered_json entry;
    entry["strategy"] = result.strategies[s];
    entry["final_sdr"] = band_json(result.final_sdr[s]);
    entry["attrition"] = {{"failed", a.failed},
                          {"aborted", a.aborted},
                          {"early_stop", a.early_stop},
                          {"errors", a.errors}};
    ordered_json metrics = ordered_json::object();
    for (const McSummary& sum : result.summaries) {
      if (sum.strategy != result.strategies[s]) continue;
      ordered_json steps = ordered_json::array();
      for (const Band& b : sum.steps) steps.push_back(band_json(b));
      metrics[sum.metric] = std::move(steps);
    }
    entry["metrics"] = std::move(metrics);
    strategies.push_back(std::move(entry));
  }
  j["strategies"] = std::move(strategies);
  return j;
}

McResult mc_result_from_json(const nlohmann::json& j) {
  try {
    McResult res;
    const auto& o = j.at("options");
    res.options.n = o.at("n").get<std::size_t>();
    res.options.budget = o.at("budget").get<std::size_t>();
    res.options.reps = o.at("reps").get<std::size_t>();
    res.options.seed = o.at("seed").get<std::uint64_t>();
    res.options.base = config_from_json(o.at("config"));
    auto read_band = [](const nlohmann::json& b) {
      return Band{b.at("median").get<double>(), b.at("q05").get<double>(),
                  b.at("q95").get<double>(), b.at("reps").get<std::size_t>()};
    };
    for (const auto& entry : j.at("strategies")) {
      const std::string name = entry.at("strategy").get<std::string>();
      res.strategies.push_back(name);
      res.final_sdr.push_back(read_band(entry.at("final_sdr")));
      const auto& a = entry.at("attrition");
      res.attrition.push_back({name, a.at("failed").get<std::size_t>(),
                               a.at("aborted").get<std::size_t>(),
                               a.at("early_stop").get<std::size_t>(),
                               a.at("errors").get<std::vector<std::string>>()});
      for (const std::string_view metric : kMcMetrics) {
        McSummary sum{name, std::string(metric), {}, res.options.reps};
        for (const auto& b : entry.at("metrics").at(std::string(metric))) {
          sum.steps.push_back(read_band(b));
        }
        res.summaries.push_back(std::move(sum));
      }
    }
    return res;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("monte carlo report: ") + e.what());
  }
}

void write_gnuplot(std::ostream& out, const McResult& result,
                   std::string_view metric) {
  std::vector<const McSummary*> cols;
  for (const std::string& s : result.strategies) {
    cols.push_back(&result.summary(s, metric));
  }
  out << "# metric " << metric << "\n# step";
  for (const McSummary* c : cols) {
    out << ' ' << c->strategy << "_median " << c->strategy << "_q05 "
        << c->strategy << "_q95";
  }
  out << '\n';
  const std::size_t steps = cols.empty() ? 0 : cols.front()->steps.size();
  for (std::size_t b = 0; b < steps; ++b) {
    out << b + 1;
    for (const McSummary* c : cols) {
      const Band& band = c->steps[b];
      out << ' ' << format_double(band.median) << ' ' << format_double(band.q05)
          << ' ' << format_double(band.q95);
    }
    out << '\n';
  }
}

}  // namespace uuaudit
