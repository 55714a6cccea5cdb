#include "uuaudit/service/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uuaudit/errors.hpp"
#include "uuaudit/evaluation.hpp"
#include "uuaudit/io.hpp"
#include "uuaudit/monte_carlo.hpp"
#include "uuaudit/oracle.hpp"
#include "uuaudit/profile.hpp"
#include "uuaudit/search.hpp"
#include "uuaudit/service/http.hpp"
#include "uuaudit/service/session.hpp"

// After the uuaudit headers: resolv.h defines a `_res` macro that breaks Eigen.
#include <httplib.h>

namespace uuaudit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct DataArgs {
  std::string path;
  std::string format;  // empty: from extension
  std::string critical_class;
};

struct ConfigArgs {
  std::string strategy = "fl";
  std::string estimator = "auto";
  SearchConfig cfg;
};

void add_data_args(CLI::App* app, DataArgs& d, bool positional = true) {
  if (positional) {
    app->add_option("data", d.path, "Test set (.csv or .jsonl)")->required();
  }
  app->add_option("--input-format", d.format, "Input format, csv or jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  app->add_option("--critical-class", d.critical_class,
                  "Count only misclassifications of this predicted class");
}

void add_config_args(CLI::App* app, ConfigArgs& c, bool with_strategy) {
  if (with_strategy) {
    app->add_option("--strategy", c.strategy, "fl, mu, cov or bandit")
        ->check(CLI::IsMember({"fl", "mu", "cov", "bandit"}));
  }
  app->add_option("--budget", c.cfg.budget, "Query budget B");
  app->add_option("--tau", c.cfg.tau, "Confidence floor for the baselines");
  app->add_option("--seed", c.cfg.seed, "Random seed");
  app->add_option("--estimator", c.estimator, "phi estimator")
      ->check(CLI::IsMember({"auto", "logistic", "prior", "cluster"}));
  app->add_option("--clusters", c.cfg.clusters, "k for cluster rates and bandit arms");
  app->add_option("--exploration", c.cfg.exploration, "UCB1 bonus multiplier");
  app->add_flag("--restrict-candidates", c.cfg.restrict_candidates,
                "fl: only consider points with confidence >= tau");
  app->add_flag("--allow-below-tau", c.cfg.allow_below_tau,
                "Baselines: continue below tau once the pool is empty");
  app->add_flag("--intercept", c.cfg.logistic_intercept,
                "Add an intercept column to the logistic estimator");
}

SearchConfig resolve(const ConfigArgs& c) {
  SearchConfig cfg = c.cfg;
  cfg.strategy = parse_strategy(c.strategy);
  cfg.estimator = parse_estimator(c.estimator);
  return cfg;
}

AuditData load(const DataArgs& d) {
  LoadOptions opts;
  if (!d.critical_class.empty()) opts.critical_class = d.critical_class;
  if (d.format.empty()) return load_testset(d.path, opts);
  return load_testset(d.path, parse_format(d.format), opts);
}

// Writes to the file, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::ostream& out,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  write(f);
}

std::vector<Strategy> parse_strategies(const std::string& list) {
  std::vector<Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_strategy(item));
  }
  if (out.empty()) throw ConfigError("no strategies given");
  return out;
}

// --- search ---------------------------------------------------------------

struct SearchCmd {
  DataArgs data;
  ConfigArgs config;
  std::string out;
};

void run_search_cmd(const SearchCmd& c, std::ostream& out, std::ostream& err) {
  const AuditData data = load(c.data);
  for (const std::string& w : data.set.warnings()) err << "warning: " << w << '\n';
  SimulatedOracle oracle(data);
  const QueryTrace trace = run_search(data.set, oracle, resolve(c.config));
  emit(c.out, out, [&](std::ostream& o) { write_trace_jsonl(o, trace); });
  if (!c.out.empty() && c.out != "-") {
    std::ofstream meta(c.out + ".meta.json", std::ios::binary);
    meta << trace_metadata(trace).dump(2) << '\n';
  }
  if (trace.aborted) throw OracleError(trace.note);
}

// --- mc -------------------------------------------------------------------

struct McCmd {
  DataArgs data;
  ConfigArgs config;
  std::string strategies = "fl,mu,cov,bandit";
  std::size_t reps = 1000;
  std::size_t n = 1000;
  std::size_t threads = 0;
  std::string out;
  std::string json_out;
};

void run_mc_cmd(const McCmd& c, std::ostream& out, std::ostream& err) {
  const AuditData data = load(c.data);
  McOptions opts;
  opts.n = c.n;
  opts.budget = c.config.cfg.budget;
  opts.reps = c.reps;
  opts.seed = c.config.cfg.seed;
  opts.base = resolve(c.config);
  opts.threads = c.threads;
  const auto strategies = parse_strategies(c.strategies);
  const McResult res = monte_carlo(data, strategies, opts);
  for (const McAttrition& a : res.attrition) {
    if (a.failed + a.aborted + a.early_stop > 0) {
      err << a.strategy << ": " << a.failed << " failed, " << a.aborted
          << " aborted, " << a.early_stop << " stopped early\n";
    }
  }
  emit(c.out, out, [&](std::ostream& o) { write_mc_csv(o, res); });
  if (!c.json_out.empty()) {
    emit(c.json_out, out, [&](std::ostream& o) { o << to_json(res).dump(2) << '\n'; });
  }
}

// --- profile --------------------------------------------------------------

struct ProfileCmd {
  DataArgs data;
  ProfileOptions opts;
  std::string smoother = "spline";
  std::string format = "json";
  std::string out;
};

void run_profile_cmd(ProfileCmd c, std::ostream& out) {
  const AuditData data = load(c.data);
  c.opts.smoother = c.smoother == "binned" ? Smoother::binned : Smoother::spline;
  const OverconfidenceProfile p = overconfidence_profile(data, c.opts);
  emit(c.out, out, [&](std::ostream& o) {
    if (c.format == "json") {
      o << to_json(p).dump(2) << '\n';
      return;
    }
    o << "confidence,estimated_accuracy,overconfidence,support\n";
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
      o << format_double(p.grid[k]) << ',' << format_double(p.estimated_accuracy[k])
        << ',' << format_double(p.overconfidence[k]) << ',' << p.support[k] << '\n';
    }
  });
}

// --- report ---------------------------------------------------------------

struct ReportCmd {
  std::vector<std::string> traces;
  std::string mc;
  DataArgs data;
  std::string format = "json";
  std::string metric = "facility_gain";
  std::string out;
};

QueryTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return read_trace_jsonl(in);
}

void report_mc(const ReportCmd& c, std::ostream& out) {
  std::ifstream in(c.mc, std::ios::binary);
  if (!in) throw Error("cannot read " + c.mc);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(c.mc + ": " + e.what());
  }
  const McResult res = mc_result_from_json(j);
  emit(c.out, out, [&](std::ostream& o) {
    if (c.format == "csv") {
      write_mc_csv(o, res);
    } else if (c.format == "gnuplot") {
      write_gnuplot(o, res, c.metric);
    } else {
      o << to_json(res).dump(2) << '\n';
    }
  });
}

void report_traces(const ReportCmd& c, std::ostream& out) {
  std::optional<AuditData> data;
  if (!c.data.path.empty()) data = load(c.data);
  std::vector<QueryTrace> traces;
  for (const std::string& p : c.traces) traces.push_back(read_trace_file(p));

  // Trajectories need the test set the traces were run on.
  std::vector<std::vector<double>> gain(traces.size());
  std::vector<std::vector<double>> cov(traces.size());
  if (data) {
    for (std::size_t t = 0; t < traces.size(); ++t) {
      gain[t] = utility_trajectory(data->set, traces[t], UtilityKind::facility);
      cov[t] = utility_trajectory(data->set, traces[t], UtilityKind::coverage);
    }
  }

  emit(c.out, out, [&](std::ostream& o) {
    if (c.format == "csv" || c.format == "gnuplot") {
      const char sep = c.format == "csv" ? ',' : ' ';
      if (c.format == "gnuplot") o << "# ";
      o << "trace" << sep << "b" << sep << "c" << sep << "is_uu" << sep << "W"
        << sep << "gain" << sep << "sdr";
      if (data) o << sep << "facility_gain" << sep << "coverage";
      o << '\n';
      for (std::size_t t = 0; t < traces.size(); ++t) {
        const auto& steps = traces[t].steps;
        for (std::size_t k = 0; k < steps.size(); ++k) {
          const auto s = sdr(std::span(steps).first(k + 1));
          o << t << sep << steps[k].b << sep << format_double(steps[k].confidence)
            << sep << (steps[k].is_uu ? 1 : 0) << sep
            << format_double(steps[k].utility) << sep << format_double(steps[k].gain)
            << sep << (s ? format_double(*s) : std::string("nan"));
          if (data) o << sep << format_double(gain[t][k]) << sep << format_double(cov[t][k]);
          o << '\n';
        }
      }
      return;
    }
    ordered_json j;
    ordered_json list = ordered_json::array();
    for (std::size_t t = 0; t < traces.size(); ++t) {
      ordered_json e;
      e["file"] = c.traces[t];
      e["steps"] = traces[t].steps.size();
      e["uus"] = traces[t].uu_count();
      const auto s = sdr(traces[t]);
      e["sdr"] = s ? ordered_json(*s) : ordered_json(nullptr);
      if (data) {
        e["facility_gain"] = gain[t];
        e["coverage"] = cov[t];
      }
      list.push_back(std::move(e));
    }
    j["traces"] = std::move(list);
    try {
      const Band b = sdr_summary(traces);
      j["sdr_summary"] = {{"median", b.median}, {"q05", b.q05}, {"q95", b.q95},
                          {"count", b.count}};
    } catch (const InsufficientDataError&) {
      j["sdr_summary"] = nullptr;
    }
    o << j.dump(2) << '\n';
  });
}

// --- serve ----------------------------------------------------------------

struct ServeCmd {
  std::vector<std::string> datasets;
  std::string critical_class;
  std::string host = "127.0.0.1";
  int port = 0;
  std::string log_dir;
};

void run_serve_cmd(const ServeCmd& c, std::ostream& out) {
  std::vector<service::Dataset> sets;
  for (const std::string& entry : c.datasets) {
    const auto eq = entry.find('=');
    const std::string name =
        eq == std::string::npos ? fs::path(entry).stem().string() : entry.substr(0, eq);
    const std::string path = eq == std::string::npos ? entry : entry.substr(eq + 1);
    DataArgs d{path, "", c.critical_class};
    sets.push_back(service::make_dataset(name, load(d)));
  }
  std::optional<fs::path> logs;
  if (!c.log_dir.empty()) logs = c.log_dir;
  service::SessionStore store(std::move(sets), logs);
  httplib::Server server;
  service::install_routes(server, store);
  const int port = c.port != 0 ? c.port : service::port_from_env();
  out << "listening on " << c.host << ':' << port << std::endl;
  if (!server.listen(c.host, port)) {
    throw Error("cannot listen on " + c.host + ":" + std::to_string(port));
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search a classifier's test set for confident mistakes", "uuaudit"};
  app.require_subcommand(1);

  SearchCmd search;
  auto* s = app.add_subcommand("search", "Run one strategy with a simulated oracle");
  add_data_args(s, search.data);
  add_config_args(s, search.config, true);
  s->add_option("--out", search.out, "Trace JSONL (default stdout)");

  McCmd mc;
  auto* m = app.add_subcommand("mc", "Monte Carlo comparison of strategies");
  add_data_args(m, mc.data);
  add_config_args(m, mc.config, false);
  m->add_option("--strategies", mc.strategies, "Comma-separated strategy list");
  m->add_option("--reps", mc.reps, "Replications");
  m->add_option("--n", mc.n, "Sample size per replication");
  m->add_option("--threads", mc.threads, "Worker threads (0: all cores)");
  m->add_option("--out", mc.out, "Tidy CSV of per-step bands (default stdout)");
  m->add_option("--json", mc.json_out, "Also write the full JSON report here");

  ProfileCmd prof;
  auto* p = app.add_subcommand("profile", "Overconfidence profile of a labeled set");
  add_data_args(p, prof.data);
  p->add_option("--bandwidth", prof.opts.bandwidth, "Support window half-width");
  p->add_option("--smoother", prof.smoother, "spline or binned")
      ->check(CLI::IsMember({"spline", "binned"}));
  p->add_option("--grid", prof.opts.grid_points, "Grid size");
  p->add_option("--bins", prof.opts.bins, "Bins for the binned smoother");
  p->add_option("--format", prof.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  p->add_option("--out", prof.out, "Output file (default stdout)");

  ReportCmd rep;
  auto* r = app.add_subcommand("report", "Render traces or a Monte Carlo report");
  r->add_option("traces", rep.traces, "Trace JSONL files");
  r->add_option("--mc", rep.mc, "Monte Carlo JSON report (from mc --json)");
  r->add_option("--data", rep.data.path, "Test set the traces ran on");
  r->add_option("--critical-class", rep.data.critical_class, "Critical class");
  r->add_option("--format", rep.format, "json, csv or gnuplot")
      ->check(CLI::IsMember({"json", "csv", "gnuplot"}));
  r->add_option("--metric", rep.metric, "Metric for --mc gnuplot output")
      ->check(CLI::IsMember({"uus", "sdr", "facility_gain", "coverage"}));
  r->add_option("--out", rep.out, "Output file (default stdout)");

  ServeCmd srv;
  auto* v = app.add_subcommand("serve", "Start the labeling session service");
  v->add_option("--data", srv.datasets, "Dataset as name=path or path")->required();
  v->add_option("--critical-class", srv.critical_class, "Critical class");
  v->add_option("--host", srv.host, "Bind address");
  v->add_option("--port", srv.port, "Port (default $UUAUDIT_PORT or 8080)");
  v->add_option("--log-dir", srv.log_dir, "Directory for session event logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (s->parsed()) run_search_cmd(search, out, err);
    if (m->parsed()) run_mc_cmd(mc, out, err);
    if (p->parsed()) run_profile_cmd(prof, out);
    if (r->parsed()) {
      if (rep.mc.empty() == rep.traces.empty()) {
        err << "usage error: report needs trace files or --mc, not both\n";
        return 2;
      }
      if (rep.mc.empty()) {
        report_traces(rep, out);
      } else {
        report_mc(rep, out);
      }
    }
    if (v->parsed()) run_serve_cmd(srv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace uuaudit::cli
