#include "uuaudit/service/session.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "uuaudit/errors.hpp"
#include "uuaudit/evaluation.hpp"
#include "uuaudit/utility.hpp"

namespace uuaudit::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kFeaturePreview = 8;

ordered_json nullable(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json phi_snapshot(const PhiModel& m) {
  ordered_json j;
  j["kind"] = to_string(m.kind());
  if (const LogisticFit* fit = m.logistic_fit()) {
    j["intercept"] = m.intercept();
    j["coefficients"] = std::vector<double>(
        fit->coefficients.data(), fit->coefficients.data() + fit->coefficients.size());
    j["standard_errors"] = std::vector<double>(
        fit->standard_errors.data(),
        fit->standard_errors.data() + fit->standard_errors.size());
    j["converged"] = fit->converged;
    j["separated"] = fit->separated;
  }
  if (m.kind() == PhiKind::cluster_rates) {
    ordered_json clusters = ordered_json::array();
    for (std::size_t c = 0; c < m.cluster_stats().size(); ++c) {
      const ClusterStat& s = m.cluster_stats()[c];
      clusters.push_back({{"cluster", c},
                          {"queried", s.queried},
                          {"uus", s.uus},
                          {"rate", nullable(m.cluster_rate(c))}});
    }
    j["clusters"] = std::move(clusters);
  }
  return j;
}

std::string fmt_id(std::size_t n) {
  std::string digits = std::to_string(n);
  return "s" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

}  // namespace

Dataset make_dataset(std::string name, AuditData data) {
  Dataset d;
  d.name = std::move(name);
  for (const std::string& c : data.set.predicted_classes()) d.classes.insert(c);
  for (const auto& t : data.truth) {
    if (t) d.classes.insert(*t);
  }
  d.data = std::make_shared<const AuditData>(std::move(data));
  return d;
}

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::awaiting_label: return "awaiting_label";
    case SessionStatus::complete: return "complete";
    case SessionStatus::aborted: return "aborted";
  }
  return "unknown";
}

namespace {

SearchRun make_run(const Dataset& d, const SearchConfig& cfg) {
  try {
    return SearchRun(d.data->set, cfg);
  } catch (const ConfigError& e) {
    throw BadRequest(e.what());
  }
}

}  // namespace

Session::Session(std::string id, Dataset dataset, SearchConfig cfg, EventSink sink)
    : id_(std::move(id)),
      dataset_(std::move(dataset)),
      run_(make_run(dataset_, cfg)),
      sink_(std::move(sink)) {
  if (sink_) {
    ordered_json created;
    created["event"] = "created";
    created["session"] = id_;
    created["dataset"] = dataset_.name;
    created["config"] = to_json(cfg);
    sink_(created);
  }
  announce_pending();
}

void Session::announce_pending() {
  const auto& sel = run_.next();
  if (!sel || !sink_) return;
  ordered_json e;
  e["event"] = "queried";
  e["b"] = run_.trace().steps.size() + 1;
  e["point_id"] = run_.testset()[sel->index].id;
  sink_(e);
}

SessionStatus Session::status_locked() const {
  if (run_.trace().aborted) return SessionStatus::aborted;
  return run_.finished() ? SessionStatus::complete : SessionStatus::awaiting_label;
}

SessionStatus Session::status() const {
  std::lock_guard lock(mu_);
  return status_locked();
}

ordered_json Session::metrics() const {
  const QueryTrace& t = run_.trace();
  ordered_json m;
  m["queried"] = t.steps.size();
  m["uus"] = t.uu_count();
  m["sdr"] = nullable(sdr(t));
  m["W"] = t.steps.empty() ? -run_.state().d_cap() : t.steps.back().utility;
  return m;
}

ordered_json Session::next() const {
  std::lock_guard lock(mu_);
  const auto& sel = run_.next();
  if (!sel || status_locked() != SessionStatus::awaiting_label) {
    throw Conflict("session " + id_ + " is " + to_string(status_locked()));
  }
  const TestPoint& p = run_.testset()[sel->index];
  ordered_json j;
  j["session"] = id_;
  j["point_id"] = p.id;
  if (p.display_uri) {
    j["display"] = {{"display_uri", *p.display_uri}};
  } else {
    const std::size_t shown = std::min(kFeaturePreview, p.features.size());
    j["display"] = {
        {"dim", p.features.size()},
        {"features", std::vector<double>(p.features.begin(),
                                         p.features.begin() + static_cast<long>(shown))}};
  }
  j["confidence"] = p.confidence;
  j["predicted_class"] = p.predicted_class;
  j["phi"] = sel->phi;
  j["gain"] = sel->gain;
  j["step"] = run_.trace().steps.size() + 1;
  j["budget"] = run_.config().budget;
  j["metrics"] = metrics();
  return j;
}

ordered_json Session::label(std::string_view point_id, const std::string& label) {
  std::lock_guard lock(mu_);
  const auto& sel = run_.next();
  if (!sel || status_locked() != SessionStatus::awaiting_label) {
    throw Conflict("session " + id_ + " is " + to_string(status_locked()));
  }
  const std::string& pending = run_.testset()[sel->index].id;
  if (pending != point_id) {
    throw Conflict("point '" + std::string(point_id) + "' is not the pending query ('" +
                   pending + "')");
  }
  if (!dataset_.classes.contains(label)) {
    throw BadRequest("unknown class '" + label + "'");
  }
  const TraceStep step = run_.answer(label);
  if (sink_) {
    ordered_json e;
    e["event"] = "labeled";
    e["b"] = step.b;
    e["point_id"] = step.id;
    e["label"] = step.label;
    sink_(e);
  }
  announce_pending();
  ordered_json j;
  j["session"] = id_;
  j["step"] = step_to_json(step);
  j["is_uu"] = step.is_uu;
  j["W"] = step.utility;
  j["metrics"] = metrics();
  j["status"] = to_string(status_locked());
  j["has_next"] = status_locked() == SessionStatus::awaiting_label;
  return j;
}

ordered_json Session::brief() const {
  std::lock_guard lock(mu_);
  ordered_json j;
  j["session"] = id_;
  j["dataset"] = dataset_.name;
  j["strategy"] = strategy_name(run_.config().strategy);
  j["status"] = to_string(status_locked());
  j["queried"] = run_.trace().steps.size();
  j["budget"] = run_.config().budget;
  return j;
}

ordered_json Session::summary() const {
  std::lock_guard lock(mu_);
  const QueryTrace& t = run_.trace();
  ordered_json j;
  j["session"] = id_;
  j["dataset"] = dataset_.name;
  j["status"] = to_string(status_locked());
  j["config"] = to_json(run_.config());
  ordered_json steps = ordered_json::array();
  ordered_json uus = ordered_json::array();
  std::vector<double> w;
  for (const TraceStep& s : t.steps) {
    steps.push_back(step_to_json(s));
    if (s.is_uu) uus.push_back({{"id", s.id}, {"confidence", s.confidence}});
    w.push_back(s.utility);
  }
  j["trace"] = std::move(steps);
  const auto v = sdr(t);
  j["sdr"] = nullable(v);
  j["sdr_defined"] = v.has_value();
  j["uus"] = std::move(uus);
  j["utility_trajectory"] = w;
  j["early_stop"] = t.early_stop;
  j["phi_model"] = phi_snapshot(run_.phi_model());
  j["metrics"] = metrics();
  return j;
}

QueryTrace Session::trace() const {
  std::lock_guard lock(mu_);
  return run_.trace();
}

std::string Session::trace_jsonl() const {
  std::lock_guard lock(mu_);
  std::ostringstream out;
  write_trace_jsonl(out, run_.trace());
  return out.str();
}

void Session::set_sink(EventSink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

void Session::apply_event(const json& event) {
  const std::string kind = event.at("event").get<std::string>();
  if (kind == "labeled") {
    label(event.at("point_id").get<std::string>(), event.at("label").get<std::string>());
    return;
  }
  if (kind == "queried") {
    std::lock_guard lock(mu_);
    const auto& sel = run_.next();
    const std::string logged = event.at("point_id").get<std::string>();
    if (!sel || run_.testset()[sel->index].id != logged) {
      throw ConsistencyError("session " + id_ + ": replay diverged at query of '" +
                             logged + "'");
    }
    return;
  }
  throw ConsistencyError("session " + id_ + ": unknown event '" + kind + "'");
}

SessionStore::SessionStore(std::vector<Dataset> datasets,
                           std::optional<std::filesystem::path> log_dir)
    : log_dir_(std::move(log_dir)) {
  for (Dataset& d : datasets) {
    const std::string name = d.name;
    datasets_.emplace(name, std::move(d));
  }
  if (!log_dir_) return;
  std::filesystem::create_directories(*log_dir_);
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(*log_dir_)) {
    if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& file : logs) replay(file);
}

void SessionStore::replay(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::string line;
  std::shared_ptr<Session> session;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json e = json::parse(line);
    if (!session) {
      if (e.at("event") != "created") {
        throw ConsistencyError(file.string() + ": log does not start with 'created'");
      }
      session = open(e.at("session").get<std::string>(),
                     e.at("dataset").get<std::string>(),
                     config_from_json(e.at("config")), /*fresh=*/false);
      continue;
    }
    session->apply_event(e);
  }
  if (session) {
    session->set_sink(std::move(pending_sinks_[session->id()]));
    pending_sinks_.erase(session->id());
  }
}

std::shared_ptr<Session> SessionStore::open(const std::string& id,
                                            const std::string& dataset,
                                            const SearchConfig& cfg, bool fresh) {
  const auto it = datasets_.find(dataset);
  if (it == datasets_.end()) throw NotFound("unknown dataset '" + dataset + "'");

  Session::EventSink sink;
  if (log_dir_) {
    auto stream = std::make_shared<std::ofstream>();
    sink = [stream, file = *log_dir_ / (id + ".jsonl")](const ordered_json& e) {
      if (!stream->is_open()) stream->open(file, std::ios::app);
      *stream << e.dump() << '\n';
      stream->flush();
    };
  }
  // Replayed events are already on disk; the sink is attached afterwards.
  auto session = std::make_shared<Session>(id, it->second, cfg,
                                           fresh ? sink : Session::EventSink{});
  if (!fresh) pending_sinks_[id] = std::move(sink);
  sessions_[id] = session;
  return session;
}

std::string SessionStore::next_id() {
  std::string id;
  do {
    id = fmt_id(++counter_);
  } while (sessions_.contains(id));
  return id;
}

std::shared_ptr<Session> SessionStore::create(const json& body) {
  if (!body.is_object()) throw BadRequest("request body must be a JSON object");
  if (!body.contains("dataset") || !body["dataset"].is_string()) {
    throw BadRequest("field 'dataset' (string) is required");
  }
  SearchConfig cfg;
  try {
    if (body.contains("config")) cfg = config_from_json(body["config"]);
  } catch (const Error& e) {
    throw BadRequest(e.what());
  } catch (const json::exception& e) {
    throw BadRequest(std::string("config: ") + e.what());
  }
  std::lock_guard lock(mu_);
  return open(next_id(), body["dataset"].get<std::string>(), cfg, /*fresh=*/true);
}

std::shared_ptr<Session> SessionStore::get(std::string_view id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(std::string(id));
  if (it == sessions_.end()) throw NotFound("unknown session '" + std::string(id) + "'");
  return it->second;
}

ordered_json SessionStore::list() const {
  std::lock_guard lock(mu_);
  ordered_json out = ordered_json::array();
  for (const auto& [id, s] : sessions_) out.push_back(s->brief());
  return out;
}

}  // namespace uuaudit::service
