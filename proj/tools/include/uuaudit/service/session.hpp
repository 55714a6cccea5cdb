#pragma once

#include <cstddef>
#include <functional>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uuaudit/config.hpp"
#include "uuaudit/search.hpp"
#include "uuaudit/testset.hpp"
#include "uuaudit/trace.hpp"

namespace uuaudit::service {

// Request failures with a fixed HTTP status.
struct RequestError : std::runtime_error {
  RequestError(int status, const std::string& what)
      : std::runtime_error(what), status(status) {}
  int status;
};
struct BadRequest : RequestError {
  explicit BadRequest(const std::string& w) : RequestError(400, w) {}
};
struct NotFound : RequestError {
  explicit NotFound(const std::string& w) : RequestError(404, w) {}
};
struct Conflict : RequestError {
  explicit Conflict(const std::string& w) : RequestError(409, w) {}
};

/// A dataset the server can open sessions on.
struct Dataset {
  std::string name;
  std::shared_ptr<const AuditData> data;
  // Labels accepted from the oracle: predicted classes plus any true labels
  // the file carried.
  std::set<std::string> classes;
};

Dataset make_dataset(std::string name, AuditData data);

enum class SessionStatus { awaiting_label, complete, aborted };
const char* to_string(SessionStatus s);

/// One interactive search with a human oracle. All members are safe to call
/// concurrently; state changes are serialized by the session's mutex.
class Session {
 public:
  using EventSink = std::function<void(const nlohmann::ordered_json&)>;

  /// Throws BadRequest when cfg is invalid for the dataset.
  Session(std::string id, Dataset dataset, SearchConfig cfg, EventSink sink = {});

  const std::string& id() const { return id_; }
  const std::string& dataset_name() const { return dataset_.name; }

  SessionStatus status() const;
  /// Pending query view. Conflict once the session is over.
  nlohmann::ordered_json next() const;
  /// Applies a label to the pending query. Conflict for a stale point id or
  /// a finished session, BadRequest for an unknown class.
  nlohmann::ordered_json label(std::string_view point_id, const std::string& label);
  nlohmann::ordered_json summary() const;
  nlohmann::ordered_json brief() const;
  QueryTrace trace() const;
  /// Trace in the same JSONL form the offline CLI writes.
  std::string trace_jsonl() const;

  /// Replays one logged event. `created` is handled by the store.
  void apply_event(const nlohmann::json& event);
  void set_sink(EventSink sink);

 private:
  void announce_pending();
  nlohmann::ordered_json metrics() const;
  SessionStatus status_locked() const;

  std::string id_;
  Dataset dataset_;
  mutable std::mutex mu_;
  mutable SearchRun run_;  // next() caches lazily
  EventSink sink_;
};

/// Owns datasets and sessions; persists each session as an append-only JSONL
/// event log under log_dir when one is given, and replays existing logs on
/// construction.
class SessionStore {
 public:
  SessionStore(std::vector<Dataset> datasets,
               std::optional<std::filesystem::path> log_dir = std::nullopt);

  /// POST /sessions body: {"dataset": name, "config": {...}}.
  std::shared_ptr<Session> create(const nlohmann::json& body);
  std::shared_ptr<Session> get(std::string_view id) const;
  nlohmann::ordered_json list() const;

 private:
  std::shared_ptr<Session> open(const std::string& id, const std::string& dataset,
                                const SearchConfig& cfg, bool fresh);
  void replay(const std::filesystem::path& file);
  std::string next_id();

  std::map<std::string, Dataset> datasets_;
  std::optional<std::filesystem::path> log_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, Session::EventSink> pending_sinks_;
  std::size_t counter_ = 0;
};

}  // namespace uuaudit::service
