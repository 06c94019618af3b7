#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "evoindex/engine.hpp"
#include "evoindex/ground_truth.hpp"
#include "evoindex/index_store.hpp"
#include "evoindex/random.hpp"
#include "evoindex/selection.hpp"

namespace evoindex {

/// Stable mapping between human-entered term strings and TermIds.
class TermDictionary {
 public:
  TermId intern(const std::string& term);
  std::optional<TermId> find(const std::string& term) const;
  /// The string for an id, or "#<id>" for ids never interned.
  std::string name(TermId id) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::map<TermId, std::string>& entries() const noexcept { return names_; }

  /// "id,term" per line; terms may contain commas, ids may not.
  void save(const std::filesystem::path& path) const;
  static TermDictionary load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, TermId> ids_;
  std::map<TermId, std::string> names_;
  std::uint32_t next_ = 0;
};

struct GatewayOptions {
  EngineConfig engine;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> snapshot_path;  ///< default target of /snapshot
  std::size_t top_objects_per_term = 5;
};

/// One applied store mutation, in application order.
struct MutationRecord {
  enum class Kind { Feedback, DeconstructPair, DeconstructObject } kind = Kind::Feedback;
  std::vector<TermId> query;
  MQList presented;
  Feedback feedback;
  TermId term;
  ObjectId object;
};

/// Request/response front of a live engine. Every handler takes the same
/// lock, so mutations apply one at a time and reads see a state between
/// mutations.
class Gateway {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  Gateway(IndexStore store, GatewayOptions options, TermDictionary dictionary = {},
          std::optional<GroundTruth> truth = std::nullopt);

  /// {"session": str, "terms": [str, ...]} -> {"version", "token", "results": [{"rank", "object", "provenance", "score"}]}
  Response query(const nlohmann::json& request);
  /// {"session": str, "token": int, "object": int | null} -> {"version", "total", "promoted", "demoted"}.
  /// A null or missing object reports that nothing in the list was relevant.
  Response click(const nlohmann::json& request);
  /// {"version", "generator_size", "pool_size", "total_riv", "tuples", "objects", "p"?, "top_objects"}
  Response metrics() const;
  /// {"object": int, "term"?: str} -> {"version", "removed"}
  Response deconstruct(const nlohmann::json& request);
  /// {"path"?: str} -> {"version", "path", "tuples"}; also writes the term dictionary to <path>.terms
  Response snapshot(const nlohmann::json& request);

  std::uint64_t version() const;
  std::vector<MutationRecord> mutation_log() const;
  IndexStore store_copy() const;
  const IndexStore& initial_store() const noexcept { return initial_; }

 private:
  struct Session {
    std::uint64_t token = 0;
    std::vector<TermId> query;
    MQList presented;
    std::vector<ObjectId> clicked;
    bool closed = false;
  };

  Response error(int status, const std::string& message) const;

  mutable std::mutex mutex_;
  IndexStore store_;
  const IndexStore initial_;
  GatewayOptions options_;
  TermDictionary dictionary_;
  std::optional<GroundTruth> truth_;
  Rng rng_;
  std::unordered_map<std::string, Session> sessions_;
  std::uint64_t next_token_ = 1;
  std::uint64_t version_ = 0;
  std::vector<MutationRecord> log_;
};

/// Replays a mutation log against a copy of `initial`.
IndexStore replay(const IndexStore& initial, const std::vector<MutationRecord>& log, const EngineConfig& engine);

/// HTTP binding: POST /query, /click, /deconstruct, /snapshot and GET /metrics.
class HttpFrontend {
 public:
  explicit HttpFrontend(Gateway& gateway);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evoindex
