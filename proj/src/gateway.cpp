#include "evoindex/gateway.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "httplib.h"

namespace evoindex {

using nlohmann::json;

namespace {

// JSON built in code holds signed integers; parsed JSON holds unsigned ones.
bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

}  // namespace

TermId TermDictionary::intern(const std::string& term) {
  if (auto it = ids_.find(term); it != ids_.end()) return it->second;
  const TermId id{next_++};
  ids_.emplace(term, id);
  names_.emplace(id, term);
  return id;
}

std::optional<TermId> TermDictionary::find(const std::string& term) const {
  auto it = ids_.find(term);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::string TermDictionary::name(TermId id) const {
  auto it = names_.find(id);
  return it == names_.end() ? "#" + std::to_string(id.value) : it->second;
}

void TermDictionary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& [id, term] : names_) out << id.value << ',' << term << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TermDictionary TermDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open term dictionary " + path.string());
  TermDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::uint32_t id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), id);
    if (comma == std::string::npos || ec != std::errc{} || ptr != line.data() + comma) {
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": expected id,term");
    }
    const std::string term = line.substr(comma + 1);
    if (dict.ids_.contains(term) || dict.names_.contains(TermId{id})) {
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": duplicate entry");
    }
    dict.ids_.emplace(term, TermId{id});
    dict.names_.emplace(TermId{id}, term);
    dict.next_ = std::max(dict.next_, id + 1);
  }
  return dict;
}

Gateway::Gateway(IndexStore store, GatewayOptions options, TermDictionary dictionary, std::optional<GroundTruth> truth)
    : store_(std::move(store)),
      initial_(store_),
      options_(std::move(options)),
      dictionary_(std::move(dictionary)),
      truth_(std::move(truth)),
      rng_(options_.seed) {
  options_.engine.validate();
}

Gateway::Response Gateway::error(int status, const std::string& message) const {
  return {status, json{{"error", message}, {"version", version_}}};
}

Gateway::Response Gateway::query(const json& request) {
  std::lock_guard lock(mutex_);
  if (!request.is_object()) return error(400, "request body must be a JSON object");
  if (!request.contains("session") || !request["session"].is_string()) return error(400, "'session' must be a string");
  if (!request.contains("terms") || !request["terms"].is_array()) return error(400, "'terms' must be an array");
  std::vector<std::string> words;
  for (const auto& t : request["terms"]) {
    if (!t.is_string() || t.get<std::string>().empty()) return error(400, "'terms' must hold non-empty strings");
    const auto word = t.get<std::string>();
    if (std::find(words.begin(), words.end(), word) == words.end()) words.push_back(word);
  }
  if (words.empty()) return error(400, "a query needs at least one term");
  if (store_.object_count() == 0) return error(409, "the index holds no objects");

  std::vector<TermId> terms;
  for (const auto& w : words) terms.push_back(dictionary_.intern(w));
  const Query q(terms);
  const MQList presented = select_action(store_, q, options_.engine, rng_);

  Session& session = sessions_[request["session"].get<std::string>()];
  session = Session{next_token_++, terms, presented, {}, false};
  ++version_;

  json results = json::array();
  for (const auto& e : presented.entries) {
    results.push_back({{"rank", e.rank},
                       {"object", e.object.value},
                       {"provenance", std::string(to_string(e.provenance))},
                       {"score", store_.cumulative_riv(terms, e.object)}});
  }
  return {200, json{{"version", version_}, {"token", session.token}, {"results", std::move(results)}}};
}

Gateway::Response Gateway::click(const json& request) {
  std::lock_guard lock(mutex_);
  if (!request.is_object()) return error(400, "request body must be a JSON object");
  if (!request.contains("session") || !request["session"].is_string()) return error(400, "'session' must be a string");
  if (!request.contains("token") || !non_negative_integer(request["token"])) {
    return error(400, "'token' must be a non-negative integer");
  }
  std::optional<ObjectId> object;
  if (request.contains("object") && !request["object"].is_null()) {
    if (!non_negative_integer(request["object"])) return error(400, "'object' must be a non-negative integer or null");
    object = ObjectId{request["object"].get<std::uint32_t>()};
  }

  auto it = sessions_.find(request["session"].get<std::string>());
  if (it == sessions_.end()) return error(409, "unknown session; query first");
  Session& session = it->second;
  if (request["token"].get<std::uint64_t>() != session.token || session.closed) {
    return error(409, "stale presentation token; query again");
  }
  if (object && !session.presented.contains(*object)) return error(400, "object was not presented");
  if (object && std::find(session.clicked.begin(), session.clicked.end(), *object) != session.clicked.end()) {
    return error(409, "object already clicked for this presentation");
  }

  Feedback fb;
  if (object) fb.clicked.push_back(*object);
  const Query q(session.query);
  const RewardSignal reward = apply_feedback(store_, q, session.presented, fb, options_.engine);
  if (object) {
    session.clicked.push_back(*object);
  } else {
    session.closed = true;
  }
  log_.push_back({MutationRecord::Kind::Feedback, session.query, session.presented, fb, {}, {}});
  ++version_;

  auto pairs = [&](const std::vector<IndexKey>& keys) {
    json out = json::array();
    for (const auto& k : keys) out.push_back({{"term", dictionary_.name(k.term)}, {"object", k.object.value}});
    return out;
  };
  return {200, json{{"version", version_},
                    {"total", reward.total},
                    {"promoted", pairs(reward.promoted)},
                    {"demoted", pairs(reward.demoted)}}};
}

Gateway::Response Gateway::metrics() const {
  std::lock_guard lock(mutex_);
  json body{{"version", version_},
            {"generator_size", store_.generator_size()},
            {"pool_size", store_.pool_size()},
            {"total_riv", store_.total_riv()},
            {"tuples", store_.tuple_count()},
            {"objects", store_.object_count()}};
  if (truth_ && truth_->size() > 0) {
    const auto remaining = store_.count_unexplored(*truth_);
    body["p"] = static_cast<double>(truth_->size() - remaining) / static_cast<double>(truth_->size());
  }
  json top = json::object();
  for (const auto& [id, name] : dictionary_.entries()) {
    const auto& plist = store_.postings(id);
    if (plist.empty()) continue;
    std::vector<std::pair<double, ObjectId>> ranked;
    for (const auto& [o, riv] : plist) ranked.emplace_back(riv, o);
    const std::size_t n = std::min(options_.top_objects_per_term, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    json list = json::array();
    for (std::size_t i = 0; i < n; ++i) list.push_back({{"object", ranked[i].second.value}, {"riv", ranked[i].first}});
    top[name] = std::move(list);
  }
  body["top_objects"] = std::move(top);
  return {200, std::move(body)};
}

Gateway::Response Gateway::deconstruct(const json& request) {
  std::lock_guard lock(mutex_);
  if (!request.is_object()) return error(400, "request body must be a JSON object");
  if (!request.contains("object") || !non_negative_integer(request["object"])) {
    return error(400, "'object' must be a non-negative integer");
  }
  const ObjectId object{request["object"].get<std::uint32_t>()};
  std::size_t removed = 0;
  if (request.contains("term")) {
    if (!request["term"].is_string()) return error(400, "'term' must be a string");
    const auto term = dictionary_.find(request["term"].get<std::string>());
    if (term) {
      removed = store_.deconstruct(*term, object);
      log_.push_back({MutationRecord::Kind::DeconstructPair, {}, {}, {}, *term, object});
    }
  } else {
    removed = store_.deconstruct(object);
    log_.push_back({MutationRecord::Kind::DeconstructObject, {}, {}, {}, {}, object});
  }
  // Presentations that show a removed object can no longer be clicked.
  if (!store_.knows(object)) {
    for (auto& [name, session] : sessions_) {
      if (session.presented.contains(object)) session.closed = true;
    }
  }
  ++version_;
  return {200, json{{"version", version_}, {"removed", removed}}};
}

Gateway::Response Gateway::snapshot(const json& request) {
  std::lock_guard lock(mutex_);
  std::optional<std::filesystem::path> path = options_.snapshot_path;
  if (request.is_object() && request.contains("path")) {
    if (!request["path"].is_string()) return error(400, "'path' must be a string");
    path = request["path"].get<std::string>();
  }
  if (!path) return error(400, "no snapshot path configured; pass 'path'");
  try {
    store_.save(*path);
    dictionary_.save(path->string() + ".terms");
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
  return {200, json{{"version", version_}, {"path", path->string()}, {"tuples", store_.tuple_count()}}};
}

std::uint64_t Gateway::version() const {
  std::lock_guard lock(mutex_);
  return version_;
}

std::vector<MutationRecord> Gateway::mutation_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

IndexStore Gateway::store_copy() const {
  std::lock_guard lock(mutex_);
  return store_;
}

IndexStore replay(const IndexStore& initial, const std::vector<MutationRecord>& log, const EngineConfig& engine) {
  IndexStore store = initial;
  for (const auto& m : log) {
    switch (m.kind) {
      case MutationRecord::Kind::Feedback: apply_feedback(store, Query(m.query), m.presented, m.feedback, engine); break;
      case MutationRecord::Kind::DeconstructPair: store.deconstruct(m.term, m.object); break;
      case MutationRecord::Kind::DeconstructObject: store.deconstruct(m.object); break;
    }
  }
  return store;
}

struct HttpFrontend::Impl {
  httplib::Server server;
};

HttpFrontend::HttpFrontend(Gateway& gateway) : impl_(std::make_unique<Impl>()) {
  auto reply = [](httplib::Response& res, const Gateway::Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto with_body = [&gateway, reply](Gateway::Response (Gateway::*handler)(const json&)) {
    return [&gateway, reply, handler](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body.empty() ? std::string("{}") : req.body, nullptr, false);
      if (body.is_discarded()) {
        reply(res, {400, json{{"error", "malformed JSON body"}, {"version", gateway.version()}}});
        return;
      }
      reply(res, (gateway.*handler)(body));
    };
  };
  impl_->server.Post("/query", with_body(&Gateway::query));
  impl_->server.Post("/click", with_body(&Gateway::click));
  impl_->server.Post("/deconstruct", with_body(&Gateway::deconstruct));
  impl_->server.Post("/snapshot", with_body(&Gateway::snapshot));
  impl_->server.Get("/metrics", [&gateway, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, gateway.metrics());
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::listen() { return impl_->server.listen_after_bind(); }

void HttpFrontend::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace evoindex
