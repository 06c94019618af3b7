#include "evoindex/index_store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "evoindex/ground_truth.hpp"

namespace evoindex {

namespace {

const std::unordered_map<ObjectId, double> kEmptyPostings;

void check_weight(double weight) {
  if (!(weight > 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("weight must lie in (0, 1], got " + std::to_string(weight));
  }
}

// Shortest decimal form that parses back to the same double.
std::string format_exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("snapshot line " + std::to_string(line_no) + ": cannot parse '" +
                             std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const char* to_string(IndexClass c) noexcept {
  switch (c) {
    case IndexClass::Explored: return "explored";
    case IndexClass::Unexplored: return "unexplored";
    case IndexClass::Absent: return "absent";
  }
  return "?";
}

void IndexParams::validate() const {
  if (!(relevance_base > 0.0)) throw std::invalid_argument("relevance_base must be positive");
  if (!(r_init > 0.0)) throw std::invalid_argument("r_init must be positive");
  if (!(r_init < threshold)) throw std::invalid_argument("r_init must be below the threshold");
}

IndexStore::IndexStore(IndexParams params) : params_(params) { params_.validate(); }

double& IndexStore::insert(TermId term, ObjectId object, double riv) {
  auto [it, inserted] = postings_[term].emplace(object, riv);
  if (!inserted) throw std::logic_error("duplicate tuple");
  object_terms_[object].push_back(term);
  if (object_links_[object]++ == 0) {
    object_slot_[object] = object_list_.size();
    object_list_.push_back(object);
  }
  total_riv_ += riv;
  ++tuple_count_;
  if (is_explored(riv)) ++pool_size_;
  return it->second;
}

void IndexStore::erase(TermId term, ObjectId object, double riv) {
  auto& plist = postings_.at(term);
  plist.erase(object);
  if (plist.empty()) postings_.erase(term);

  auto& terms = object_terms_.at(object);
  terms.erase(std::find(terms.begin(), terms.end(), term));
  if (terms.empty()) object_terms_.erase(object);

  if (--object_links_.at(object) == 0) {
    object_links_.erase(object);
    const std::size_t slot = object_slot_.at(object);
    const ObjectId last = object_list_.back();
    object_list_[slot] = last;
    object_slot_[last] = slot;
    object_list_.pop_back();
    object_slot_.erase(object);
  }
  total_riv_ -= riv;
  --tuple_count_;
  if (is_explored(riv)) --pool_size_;
}

std::size_t IndexStore::init_minimal_index(ObjectId object, std::span<const TermId> terms) {
  if (terms.empty()) throw std::invalid_argument("an object needs at least one term to be searchable");
  std::size_t created = 0;
  for (TermId term : terms) {
    if (riv(term, object)) continue;
    insert(term, object, params_.r_init);
    ++created;
  }
  return created;
}

RivChange IndexStore::reinforce(TermId term, ObjectId object, double weight) {
  check_weight(weight);
  RivChange change;
  auto pit = postings_.find(term);
  double* slot = nullptr;
  if (pit != postings_.end()) {
    if (auto it = pit->second.find(object); it != pit->second.end()) slot = &it->second;
  }
  if (slot == nullptr) {
    slot = &insert(term, object, params_.r_init);
    change.created = true;
  }
  const double before = *slot;
  change.delta = weight * params_.relevance_base;
  *slot += change.delta;
  total_riv_ += change.delta;
  if (!is_explored(before) && is_explored(*slot)) ++pool_size_;
  change.riv = *slot;
  return change;
}

RivChange IndexStore::penalize(TermId term, ObjectId object, double weight, double scale) {
  check_weight(weight);
  if (!(scale >= 0.0)) throw std::invalid_argument("penalty scale must be non-negative");
  RivChange change;
  auto pit = postings_.find(term);
  if (pit == postings_.end()) return change;
  auto it = pit->second.find(object);
  if (it == pit->second.end()) return change;

  double& value = it->second;
  const double before = value;
  const double magnitude = std::min(before, scale * weight * params_.relevance_base);
  value = before - magnitude;
  change.delta = -magnitude;
  change.riv = value;
  total_riv_ -= magnitude;
  if (is_explored(before) && !is_explored(value)) --pool_size_;
  return change;
}

std::optional<double> IndexStore::riv(TermId term, ObjectId object) const {
  auto pit = postings_.find(term);
  if (pit == postings_.end()) return std::nullopt;
  auto it = pit->second.find(object);
  if (it == pit->second.end()) return std::nullopt;
  return it->second;
}

IndexClass IndexStore::classify(TermId term, ObjectId object) const {
  auto value = riv(term, object);
  if (!value) return IndexClass::Absent;
  return is_explored(*value) ? IndexClass::Explored : IndexClass::Unexplored;
}

std::size_t IndexStore::deconstruct(TermId term, ObjectId object) {
  auto value = riv(term, object);
  if (!value) return 0;
  erase(term, object, *value);
  return 1;
}

std::size_t IndexStore::deconstruct(ObjectId object) {
  auto it = object_terms_.find(object);
  if (it == object_terms_.end()) return 0;
  const std::vector<TermId> terms = it->second;
  for (TermId term : terms) erase(term, object, postings_.at(term).at(object));
  return terms.size();
}

double IndexStore::cumulative_riv(std::span<const TermId> terms, ObjectId object) const {
  if (terms.empty()) throw std::invalid_argument("cumulative_riv needs at least one term");
  double sum = 0.0;
  for (TermId term : terms) sum += riv(term, object).value_or(0.0);
  return sum;
}

std::size_t IndexStore::count_unexplored(const GroundTruth& truth) const {
  std::size_t n = 0;
  for (const IndexKey& key : truth.pairs()) {
    if (classify(key.term, key.object) != IndexClass::Explored) ++n;
  }
  return n;
}

double IndexStore::recompute_total_riv() const {
  double sum = 0.0;
  for (const auto& tuple : tuples()) sum += tuple.riv;
  return sum;
}

const std::unordered_map<ObjectId, double>& IndexStore::postings(TermId term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? kEmptyPostings : it->second;
}

std::vector<TorTuple> IndexStore::tuples() const {
  std::vector<TorTuple> out;
  out.reserve(tuple_count_);
  for (const auto& [term, plist] : postings_) {
    for (const auto& [object, value] : plist) out.push_back({term, object, value});
  }
  std::sort(out.begin(), out.end(), [](const TorTuple& a, const TorTuple& b) {
    return IndexKey{a.term, a.object} < IndexKey{b.term, b.object};
  });
  return out;
}

void IndexStore::for_each(const std::function<void(const TorTuple&)>& fn) const {
  for (const auto& tuple : tuples()) fn(tuple);
}

void IndexStore::save(std::ostream& out) const {
  out << format_exact(params_.threshold) << ',' << format_exact(params_.relevance_base) << ','
      << format_exact(params_.r_init) << '\n';
  for (const auto& t : tuples()) {
    out << t.term.value << ',' << t.object.value << ',' << format_exact(t.riv) << '\n';
  }
}

void IndexStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

IndexStore IndexStore::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot is empty");
  auto header = split_commas(line);
  if (header.size() != 3) throw std::runtime_error("snapshot line 1: expected h,R,r_init");
  IndexParams params;
  params.threshold = parse_field<double>(header[0], line_no);
  params.relevance_base = parse_field<double>(header[1], line_no);
  params.r_init = parse_field<double>(header[2], line_no);
  IndexStore store(params);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (fields.size() != 3) {
      throw std::runtime_error("snapshot line " + std::to_string(line_no) + ": expected term_id,object_id,riv");
    }
    const TermId term{parse_field<std::uint32_t>(fields[0], line_no)};
    const ObjectId object{parse_field<std::uint32_t>(fields[1], line_no)};
    const double value = parse_field<double>(fields[2], line_no);
    if (!(value >= 0.0)) throw std::runtime_error("snapshot line " + std::to_string(line_no) + ": negative riv");
    if (store.riv(term, object)) {
      throw std::runtime_error("snapshot line " + std::to_string(line_no) + ": duplicate pair");
    }
    store.insert(term, object, value);
  }
  return store;
}

IndexStore IndexStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  try {
    return load(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace evoindex
