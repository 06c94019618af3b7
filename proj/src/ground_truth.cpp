#include "evoindex/ground_truth.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace evoindex {

GroundTruth::GroundTruth(std::span<const IndexKey> pairs) {
  pairs_.assign(pairs.begin(), pairs.end());
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  set_.reserve(pairs_.size());
  for (const auto& key : pairs_) {
    set_.insert(key.packed());
    terms_.push_back(key.term);
    objects_.push_back(key.object);
    by_object_[key.object].push_back(key.term);
  }
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  std::sort(objects_.begin(), objects_.end());
  objects_.erase(std::unique(objects_.begin(), objects_.end()), objects_.end());
}

GroundTruth GroundTruth::random_bipartite(std::size_t terms, std::size_t objects, std::size_t degree, Rng& rng) {
  if (terms == 0 || objects == 0) throw std::invalid_argument("truth graph needs terms and objects");
  if (degree == 0 || degree > terms) throw std::invalid_argument("truth degree must lie in [1, terms]");
  std::vector<IndexKey> pairs;
  pairs.reserve(objects * degree);
  std::vector<std::uint32_t> pool(terms);
  for (std::size_t i = 0; i < terms; ++i) pool[i] = static_cast<std::uint32_t>(i);
  for (std::size_t o = 0; o < objects; ++o) {
    // partial Fisher-Yates: the first `degree` slots become a uniform subset
    for (std::size_t i = 0; i < degree; ++i) {
      const std::size_t j = i + uniform_index(rng, terms - i);
      std::swap(pool[i], pool[j]);
      pairs.push_back({TermId{pool[i]}, ObjectId{static_cast<std::uint32_t>(o)}});
    }
  }
  return GroundTruth(pairs);
}

std::span<const TermId> GroundTruth::terms_of(ObjectId object) const {
  auto it = by_object_.find(object);
  if (it == by_object_.end()) return {};
  return it->second;
}

void GroundTruth::save(std::ostream& out) const {
  for (const auto& key : pairs_) out << key.term.value << ',' << key.object.value << '\n';
}

void GroundTruth::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
}

GroundTruth GroundTruth::load(std::istream& in) {
  std::vector<IndexKey> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::uint32_t t = 0, o = 0;
    const char* begin = line.data();
    const char* end = line.data() + line.size();
    bool ok = comma != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(begin, begin + comma, t);
      auto r2 = std::from_chars(begin + comma + 1, end, o);
      ok = r1.ec == std::errc{} && r1.ptr == begin + comma && r2.ec == std::errc{} && r2.ptr == end;
    }
    if (!ok) throw std::runtime_error("truth line " + std::to_string(line_no) + ": expected term_id,object_id");
    pairs.push_back({TermId{t}, ObjectId{o}});
  }
  return GroundTruth(pairs);
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open truth file " + path.string());
  return load(in);
}

}  // namespace evoindex
