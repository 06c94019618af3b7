#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace evoindex {

/// Opaque identifier for a query term.
struct TermId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(TermId, TermId) = default;
};

/// Opaque identifier for an indexed object.
struct ObjectId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(ObjectId, ObjectId) = default;
};

/// A (term, object) pair, the key of one TOR-tuple.
struct IndexKey {
  TermId term;
  ObjectId object;
  friend constexpr auto operator<=>(const IndexKey&, const IndexKey&) = default;

  constexpr std::uint64_t packed() const noexcept {
    return (std::uint64_t{term.value} << 32) | object.value;
  }
};

inline std::ostream& operator<<(std::ostream& os, TermId t) { return os << "t" << t.value; }
inline std::ostream& operator<<(std::ostream& os, ObjectId o) { return os << "o" << o.value; }
inline std::ostream& operator<<(std::ostream& os, const IndexKey& k) {
  return os << "(" << k.term << "," << k.object << ")";
}

}  // namespace evoindex

template <>
struct std::hash<evoindex::TermId> {
  std::size_t operator()(evoindex::TermId t) const noexcept { return std::hash<std::uint32_t>{}(t.value); }
};

template <>
struct std::hash<evoindex::ObjectId> {
  std::size_t operator()(evoindex::ObjectId o) const noexcept { return std::hash<std::uint32_t>{}(o.value); }
};

template <>
struct std::hash<evoindex::IndexKey> {
  std::size_t operator()(const evoindex::IndexKey& k) const noexcept {
    // splitmix64 finalizer
    std::uint64_t x = k.packed() + 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(x ^ (x >> 31));
  }
};
