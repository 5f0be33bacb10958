#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace jetforms {

/// Symmetric derivative multi-index: a sorted (non-decreasing) list of base
/// indices. Sorting canonicalizes the symmetry y^s_{ij} = y^s_{ji}.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<std::uint8_t> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
  }
  MultiIndex(std::initializer_list<int> entries) {
    entries_.reserve(entries.size());
    for (int e : entries) entries_.push_back(static_cast<std::uint8_t>(e));
    std::sort(entries_.begin(), entries_.end());
  }

  int order() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::uint8_t>& entries() const { return entries_; }
  int operator[](int k) const { return entries_[static_cast<std::size_t>(k)]; }

  /// J u {i}, keeping the sorted invariant.
  MultiIndex push(int i) const {
    MultiIndex r = *this;
    auto it = std::upper_bound(r.entries_.begin(), r.entries_.end(), static_cast<std::uint8_t>(i));
    r.entries_.insert(it, static_cast<std::uint8_t>(i));
    return r;
  }

  /// Concatenation (multiset union).
  MultiIndex merged(const MultiIndex& other) const {
    std::vector<std::uint8_t> e;
    e.reserve(entries_.size() + other.entries_.size());
    std::merge(entries_.begin(), entries_.end(), other.entries_.begin(), other.entries_.end(),
               std::back_inserter(e));
    MultiIndex r;
    r.entries_ = std::move(e);
    return r;
  }

  /// Multiplicity of base index i.
  int count(int i) const {
    return static_cast<int>(std::count(entries_.begin(), entries_.end(), static_cast<std::uint8_t>(i)));
  }

  /// Number of distinct permutations of the index tuple, |J|! / prod(mult!).
  long long permutation_count() const {
    long long fact = 1;
    for (int k = 2; k <= order(); ++k) fact *= k;
    std::size_t i = 0;
    while (i < entries_.size()) {
      std::size_t j = i;
      while (j < entries_.size() && entries_[j] == entries_[i]) ++j;
      long long mf = 1;
      for (std::size_t k = 2; k <= j - i; ++k) mf *= static_cast<long long>(k);
      fact /= mf;
      i = j;
    }
    return fact;
  }

  // Ordered by length first, then lexicographically.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    if (auto c = a.entries_.size() <=> b.entries_.size(); c != 0) return c;
    return a.entries_ <=> b.entries_;
  }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  std::string str() const {
    std::string s;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (k) s += ',';
      s += std::to_string(static_cast<int>(entries_[k]));
    }
    return s;
  }

private:
  std::vector<std::uint8_t> entries_;
};

/// All sorted multi-indices of a given length over base indices 0..n-1.
inline std::vector<MultiIndex> sorted_multi_indices(int n, int length) {
  std::vector<MultiIndex> out;
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(length), 0);
  if (length == 0) {
    out.emplace_back();
    return out;
  }
  while (true) {
    MultiIndex m;
    m = MultiIndex(cur);
    out.push_back(m);
    int k = length - 1;
    while (k >= 0 && cur[static_cast<std::size_t>(k)] == n - 1) --k;
    if (k < 0) break;
    std::uint8_t v = static_cast<std::uint8_t>(cur[static_cast<std::size_t>(k)] + 1);
    for (int j = k; j < length; ++j) cur[static_cast<std::size_t>(j)] = v;
  }
  return out;
}

}  // namespace jetforms
