#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace sorkin {

/// A set of open interferometer paths, stored as a bit mask over at most
/// 16 labelled paths (A = bit 0, B = bit 1, ...). The empty set is the
/// all-blocked background setting.
class PathSubset {
 public:
  static constexpr int kMaxPaths = 16;

  constexpr PathSubset() = default;
  explicit PathSubset(std::uint32_t mask);

  static PathSubset full(int n_paths);
  static PathSubset of(std::initializer_list<int> paths);

  constexpr std::uint32_t mask() const noexcept { return mask_; }
  int size() const noexcept;
  bool empty() const noexcept { return mask_ == 0; }
  bool contains(int path) const noexcept { return (mask_ >> path) & 1u; }
  bool is_subset_of(PathSubset other) const noexcept {
    return (mask_ & ~other.mask_) == 0;
  }

  std::vector<int> paths() const;
  /// "ABC" style label; "0" for the empty subset.
  std::string label() const;
  static PathSubset from_label(const std::string& label);

  friend constexpr bool operator==(PathSubset, PathSubset) = default;

 private:
  std::uint32_t mask_ = 0;
};

/// Canonical ordering: by cardinality, then lexicographic over sorted indices.
bool canonical_less(PathSubset a, PathSubset b);

/// All subsets of `paths` (including the empty one) in canonical order.
std::vector<PathSubset> all_subsets(PathSubset paths);

/// All size-`order` subsets of `paths` in canonical order.
std::vector<PathSubset> enumerate_order_subsets(PathSubset paths, int order);

std::uint64_t binomial(int n, int k);

}  // namespace sorkin
