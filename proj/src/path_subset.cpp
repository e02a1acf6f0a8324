#include "sorkin/path_subset.hpp"

#include <algorithm>
#include <bit>

#include "sorkin/error.hpp"

namespace sorkin {

PathSubset::PathSubset(std::uint32_t mask) : mask_(mask) {
  if (mask >> kMaxPaths) throw ParameterError("path mask exceeds 16 paths");
}

PathSubset PathSubset::full(int n_paths) {
  if (n_paths < 0 || n_paths > kMaxPaths)
    throw ParameterError("path count must be in [0, 16]");
  return PathSubset((1u << n_paths) - 1u);
}

PathSubset PathSubset::of(std::initializer_list<int> paths) {
  std::uint32_t m = 0;
  for (int p : paths) {
    if (p < 0 || p >= kMaxPaths) throw ParameterError("path index out of range");
    m |= 1u << p;
  }
  return PathSubset(m);
}

int PathSubset::size() const noexcept { return std::popcount(mask_); }

std::vector<int> PathSubset::paths() const {
  std::vector<int> out;
  for (int k = 0; k < kMaxPaths; ++k)
    if (contains(k)) out.push_back(k);
  return out;
}

std::string PathSubset::label() const {
  if (empty()) return "0";
  std::string s;
  for (int k : paths()) s.push_back(static_cast<char>('A' + k));
  return s;
}

PathSubset PathSubset::from_label(const std::string& label) {
  if (label == "0" || label.empty()) return PathSubset();
  std::uint32_t m = 0;
  for (char c : label) {
    int k = c - 'A';
    if (k < 0 || k >= kMaxPaths) throw ParameterError("bad path label: " + label);
    m |= 1u << k;
  }
  return PathSubset(m);
}

bool canonical_less(PathSubset a, PathSubset b) {
  if (a.size() != b.size()) return a.size() < b.size();
  auto pa = a.paths();
  auto pb = b.paths();
  return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
}

std::vector<PathSubset> all_subsets(PathSubset paths) {
  std::vector<PathSubset> out;
  const std::uint32_t m = paths.mask();
  // Walk submasks of m, including 0.
  std::uint32_t s = m;
  while (true) {
    out.emplace_back(s);
    if (s == 0) break;
    s = (s - 1) & m;
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::vector<PathSubset> enumerate_order_subsets(PathSubset paths, int order) {
  if (order < 2 || order > paths.size())
    throw ParameterError("order must satisfy 2 <= j <= |paths|");
  std::vector<PathSubset> out;
  for (PathSubset s : all_subsets(paths))
    if (s.size() == order) out.push_back(s);
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

}  // namespace sorkin
