#pragma once

#include <span>
#include <vector>

#include "sorkin/path_subset.hpp"

namespace sorkin {

/// One detected-flux reading per shutter setting of an N-path device,
/// indexed by subset mask. Missing readings are NaN and raise
/// IncompleteDataError on access.
class RateTuple {
 public:
  RateTuple() = default;
  explicit RateTuple(int n_paths);
  RateTuple(int n_paths, std::vector<double> readings_by_mask);

  int n_paths() const noexcept { return n_paths_; }
  std::size_t size() const noexcept { return readings_.size(); }

  void set(PathSubset s, double value);
  double at(PathSubset s) const;
  double operator[](std::uint32_t mask) const noexcept { return readings_[mask]; }
  bool has(PathSubset s) const noexcept;

  bool complete() const noexcept;
  /// Negative readings are legal (amplified-voltage noise) but worth flagging.
  bool has_negative() const noexcept;
  double max_abs() const noexcept;

  std::span<const double> readings() const noexcept { return readings_; }
  std::span<double> readings() noexcept { return readings_; }

 private:
  int n_paths_ = 0;
  std::vector<double> readings_;
};

}  // namespace sorkin
