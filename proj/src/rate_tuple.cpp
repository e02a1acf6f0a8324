#include "sorkin/rate_tuple.hpp"

#include <cmath>
#include <limits>

#include "sorkin/error.hpp"

namespace sorkin {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

RateTuple::RateTuple(int n_paths)
    : n_paths_(n_paths),
      readings_(std::size_t{1} << n_paths, kMissing) {
  if (n_paths < 1 || n_paths > PathSubset::kMaxPaths)
    throw ParameterError("path count must be in [1, 16]");
}

RateTuple::RateTuple(int n_paths, std::vector<double> readings_by_mask)
    : n_paths_(n_paths), readings_(std::move(readings_by_mask)) {
  if (n_paths < 1 || n_paths > PathSubset::kMaxPaths)
    throw ParameterError("path count must be in [1, 16]");
  if (readings_.size() != (std::size_t{1} << n_paths))
    throw ParameterError("reading vector must have 2^N entries");
}

void RateTuple::set(PathSubset s, double value) {
  if (s.mask() >= readings_.size()) throw ParameterError("subset outside path set");
  readings_[s.mask()] = value;
}

double RateTuple::at(PathSubset s) const {
  if (s.mask() >= readings_.size() || std::isnan(readings_[s.mask()]))
    throw IncompleteDataError("missing reading for subset " + s.label());
  return readings_[s.mask()];
}

bool RateTuple::has(PathSubset s) const noexcept {
  return s.mask() < readings_.size() && !std::isnan(readings_[s.mask()]);
}

bool RateTuple::complete() const noexcept {
  for (double r : readings_)
    if (std::isnan(r)) return false;
  return !readings_.empty();
}

bool RateTuple::has_negative() const noexcept {
  for (double r : readings_)
    if (r < 0.0) return true;
  return false;
}

double RateTuple::max_abs() const noexcept {
  double m = 0.0;
  for (double r : readings_)
    if (!std::isnan(r)) m = std::max(m, std::abs(r));
  return m;
}

}  // namespace sorkin
