#include "smom/vector_ops.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace smom {

Vector clip(const Vector& x, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("clip: lambda must be positive");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("clip: input vector must be finite");
  }
  const double norm = x.norm();
  if (norm <= lambda) {
    return x;
  }
  return (lambda / norm) * x;
}

namespace {

void check_same_dimension(std::span<const Vector> samples) {
  const Eigen::Index d = samples[0].size();
  for (const Vector& s : samples) {
    if (s.size() != d) {
      throw std::invalid_argument("samples must share one dimension");
    }
  }
}

}  // namespace

Vector coordinate_median(std::span<const Vector> samples) {
  if (samples.empty() || samples.size() % 2 == 0) {
    throw std::invalid_argument("coordinate_median: sample count must be odd and >= 1");
  }
  check_same_dimension(samples);
  const Eigen::Index d = samples[0].size();
  const std::size_t mid = samples.size() / 2;
  Vector out(d);
  std::vector<double> column(samples.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      column[i] = samples[i][j];
    }
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid),
                     column.end());
    out[j] = column[mid];
  }
  return out;
}

Vector mean(std::span<const Vector> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("mean: sample set must be non-empty");
  }
  check_same_dimension(samples);
  Vector acc = Vector::Zero(samples[0].size());
  for (const Vector& s : samples) {
    acc += s;
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace smom
