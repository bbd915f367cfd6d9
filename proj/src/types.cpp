#include "grouplin/types.hpp"

#include <cmath>
#include <stdexcept>

namespace grouplin {

Dataset::Dataset(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() != v.size()) {
    throw std::invalid_argument("Dataset: x and v lengths differ (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  }
  observations.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    observations[i] = Observation{x[i], v[i]};
  }
}

std::vector<double> Dataset::xs() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = observations[i].x;
  return out;
}

std::vector<double> Dataset::vs() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = observations[i].v;
  return out;
}

void validate(const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("Dataset: empty");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& o = data.observations[i];
    if (!std::isfinite(o.x)) {
      throw std::invalid_argument("Dataset: x[" + std::to_string(i) +
                                  "] is not finite");
    }
    if (!(o.v > 0.0) || !std::isfinite(o.v)) {
      throw std::invalid_argument("Dataset: v[" + std::to_string(i) +
                                  "] must be a positive finite number");
    }
  }
}

}  // namespace grouplin
