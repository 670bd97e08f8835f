#include "pacvote/types.hpp"

#include <cmath>
#include <numeric>

namespace pacvote {

namespace {
constexpr double kZeroWeight = 1e-15;
}

Dataset::Dataset(std::vector<Example> examples, std::string name)
    : examples_(std::move(examples)), name_(std::move(name)) {
  const std::size_t dim = examples_.empty() ? 0 : examples_.front().features.size();
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.label != -1 && ex.label != 1) {
      throw InputError("example " + std::to_string(i) + ": label must be -1 or +1");
    }
    if (ex.features.size() != dim) {
      throw InputError("example " + std::to_string(i) + ": expected " + std::to_string(dim) +
                       " features, got " + std::to_string(ex.features.size()));
    }
  }
}

std::size_t Dataset::dimension() const {
  return examples_.empty() ? 0 : examples_.front().features.size();
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples_.at(i));
  return Dataset(std::move(out), name_);
}

std::size_t complement_index(std::size_t j, std::size_t n) {
  if (n == 0 || j >= 2 * n) {
    throw std::out_of_range("voter index " + std::to_string(j) + " outside [0, " +
                            std::to_string(2 * n) + ")");
  }
  return j < n ? j + n : j - n;
}

VoteMatrix VoteMatrix::from_half(const Eigen::MatrixXd& half, std::vector<int> labels) {
  if (static_cast<std::size_t>(half.rows()) != labels.size()) {
    throw InputError("vote matrix has " + std::to_string(half.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (half.cols() == 0) throw InputError("vote matrix needs at least one voter");
  for (Eigen::Index i = 0; i < half.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] != 1 && labels[static_cast<std::size_t>(i)] != -1) {
      throw InputError("label must be -1 or +1");
    }
    for (Eigen::Index j = 0; j < half.cols(); ++j) {
      const double v = half(i, j);
      if (!(v >= -1.0 && v <= 1.0)) {
        throw InputError("voter output " + std::to_string(v) + " at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ") outside [-1, 1]");
      }
    }
  }
  VoteMatrix f;
  f.values_.resize(half.rows(), 2 * half.cols());
  f.values_.leftCols(half.cols()) = half;
  f.values_.rightCols(half.cols()) = -half;
  f.labels_ = std::move(labels);
  return f;
}

Posterior::Posterior(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InputError("posterior needs at least one weight");
  for (double& w : weights_) {
    if (!std::isfinite(w) || w < -kZeroWeight) {
      throw InputError("posterior weights must be finite and non-negative");
    }
    if (w < kZeroWeight) w = 0.0;
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("posterior weights sum to " + std::to_string(total) + ", not 1");
  }
  for (double& w : weights_) w /= total;
}

Posterior Posterior::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw InputError("weights sum to zero");
  for (double& w : weights) w /= total;
  return Posterior(std::move(weights));
}

Posterior Posterior::uniform(std::size_t voters) {
  if (voters == 0) throw InputError("posterior needs at least one voter");
  return Posterior(std::vector<double>(voters, 1.0 / static_cast<double>(voters)));
}

bool Posterior::is_quasi_uniform(double tol) const {
  if (weights_.size() % 2 != 0) return false;
  const std::size_t n = half_size();
  const double pair_mass = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(weights_[j] + weights_[j + n] - pair_mass) > tol) return false;
  }
  return true;
}

std::string to_string(BoundId id) {
  switch (id) {
    case BoundId::B0: return "B0";
    case BoundId::B1: return "B1";
    case BoundId::B1s: return "B1s";
    case BoundId::B2: return "B2";
    case BoundId::B2p: return "B2p";
    case BoundId::B3: return "B3";
    case BoundId::B3p: return "B3p";
  }
  return "?";
}

BoundId parse_bound_id(const std::string& text) {
  for (BoundId id : {BoundId::B0, BoundId::B1, BoundId::B1s, BoundId::B2, BoundId::B2p,
                     BoundId::B3, BoundId::B3p}) {
    if (to_string(id) == text) return id;
  }
  throw InputError("unknown bound id '" + text + "' (expected B0, B1, B1s, B2, B2p, B3, B3p)");
}

}  // namespace pacvote
