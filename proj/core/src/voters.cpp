#include "pacvote/voters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pacvote {

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
  double acc = 0.0;
  if (type == Type::rbf) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double diff = a[k] - b[k];
      acc += diff * diff;
    }
    return std::exp(-gamma * acc);
  }
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

std::string to_string(KernelSpec::Type type) {
  return type == KernelSpec::Type::rbf ? "rbf" : "linear";
}

KernelSpec::Type parse_kernel_type(const std::string& text) {
  if (text == "rbf") return KernelSpec::Type::rbf;
  if (text == "linear") return KernelSpec::Type::linear;
  throw InputError("unknown kernel type '" + text + "' (expected rbf or linear)");
}

std::string to_string(VoterKind kind) {
  switch (kind) {
    case VoterKind::stumps: return "stumps";
    case VoterKind::kernel: return "kernel";
    case VoterKind::explicit_outputs: return "explicit";
  }
  return "?";
}

SelfComplementedVoterSet SelfComplementedVoterSet::from_stumps(std::vector<StumpDescriptor> stumps,
                                                               std::size_t dimension) {
  if (stumps.empty()) throw InputError("stump set is empty");
  for (const auto& s : stumps) {
    if (s.attribute >= dimension) throw InputError("stump attribute out of range");
    if (s.polarity != 1 && s.polarity != -1) throw InputError("stump polarity must be -1 or +1");
  }
  SelfComplementedVoterSet set;
  set.kind_ = VoterKind::stumps;
  set.n_ = stumps.size();
  set.dimension_ = dimension;
  set.stumps_ = std::move(stumps);
  return set;
}

SelfComplementedVoterSet SelfComplementedVoterSet::from_kernel(
    std::vector<std::vector<double>> anchors, KernelSpec kernel) {
  if (anchors.empty()) throw InputError("kernel voters need at least one anchor");
  const std::size_t dim = anchors.front().size();
  for (const auto& a : anchors) {
    if (a.size() != dim) throw InputError("kernel anchors have inconsistent dimension");
  }
  if (kernel.type == KernelSpec::Type::rbf && !(kernel.gamma > 0.0)) {
    throw InputError("rbf gamma must be positive");
  }
  SelfComplementedVoterSet set;
  set.kind_ = VoterKind::kernel;
  set.n_ = anchors.size() + 1;
  set.dimension_ = dim;
  set.anchors_ = std::move(anchors);
  set.kernel_ = kernel;
  return set;
}

SelfComplementedVoterSet SelfComplementedVoterSet::from_explicit(std::size_t n) {
  if (n == 0) throw InputError("explicit voter set needs at least one voter");
  SelfComplementedVoterSet set;
  set.kind_ = VoterKind::explicit_outputs;
  set.n_ = n;
  set.dimension_ = n;
  return set;
}

KernelVoterDescriptor SelfComplementedVoterSet::kernel_descriptor(std::size_t j) const {
  if (kind_ != VoterKind::kernel) throw InputError("not a kernel voter set");
  const std::size_t base_index = j < n_ ? j : complement_index(j, n_);
  return {base_index, j < n_ ? 1 : -1};
}

double SelfComplementedVoterSet::base(std::size_t j, std::span<const double> x) const {
  switch (kind_) {
    case VoterKind::stumps:
      return stumps_[j](x);
    case VoterKind::kernel:
      return j == 0 ? 1.0 : kernel_(anchors_[j - 1], x);
    case VoterKind::explicit_outputs:
      return x[j];
  }
  return 0.0;
}

double SelfComplementedVoterSet::evaluate(std::size_t j, std::span<const double> x) const {
  if (x.size() != dimension_) throw InputError("input dimension does not match voter set");
  if (j < n_) return base(j, x);
  return -base(complement_index(j, n_), x);
}

void SelfComplementedVoterSet::evaluate_half(std::span<const double> x,
                                             std::span<double> out) const {
  if (x.size() != dimension_) {
    throw InputError("input has " + std::to_string(x.size()) + " features, voter set expects " +
                     std::to_string(dimension_));
  }
  for (std::size_t j = 0; j < n_; ++j) out[j] = base(j, x);
}

SelfComplementedVoterSet build_stumps(const Dataset& dataset, std::size_t per_attribute) {
  if (per_attribute == 0) throw InputError("per_attribute must be at least 1");
  if (dataset.empty()) throw InputError("cannot build stumps on an empty dataset");
  const std::size_t dim = dataset.dimension();
  if (dim == 0) throw InputError("dataset has no attributes");

  std::vector<StumpDescriptor> stumps;
  std::vector<std::string> warnings;
  for (std::size_t a = 0; a < dim; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& ex : dataset) {
      lo = std::min(lo, ex.features[a]);
      hi = std::max(hi, ex.features[a]);
    }
    if (!(hi > lo)) {
      stumps.push_back({a, lo, 1});
      warnings.push_back("attribute " + std::to_string(a) +
                         " is constant; using a single stump at its value");
      continue;
    }
    const double step = (hi - lo) / static_cast<double>(per_attribute + 1);
    for (std::size_t k = 1; k <= per_attribute; ++k) {
      stumps.push_back({a, lo + static_cast<double>(k) * step, 1});
    }
  }
  auto set = SelfComplementedVoterSet::from_stumps(std::move(stumps), dim);
  for (auto& w : warnings) set.add_warning(std::move(w));
  return set;
}

SelfComplementedVoterSet build_kernel_voters(const Dataset& train, KernelSpec kernel) {
  if (train.empty()) throw InputError("cannot build kernel voters on an empty dataset");
  std::vector<std::vector<double>> anchors;
  anchors.reserve(train.size());
  for (const auto& ex : train) anchors.push_back(ex.features);

  if (kernel.type == KernelSpec::Type::linear) {
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      for (std::size_t j = i; j < anchors.size(); ++j) {
        const double v = kernel(anchors[i], anchors[j]);
        if (v < -1.0 || v > 1.0) {
          std::ostringstream msg;
          msg << "kernel value " << v << " outside [-1, 1] for pair (" << i << ", " << j
              << "); normalize the features first";
          throw InputError(msg.str());
        }
      }
    }
  }
  return SelfComplementedVoterSet::from_kernel(std::move(anchors), kernel);
}

AttributeStats attribute_stats(const Dataset& train) {
  if (train.empty()) throw InputError("cannot compute attribute statistics on an empty dataset");
  const std::size_t dim = train.dimension();
  AttributeStats stats{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  const double m = static_cast<double>(train.size());
  for (const auto& ex : train) {
    for (std::size_t a = 0; a < dim; ++a) stats.mean[a] += ex.features[a];
  }
  for (double& v : stats.mean) v /= m;
  for (const auto& ex : train) {
    for (std::size_t a = 0; a < dim; ++a) {
      const double diff = ex.features[a] - stats.mean[a];
      stats.stddev[a] += diff * diff;
    }
  }
  for (double& v : stats.stddev) v = std::sqrt(v / m);
  return stats;
}

std::vector<double> tanh_normalize(std::span<const double> x, const AttributeStats& stats) {
  if (x.size() != stats.mean.size()) {
    throw InputError("attribute statistics do not match the input dimension");
  }
  std::vector<double> z(x.size());
  for (std::size_t a = 0; a < z.size(); ++a) {
    z[a] = stats.stddev[a] > 0.0 ? std::tanh((x[a] - stats.mean[a]) / stats.stddev[a]) : 0.0;
  }
  return z;
}

Dataset tanh_normalize(const Dataset& dataset, const AttributeStats& stats) {
  if (!dataset.empty() && stats.mean.size() != dataset.dimension()) {
    throw InputError("attribute statistics do not match the dataset dimension");
  }
  std::vector<Example> out;
  out.reserve(dataset.size());
  for (const auto& ex : dataset) out.push_back({tanh_normalize(ex.features, stats), ex.label});
  return Dataset(std::move(out), dataset.name());
}

VoteMatrix vote_matrix(const SelfComplementedVoterSet& voters, const Dataset& dataset) {
  if (!dataset.empty() && dataset.dimension() != voters.dimension()) {
    throw InputError("dataset has " + std::to_string(dataset.dimension()) +
                     " features, voter set expects " + std::to_string(voters.dimension()));
  }
  const std::size_t n = voters.half_size();
  Eigen::MatrixXd half(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(n));
  std::vector<double> row(n);
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    voters.evaluate_half(dataset[i].features, row);
    for (std::size_t j = 0; j < n; ++j) {
      half(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    labels.push_back(dataset[i].label);
  }
  return VoteMatrix::from_half(half, std::move(labels));
}

}  // namespace pacvote
