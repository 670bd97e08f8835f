#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pacvote/types.hpp"

namespace pacvote {

// Outputs polarity when x[attribute] > threshold, -polarity otherwise
// (ties go to -polarity so a stump never abstains).
struct StumpDescriptor {
  std::size_t attribute = 0;
  double threshold = 0.0;
  int polarity = 1;

  double operator()(std::span<const double> x) const {
    return x[attribute] > threshold ? polarity : -polarity;
  }
};

struct KernelSpec {
  enum class Type { rbf, linear };
  Type type = Type::rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

std::string to_string(KernelSpec::Type type);
KernelSpec::Type parse_kernel_type(const std::string& text);

// Anchor 0 is the bias voter b(.) = 1; anchor i >= 1 is k(x_i, .).
struct KernelVoterDescriptor {
  std::size_t anchor = 0;
  int sign = 1;
};

enum class VoterKind { stumps, kernel, explicit_outputs };

std::string to_string(VoterKind kind);

// 2n voters closed under negation: voter j + n is -voter j. Only the first n
// descriptors are stored.
class SelfComplementedVoterSet {
 public:
  static SelfComplementedVoterSet from_stumps(std::vector<StumpDescriptor> stumps,
                                              std::size_t dimension);
  static SelfComplementedVoterSet from_kernel(std::vector<std::vector<double>> anchors,
                                              KernelSpec kernel);
  // Voter j outputs feature j of the input; used for precomputed voter
  // outputs (e.g. trees trained elsewhere).
  static SelfComplementedVoterSet from_explicit(std::size_t n);

  VoterKind kind() const { return kind_; }
  std::size_t half_size() const { return n_; }
  std::size_t size() const { return 2 * n_; }
  std::size_t dimension() const { return dimension_; }
  // Sample-compression size: 1 for kernel voters, 0 otherwise.
  std::size_t compression_size() const { return kind_ == VoterKind::kernel ? 1 : 0; }

  const std::vector<StumpDescriptor>& stumps() const { return stumps_; }
  const std::vector<std::vector<double>>& anchors() const { return anchors_; }
  const KernelSpec& kernel() const { return kernel_; }
  KernelVoterDescriptor kernel_descriptor(std::size_t j) const;

  // Output of voter j in [0, 2n) on x.
  double evaluate(std::size_t j, std::span<const double> x) const;
  // Outputs of the first n voters on x.
  void evaluate_half(std::span<const double> x, std::span<double> out) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  double base(std::size_t j, std::span<const double> x) const;

  VoterKind kind_ = VoterKind::stumps;
  std::size_t n_ = 0;
  std::size_t dimension_ = 0;
  std::vector<StumpDescriptor> stumps_;
  std::vector<std::vector<double>> anchors_;  // anchors_[i] is x_{i+1}
  KernelSpec kernel_;
  std::vector<std::string> warnings_;
};

// `per_attribute` thresholds per attribute, equally spaced strictly inside
// the attribute's range on `dataset`. A constant attribute gets a single
// stump at its value and a warning.
SelfComplementedVoterSet build_stumps(const Dataset& dataset, std::size_t per_attribute);

// Bias voter plus one voter per training example: 2(m + 1) voters in total.
// Rejects kernels producing values outside [-1, 1] on the training pairs.
SelfComplementedVoterSet build_kernel_voters(const Dataset& train, KernelSpec kernel);

struct AttributeStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

AttributeStats attribute_stats(const Dataset& train);

// x' = tanh((x - mean) / stddev) per attribute; an attribute with zero
// standard deviation maps to 0.
Dataset tanh_normalize(const Dataset& dataset, const AttributeStats& stats);
std::vector<double> tanh_normalize(std::span<const double> x, const AttributeStats& stats);

VoteMatrix vote_matrix(const SelfComplementedVoterSet& voters, const Dataset& dataset);

}  // namespace pacvote
