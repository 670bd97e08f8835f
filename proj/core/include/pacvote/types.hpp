#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pacvote {

// Errors are split by how the CLI reports them: bad input (exit 1) versus a
// numerical procedure that could not deliver its guarantee (exit 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested margin is outside what quasi-uniform posteriors can reach.
class InfeasibleError : public InputError {
 public:
  InfeasibleError(const std::string& what, double lo, double hi)
      : InputError(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

struct Example {
  std::vector<double> features;
  int label = 1;  // -1 or +1
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Example> examples, std::string name = {});

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t dimension() const;
  const std::string& name() const { return name_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }
  const std::vector<Example>& examples() const { return examples_; }

  auto begin() const { return examples_.begin(); }
  auto end() const { return examples_.end(); }

  // Subset in the given index order; the name is kept.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Example> examples_;
  std::string name_;
};

// Index of the complement voter in a self-complemented set of 2n voters.
// Indices are 0-based: voter j < n is paired with j + n.
std::size_t complement_index(std::size_t j, std::size_t n);

// Per-example, per-voter outputs. Column j + n is the exact negation of
// column j, so only the first n columns carry information.
class VoteMatrix {
 public:
  VoteMatrix() = default;

  // `half` is m x n (outputs of the first n voters); complements are
  // appended by negation.
  static VoteMatrix from_half(const Eigen::MatrixXd& half, std::vector<int> labels);

  std::size_t examples() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t voters() const { return static_cast<std::size_t>(values_.cols()); }
  std::size_t half_size() const { return voters() / 2; }

  const Eigen::MatrixXd& values() const { return values_; }
  auto half() const { return values_.leftCols(static_cast<Eigen::Index>(half_size())); }
  const std::vector<int>& labels() const { return labels_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Eigen::MatrixXd values_;
  std::vector<int> labels_;
};

// Distribution over the 2n voters of a self-complemented set. The prior is
// the uniform distribution unless a caller says otherwise.
class Posterior {
 public:
  Posterior() = default;

  // Requires non-negative weights summing to one (within 1e-9). Weights
  // below 1e-15 are zeroed and the result renormalized.
  explicit Posterior(std::vector<double> weights);

  // Normalizes any non-negative, non-zero weight vector.
  static Posterior normalized(std::vector<double> weights);
  static Posterior uniform(std::size_t voters);

  std::size_t size() const { return weights_.size(); }
  std::size_t half_size() const { return weights_.size() / 2; }
  double operator[](std::size_t j) const { return weights_[j]; }
  const std::vector<double>& weights() const { return weights_; }

  // q_j + q_{j+n} = 1/n for every pair.
  bool is_quasi_uniform(double tol = 1e-12) const;

 private:
  std::vector<double> weights_;
};

struct MarginSummary {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double variance = 0.0;
  double gibbs_risk = 0.0;
  double disagreement = 0.0;
  double joint_error = 0.0;
  double joint_success = 0.0;
  double bayes_risk = 0.0;
  std::optional<double> c_bound;  // only when mu1 > 0
  std::size_t examples = 0;
};

enum class BoundId { B0, B1, B1s, B2, B2p, B3, B3p };

std::string to_string(BoundId id);
BoundId parse_bound_id(const std::string& text);

struct BoundDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> argmax;  // (d, e) for the region maximizations
  std::vector<std::pair<std::string, double>> values;  // intermediate quantities
};

struct BoundReport {
  BoundId id = BoundId::B0;
  std::vector<std::pair<std::string, double>> inputs;
  double value = 1.0;
  BoundDiagnostics diagnostics;
};

}  // namespace pacvote
