#pragma once

#include <compare>
#include <vector>

#include <Eigen/Dense>

#include "mbr/probability.hpp"

namespace mbr {

/// Non-negative quantity that may be +infinity (KL without absolute
/// continuity). Infinity is an explicit state, so arithmetic on a finite
/// value never meets an IEEE inf by accident.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  explicit ExtendedReal(double v);
  static ExtendedReal infinity();

  bool is_finite() const { return finite_; }
  /// Throws std::logic_error on infinity.
  double value() const;
  /// IEEE rendering for reports: +inf when infinite.
  double to_double() const;

  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b);
  friend ExtendedReal operator*(double k, const ExtendedReal& a);
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) = default;
  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b);

 private:
  double v_ = 0.0;
  bool finite_ = true;
};

ExtendedReal sqrt(const ExtendedReal& x);

/// Metric on {0, ..., n-1}; validated (symmetry, zero diagonal, triangle
/// inequality within 1e-12) at construction.
class FiniteMetric {
 public:
  FiniteMetric() = default;
  explicit FiniteMetric(Eigen::MatrixXd dist);

  /// rho(i, j) = 1[i != j]
  static FiniteMetric discrete(int n);
  /// rho(i, j) = |x_i - x_j|
  static FiniteMetric line(const std::vector<double>& points);

  int n_points() const { return static_cast<int>(dist_.rows()); }
  double operator()(int i, int j) const { return dist_(i, j); }
  const Eigen::MatrixXd& matrix() const { return dist_; }

 private:
  Eigen::MatrixXd dist_;
};

struct Coupling {
  Eigen::MatrixXd matrix;  ///< rows follow the first marginal
};

struct TransportResult {
  double value = 0.0;
  Coupling coupling;
};

/// Nats; 0 log 0 = 0.
double entropy(const FiniteDistribution& p);

/// KL(p || q) in nats; infinite when p puts mass where q does not.
ExtendedReal kl(const FiniteDistribution& p, const FiniteDistribution& q);

double tv(const FiniteDistribution& p, const FiniteDistribution& q);

/// Exact optimal transport cost (order 1) with an optimal coupling.
TransportResult wasserstein1(const FiniteDistribution& p, const FiniteDistribution& q, const FiniteMetric& metric);

/// I(X; Y) for a rank-2 joint.
double mutual_information(const JointTable& joint);
/// I(X; Y | Z) for a rank-3 joint over (X, Y, Z); zero-mass slices of Z add nothing.
double conditional_mutual_information(const JointTable& joint);

/// min(sqrt(kl / 2), sqrt(1 - exp(-kl))); 1 for infinite kl. Throws NegativeKL.
double pinsker_bh_bound(const ExtendedReal& kl_value);
double pinsker_bh_bound(double kl_value);

}  // namespace mbr
