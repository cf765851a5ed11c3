#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mbr/error.hpp"

namespace mbr {

/// Absolute tolerance on the unit-mass invariant of every distribution.
inline constexpr double kMassTolerance = 1e-12;

/// Probability vector over the indexed support {0, ..., size-1}.
///
/// Construction validates non-negativity and unit mass; an instance is
/// therefore always a valid distribution and is immutable afterwards.
class FiniteDistribution {
 public:
  FiniteDistribution() = default;
  explicit FiniteDistribution(Eigen::VectorXd weights);

  static FiniteDistribution point_mass(int size, int atom);
  static FiniteDistribution uniform(int size);

  int size() const { return static_cast<int>(weights_.size()); }
  double operator[](int i) const { return weights_(i); }
  const Eigen::VectorXd& weights() const { return weights_; }

  bool operator==(const FiniteDistribution& other) const { return weights_ == other.weights_; }

 private:
  Eigen::VectorXd weights_;
};

/// Returns raw / sum(raw). Throws AllZero or NegativeMass.
FiniteDistribution normalize(const Eigen::Ref<const Eigen::VectorXd>& raw);

/// Joint law over a product of finite variables, stored row-major (the last
/// variable varies fastest).
class JointTable {
 public:
  JointTable() = default;
  JointTable(std::vector<int> dims, Eigen::VectorXd weights);

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }

  int flat_index(const std::vector<int>& index) const;
  std::vector<int> unflatten(int flat) const;
  double at(const std::vector<int>& index) const { return weights_(flat_index(index)); }

  /// Wraps a two-variable table given as a matrix (rows = variable 0).
  static JointTable from_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m);
  /// Converts a rank-1 table to a distribution.
  FiniteDistribution as_distribution() const;

 private:
  std::vector<int> dims_;
  Eigen::VectorXd weights_;
};

/// Law of the variables in `keep`, in the order given.
JointTable marginalize(const JointTable& joint, const std::vector<int>& keep);
JointTable condition(const JointTable& joint, int given, int value);

/// Seeded, splittable source of uniform draws. Identical (seed, stream_id)
/// pairs produce identical draw sequences on every platform.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n).
  int uniform_int(int n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Inverse-CDF draw over the stored weight order.
int sample(const FiniteDistribution& dist, RandomSource& rng);
int sample(const Eigen::Ref<const Eigen::VectorXd>& weights, RandomSource& rng);

}  // namespace mbr
