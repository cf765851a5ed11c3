#include "mbr/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mbr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::ZeroConditioningMass: return "ZeroConditioningMass";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::MeanOutOfRange: return "MeanOutOfRange";
    case ErrorCode::PolicyUndefined: return "PolicyUndefined";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::NotStatic: return "NotStatic";
    case ErrorCode::NotPartialFeedback: return "NotPartialFeedback";
    case ErrorCode::LipschitzViolated: return "LipschitzViolated";
    case ErrorCode::RewardRangeViolated: return "RewardRangeViolated";
    case ErrorCode::NegativeKL: return "NegativeKL";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

FiniteDistribution::FiniteDistribution(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw Error(ErrorCode::InvalidDistribution, "empty support");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_(i)) || weights_(i) < 0.0) {
      std::ostringstream msg;
      msg << "weight " << i << " = " << weights_(i);
      throw Error(ErrorCode::InvalidDistribution, msg.str());
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total;
    throw Error(ErrorCode::InvalidDistribution, msg.str());
  }
}

FiniteDistribution FiniteDistribution::point_mass(int size, int atom) {
  if (atom < 0 || atom >= size) throw Error(ErrorCode::BadIndex, "point mass atom out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(size);
  w(atom) = 1.0;
  return FiniteDistribution(std::move(w));
}

FiniteDistribution FiniteDistribution::uniform(int size) {
  if (size <= 0) throw Error(ErrorCode::InvalidDistribution, "empty support");
  return FiniteDistribution(Eigen::VectorXd::Constant(size, 1.0 / size));
}

FiniteDistribution normalize(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  if (raw.size() == 0) throw Error(ErrorCode::AllZero, "empty vector");
  if ((raw.array() < 0.0).any()) throw Error(ErrorCode::NegativeMass, "negative entry");
  const double total = raw.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllZero, "every entry is zero");
  return FiniteDistribution(raw / total);
}

// ---------------------------------------------------------------------------

JointTable::JointTable(std::vector<int> dims, Eigen::VectorXd weights)
    : dims_(std::move(dims)), weights_(std::move(weights)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidArgument, "joint table needs at least one variable");
  long long product = 1;
  for (int d : dims_) {
    if (d <= 0) throw Error(ErrorCode::InvalidArgument, "non-positive dimension");
    product *= d;
  }
  if (product != weights_.size()) throw Error(ErrorCode::InvalidArgument, "weights length != product of dims");
  if ((weights_.array() < 0.0).any()) throw Error(ErrorCode::NegativeMass, "negative joint weight");
  if (std::abs(weights_.sum() - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::InvalidDistribution, "joint weights do not sum to 1");
  }
}

int JointTable::flat_index(const std::vector<int>& index) const {
  if (index.size() != dims_.size()) throw Error(ErrorCode::BadIndex, "index rank mismatch");
  int flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] < 0 || index[k] >= dims_[k]) throw Error(ErrorCode::BadIndex, "index out of range");
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

std::vector<int> JointTable::unflatten(int flat) const {
  std::vector<int> index(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    index[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return index;
}

JointTable JointTable::from_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Eigen::VectorXd flat(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat(i * m.cols() + j) = m(i, j);
  return JointTable({static_cast<int>(m.rows()), static_cast<int>(m.cols())}, std::move(flat));
}

FiniteDistribution JointTable::as_distribution() const {
  if (dims_.size() != 1) throw Error(ErrorCode::InvalidArgument, "table has more than one variable");
  return FiniteDistribution(weights_);
}

JointTable marginalize(const JointTable& joint, const std::vector<int>& keep) {
  if (keep.empty()) throw Error(ErrorCode::BadIndex, "keep set is empty");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::BadIndex, "duplicate variable in keep set");
  }
  for (int k : sorted) {
    if (k < 0 || k >= joint.rank()) throw Error(ErrorCode::BadIndex, "keep references a missing variable");
  }
  std::vector<int> out_dims;
  for (int k : keep) out_dims.push_back(joint.dims()[k]);
  const int out_size = std::accumulate(out_dims.begin(), out_dims.end(), 1, std::multiplies<>());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_size);
  for (int flat = 0; flat < joint.weights().size(); ++flat) {
    const auto idx = joint.unflatten(flat);
    int o = 0;
    for (std::size_t j = 0; j < keep.size(); ++j) o = o * out_dims[j] + idx[keep[j]];
    out(o) += joint.weights()(flat);
  }
  // Summation reorders terms; renormalize to keep the unit-mass contract exact.
  out /= out.sum();
  return JointTable(std::move(out_dims), std::move(out));
}

JointTable condition(const JointTable& joint, int given, int value) {
  if (given < 0 || given >= joint.rank()) throw Error(ErrorCode::BadIndex, "conditioning variable missing");
  if (value < 0 || value >= joint.dims()[given]) throw Error(ErrorCode::BadIndex, "conditioning value out of range");
  if (joint.rank() == 1) throw Error(ErrorCode::BadIndex, "cannot condition a single-variable table on itself");
  std::vector<int> out_dims;
  for (int k = 0; k < joint.rank(); ++k)
    if (k != given) out_dims.push_back(joint.dims()[k]);
  const int out_size = std::accumulate(out_dims.begin(), out_dims.end(), 1, std::multiplies<>());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_size);
  for (int flat = 0; flat < joint.weights().size(); ++flat) {
    const auto idx = joint.unflatten(flat);
    if (idx[given] != value) continue;
    int o = 0, j = 0;
    for (int k = 0; k < joint.rank(); ++k) {
      if (k == given) continue;
      o = o * out_dims[j++] + idx[k];
    }
    out(o) += joint.weights()(flat);
  }
  const double mass = out.sum();
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroConditioningMass, "conditioning slice has zero mass");
  out /= mass;
  return JointTable(std::move(out_dims), std::move(out));
}

// ---------------------------------------------------------------------------

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

int RandomSource::uniform_int(int n) {
  if (n <= 0) throw Error(ErrorCode::InvalidArgument, "uniform_int needs n > 0");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int>(x % bound);
}

int sample(const Eigen::Ref<const Eigen::VectorXd>& weights, RandomSource& rng) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    cumulative += weights(i);
    last_positive = static_cast<int>(i);
    if (u < cumulative) return last_positive;
  }
  // Rounding can leave the cumulative sum a hair below 1.
  if (last_positive < 0) throw Error(ErrorCode::AllZero, "cannot sample from zero weights");
  return last_positive;
}

int sample(const FiniteDistribution& dist, RandomSource& rng) { return sample(dist.weights(), rng); }

}  // namespace mbr
