#include "mbr/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mbr {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void check_row(const Eigen::Ref<const Eigen::VectorXd>& row, const std::string& location,
               std::vector<Violation>& out) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row(i))) {
      out.push_back({location, "non-finite entry at index " + std::to_string(i)});
      return;
    }
    if (row(i) < 0.0) {
      out.push_back({location, "negative entry " + fmt(row(i)) + " at index " + std::to_string(i)});
      return;
    }
  }
  const double total = row.sum();
  if (std::abs(total - 1.0) > kMassTolerance) out.push_back({location, "row sums to " + fmt(total)});
}

bool shape_ok(const EnvironmentSpec& spec, std::vector<Violation>& out) {
  bool ok = true;
  auto expect = [&](bool cond, const std::string& where, const std::string& what) {
    if (!cond) {
      out.push_back({where, what});
      ok = false;
    }
  };
  expect(spec.n_states > 0 && spec.n_actions > 0 && spec.n_outcomes > 0 && spec.n_params > 0, "dims",
         "all space sizes must be positive");
  expect(spec.horizon > 0, "horizon", "horizon must be positive");
  if (!ok) return false;
  const int S = spec.n_states, A = spec.n_actions, Y = spec.n_outcomes, P = spec.n_params;
  expect(spec.prior.size() == P, "prior", "expected length " + std::to_string(P));
  expect(spec.initial_state.rows() == S && spec.initial_state.cols() == P, "initial_state", "expected S x Theta");
  expect(spec.trans.rows() == S && spec.trans.cols() == S * A * P, "trans", "expected S x (S*A*Theta)");
  expect(spec.outcome.rows() == Y && spec.outcome.cols() == S * P, "outcome", "expected Y x (S*Theta)");
  expect(spec.reward.rows() == Y && spec.reward.cols() == A, "reward", "expected Y x A");
  return ok;
}

}  // namespace

EnvironmentSpec EnvironmentSpec::zeros(int n_states, int n_actions, int n_outcomes, int n_params, int horizon) {
  EnvironmentSpec spec;
  spec.n_states = n_states;
  spec.n_actions = n_actions;
  spec.n_outcomes = n_outcomes;
  spec.n_params = n_params;
  spec.horizon = horizon;
  spec.prior = Eigen::VectorXd::Zero(n_params);
  spec.initial_state = Eigen::MatrixXd::Zero(n_states, n_params);
  spec.trans = Eigen::MatrixXd::Zero(n_states, n_states * n_actions * n_params);
  spec.outcome = Eigen::MatrixXd::Zero(n_outcomes, n_states * n_params);
  spec.reward = Eigen::MatrixXd::Zero(n_outcomes, n_actions);
  return spec;
}

bool EnvironmentSpec::is_static() const {
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a)
      for (int th = 0; th < n_params; ++th) {
        const auto row = trans_row(s, a, th);
        for (int s2 = 0; s2 < n_states; ++s2) {
          const double expected = s2 == s ? 1.0 : 0.0;
          if (std::abs(row(s2) - expected) > kMassTolerance) return false;
        }
      }
  return true;
}

std::vector<Violation> validate(const EnvironmentSpec& spec) {
  std::vector<Violation> out;
  if (!shape_ok(spec, out)) return out;
  check_row(spec.prior, "prior", out);
  for (int th = 0; th < spec.n_params; ++th)
    check_row(spec.initial_state.col(th), "initial_state[theta=" + std::to_string(th) + "]", out);
  for (int s = 0; s < spec.n_states; ++s)
    for (int a = 0; a < spec.n_actions; ++a)
      for (int th = 0; th < spec.n_params; ++th)
        check_row(spec.trans_row(s, a, th),
                  "trans[s=" + std::to_string(s) + "][a=" + std::to_string(a) + "][theta=" + std::to_string(th) + "]",
                  out);
  for (int s = 0; s < spec.n_states; ++s)
    for (int th = 0; th < spec.n_params; ++th)
      check_row(spec.outcome_row(s, th), "outcome[s=" + std::to_string(s) + "][theta=" + std::to_string(th) + "]",
                out);
  for (int y = 0; y < spec.n_outcomes; ++y)
    for (int a = 0; a < spec.n_actions; ++a)
      if (!std::isfinite(spec.reward(y, a)))
        out.push_back({"reward[y=" + std::to_string(y) + "][a=" + std::to_string(a) + "]", "non-finite reward"});
  return out;
}

namespace {
[[noreturn]] void throw_violations(const std::vector<Violation>& violations) {
  std::string msg;
  for (const auto& v : violations) msg += "\n  " + v.location + ": " + v.message;
  throw Error(ErrorCode::ValidationError, std::to_string(violations.size()) + " violation(s)" + msg);
}
}  // namespace

void require_valid(const EnvironmentSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) throw_violations(violations);
}

std::vector<double> reachable_reward_set(const EnvironmentSpec& spec) {
  std::vector<double> values(spec.reward.data(), spec.reward.data() + spec.reward.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

RewardModel tabulate_rewards(const EnvironmentSpec& spec) {
  RewardModel m;
  m.rewards = reachable_reward_set(spec);
  const int S = spec.n_states, A = spec.n_actions, Y = spec.n_outcomes, P = spec.n_params;
  const int R = static_cast<int>(m.rewards.size());
  m.reward_index.resize(Y, A);
  for (int y = 0; y < Y; ++y)
    for (int a = 0; a < A; ++a) {
      auto it = std::lower_bound(m.rewards.begin(), m.rewards.end(), spec.reward(y, a));
      m.reward_index(y, a) = static_cast<int>(it - m.rewards.begin());
    }
  m.likelihood = Eigen::MatrixXd::Zero(R, S * A * P);
  m.stage = Eigen::MatrixXd::Zero(A, S * P);
  for (int s = 0; s < S; ++s)
    for (int th = 0; th < P; ++th) {
      const auto out = spec.outcome_row(s, th);
      for (int a = 0; a < A; ++a) {
        const int col = spec.trans_column(s, a, th);
        for (int y = 0; y < Y; ++y) m.likelihood(m.reward_index(y, a), col) += out(y);
        m.stage(a, s * P + th) = out.dot(spec.reward.col(a));
      }
    }
  return m;
}

BoundedRewardCertificate reward_certificate(const EnvironmentSpec& spec) {
  BoundedRewardCertificate c;
  c.lo = spec.reward.minCoeff();
  c.hi = spec.reward.maxCoeff();
  c.sub_gaussian_sigma2 = (c.hi - c.lo) * (c.hi - c.lo) / 4.0;
  return c;
}

// ---------------------------------------------------------------------------

int PartialFeedbackSpec::coordinate(int y, int a) const {
  for (int k = 0; k < a; ++k) y /= n_values;
  return y % n_values;
}

Eigen::VectorXd PartialFeedbackSpec::project(const Eigen::Ref<const Eigen::VectorXd>& outcome_law, int a) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_values);
  for (Eigen::Index y = 0; y < outcome_law.size(); ++y) out(coordinate(static_cast<int>(y), a)) += outcome_law(y);
  return out;
}

bool PartialFeedbackSpec::preference_injective() const {
  std::vector<double> v(preference.data(), preference.data() + preference.size());
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

namespace {
int int_pow(int base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > 1'000'000) throw Error(ErrorCode::InvalidArgument, "outcome space too large");
  }
  return static_cast<int>(r);
}
}  // namespace

PartialFeedbackSpec make_partial_feedback(int n_states, int n_actions, int n_values, const Eigen::VectorXd& prior,
                                          const Eigen::MatrixXd& initial_state,
                                          const Eigen::MatrixXd& outcome_by_theta,
                                          const Eigen::VectorXd& preference, bool full_reveal, int horizon) {
  const int Y = int_pow(n_values, n_actions);
  const int P = static_cast<int>(prior.size());
  if (outcome_by_theta.rows() != Y || outcome_by_theta.cols() != P)
    throw Error(ErrorCode::InvalidArgument, "outcome table must be |Y'|^|A| x Theta");
  if (preference.size() != n_values) throw Error(ErrorCode::InvalidArgument, "preference must have |Y'| entries");
  PartialFeedbackSpec pf;
  pf.n_values = n_values;
  pf.preference = preference;
  pf.full_reveal = full_reveal;
  pf.base = EnvironmentSpec::zeros(n_states, n_actions, Y, P, horizon);
  pf.base.prior = prior;
  pf.base.initial_state = initial_state;
  for (int s = 0; s < n_states; ++s)
    for (int th = 0; th < P; ++th) {
      pf.base.outcome_row(s, th) = outcome_by_theta.col(th);
      for (int a = 0; a < n_actions; ++a) pf.base.trans_row(s, a, th)(s) = 1.0;
    }
  for (int y = 0; y < Y; ++y)
    for (int a = 0; a < n_actions; ++a) pf.base.reward(y, a) = preference(pf.coordinate(y, a));
  require_valid(pf);
  return pf;
}

bool reveals_fully(const PartialFeedbackSpec& spec) {
  const auto& b = spec.base;
  std::vector<int> support;
  for (int y = 0; y < b.n_outcomes; ++y) {
    double mass = 0.0;
    for (int s = 0; s < b.n_states; ++s)
      for (int th = 0; th < b.n_params; ++th)
        if (b.prior(th) > 0.0) mass += b.outcome_row(s, th)(y);
    if (mass > 0.0) support.push_back(y);
  }
  for (int a = 0; a < b.n_actions; ++a) {
    std::vector<int> seen(spec.n_values, -1);
    for (int y : support) {
      const int c = spec.coordinate(y, a);
      if (seen[c] >= 0 && seen[c] != y) return false;
      seen[c] = y;
    }
  }
  return true;
}

std::vector<Violation> validate(const PartialFeedbackSpec& spec) {
  auto out = validate(spec.base);
  if (!out.empty()) return out;
  const auto& b = spec.base;
  if (spec.n_values <= 0 || spec.preference.size() != spec.n_values) {
    out.push_back({"preference", "expected |Y'| entries"});
    return out;
  }
  long long expected = 1;
  for (int a = 0; a < b.n_actions; ++a) expected *= spec.n_values;
  if (expected != b.n_outcomes) {
    out.push_back({"outcome", "|Y| must equal |Y'|^|A|"});
    return out;
  }
  if (!b.is_static()) out.push_back({"trans", "partial-feedback instances must be static"});
  for (int s = 1; s < b.n_states; ++s)
    for (int th = 0; th < b.n_params; ++th)
      if (b.outcome_row(s, th) != b.outcome_row(0, th))
        out.push_back({"outcome[s=" + std::to_string(s) + "][theta=" + std::to_string(th) + "]",
                       "outcome kernel must not depend on the state"});
  for (int y = 0; y < b.n_outcomes; ++y)
    for (int a = 0; a < b.n_actions; ++a)
      if (b.reward(y, a) != spec.preference(spec.coordinate(y, a)))
        out.push_back({"reward[y=" + std::to_string(y) + "][a=" + std::to_string(a) + "]",
                       "reward differs from preference of coordinate a"});
  if (spec.full_reveal && !reveals_fully(spec))
    out.push_back({"full_reveal", "a single coordinate does not determine the outcome vector"});
  return out;
}

void require_valid(const PartialFeedbackSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) throw_violations(violations);
}

PartialFeedbackSpec bernoulli_bandit(const Eigen::MatrixXd& means, const FiniteDistribution& prior, int horizon) {
  const int A = static_cast<int>(means.rows());
  const int P = static_cast<int>(means.cols());
  if (prior.size() != P) throw Error(ErrorCode::SupportMismatch, "prior size must equal number of theta columns");
  if ((means.array() < 0.0).any() || (means.array() > 1.0).any() || !means.allFinite())
    throw Error(ErrorCode::MeanOutOfRange, "Bernoulli means must lie in [0, 1]");
  const int Y = int_pow(2, A);
  Eigen::MatrixXd outcome(Y, P);
  for (int th = 0; th < P; ++th)
    for (int y = 0; y < Y; ++y) {
      double p = 1.0;
      for (int a = 0; a < A; ++a) p *= ((y >> a) & 1) ? means(a, th) : 1.0 - means(a, th);
      outcome(y, th) = p;
    }
  Eigen::VectorXd preference(2);
  preference << 0.0, 1.0;
  return make_partial_feedback(1, A, 2, prior.weights(), Eigen::MatrixXd::Ones(1, P), outcome, preference, false,
                               horizon);
}

// ---------------------------------------------------------------------------

PolicyTable::Key history_key(const History& history) {
  PolicyTable::Key key;
  key.reserve(history.records.size() * 3);
  for (const auto& r : history.records) {
    key.push_back(r.state);
    key.push_back(r.action);
    key.push_back(r.reward_index);
  }
  return key;
}

Episode simulate_episode(const EnvironmentSpec& spec, const RewardModel& model, const DecisionRule& decide, int theta,
                         RandomSource& rng) {
  if (theta < 0 || theta >= spec.n_params) throw Error(ErrorCode::BadIndex, "theta out of range");
  const bool fixed_state = spec.is_static();
  Episode ep;
  int s = sample(spec.initial_state.col(theta), rng);
  for (int t = 0; t < spec.horizon; ++t) {
    const int a = decide(t, s, ep.history, rng);
    if (a < 0 || a >= spec.n_actions) throw Error(ErrorCode::BadIndex, "decision rule returned an invalid action");
    const int y = sample(spec.outcome_row(s, theta), rng);
    const double r = spec.reward(y, a);
    ep.history.records.push_back({s, a, r, model.reward_index(y, a)});
    ep.cumulative_reward += r;
    if (t + 1 < spec.horizon) {
      const int next = sample(spec.trans_row(s, a, theta), rng);
      if (fixed_state && next != s) throw std::logic_error("static environment changed state");
      s = next;
    }
  }
  return ep;
}

Episode simulate_episode(const EnvironmentSpec& spec, const PolicyTable& policy, int theta, RandomSource& rng) {
  const auto model = tabulate_rewards(spec);
  DecisionRule rule;
  switch (policy.information_kind()) {
    case InformationKind::History:
      rule = [&](int t, int s, const History& h, RandomSource&) { return policy.action(t, s, history_key(h)); };
      break;
    case InformationKind::Theta:
      rule = [&](int t, int s, const History&, RandomSource&) { return policy.action(t, s, {theta}); };
      break;
    default:
      throw Error(ErrorCode::NotApplicable, "knowledge and processed rules need their kernels to be simulated");
  }
  return simulate_episode(spec, model, rule, theta, rng);
}

}  // namespace mbr
