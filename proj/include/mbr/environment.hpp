#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mbr/policy.hpp"
#include "mbr/probability.hpp"

namespace mbr {

/// Finite Bayesian MDP.
///
/// Kernels are stored column-wise: every column of `trans`, `outcome` and
/// `initial_state` is one conditional distribution. Rows are left unchecked
/// until validate() so that defective instances can be diagnosed.
struct EnvironmentSpec {
  int n_states = 1;
  int n_actions = 1;
  int n_outcomes = 1;
  int n_params = 1;
  int horizon = 1;

  Eigen::VectorXd prior;          ///< over theta
  Eigen::MatrixXd initial_state;  ///< S x Theta; column theta = P(S_1 | theta)
  Eigen::MatrixXd trans;          ///< S x (S*A*Theta); column (s*A + a)*Theta + theta
  Eigen::MatrixXd outcome;        ///< Y x (S*Theta); column s*Theta + theta
  Eigen::MatrixXd reward;         ///< Y x A

  /// Allocates zero kernels with the given shape.
  static EnvironmentSpec zeros(int n_states, int n_actions, int n_outcomes, int n_params, int horizon);

  int trans_column(int s, int a, int theta) const { return (s * n_actions + a) * n_params + theta; }
  int outcome_column(int s, int theta) const { return s * n_params + theta; }

  auto trans_row(int s, int a, int theta) const { return trans.col(trans_column(s, a, theta)); }
  auto trans_row(int s, int a, int theta) { return trans.col(trans_column(s, a, theta)); }
  auto outcome_row(int s, int theta) const { return outcome.col(outcome_column(s, theta)); }
  auto outcome_row(int s, int theta) { return outcome.col(outcome_column(s, theta)); }

  /// True when every transition row is a point mass on the current state.
  bool is_static() const;
};

struct Violation {
  std::string location;  ///< e.g. "trans[s=0][a=1][theta=0]"
  std::string message;
};

/// Empty iff every kernel row is a valid distribution and rewards are finite.
std::vector<Violation> validate(const EnvironmentSpec& spec);
/// Throws ValidationError listing every violation.
void require_valid(const EnvironmentSpec& spec);

/// Sorted distinct reward values {reward(y, a)} merged with exact equality.
std::vector<double> reachable_reward_set(const EnvironmentSpec& spec);

/// Precomputed per-(s, a, theta) quantities used by every exact engine.
struct RewardModel {
  std::vector<double> rewards;     ///< reachable reward set
  Eigen::MatrixXd likelihood;      ///< R x (S*A*Theta): P(reward index | s, a, theta)
  Eigen::MatrixXd stage;           ///< A x (S*Theta): E[r(Y, a) | s, theta]
  Eigen::MatrixXi reward_index;    ///< Y x A: index of reward(y, a) in `rewards`

  double expected_reward(int s, int a, int theta, int n_params) const { return stage(a, s * n_params + theta); }
};

RewardModel tabulate_rewards(const EnvironmentSpec& spec);

/// Reward range certificate; the sub-Gaussian proxy follows from Hoeffding.
struct BoundedRewardCertificate {
  double lo = 0.0;
  double hi = 0.0;
  double sub_gaussian_sigma2 = 0.0;
};

BoundedRewardCertificate reward_certificate(const EnvironmentSpec& spec);

/// Online optimization with partial feedback: outcomes are vectors in
/// (Y')^|A| encoded in mixed radix (coordinate a has weight |Y'|^a) and the
/// reward of action a is the preference of coordinate a.
struct PartialFeedbackSpec {
  EnvironmentSpec base;
  int n_values = 1;              ///< |Y'|
  Eigen::VectorXd preference;    ///< r' over Y'
  bool full_reveal = false;

  int coordinate(int y, int a) const;
  /// Law of coordinate a under an outcome law over Y.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& outcome_law, int a) const;
  bool preference_injective() const;
};

/// Builds the base spec's reward table from the preference and validates.
/// `outcome_by_theta` is Y x Theta (state independent).
PartialFeedbackSpec make_partial_feedback(int n_states, int n_actions, int n_values, const Eigen::VectorXd& prior,
                                          const Eigen::MatrixXd& initial_state,
                                          const Eigen::MatrixXd& outcome_by_theta,
                                          const Eigen::VectorXd& preference, bool full_reveal, int horizon);

std::vector<Violation> validate(const PartialFeedbackSpec& spec);
void require_valid(const PartialFeedbackSpec& spec);

/// True when, on the support of the outcome laws with positive prior mass,
/// every single coordinate determines the whole outcome vector.
bool reveals_fully(const PartialFeedbackSpec& spec);

/// Bernoulli bandit with means(arm, theta); outcomes are the vector of all arm
/// draws (independent across arms given theta).
PartialFeedbackSpec bernoulli_bandit(const Eigen::MatrixXd& means, const FiniteDistribution& prior, int horizon);

struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int reward_index = 0;
};

struct History {
  std::vector<Step> records;
  std::size_t length() const { return records.size(); }
};

/// Integer encoding (state, action, reward index) per record.
PolicyTable::Key history_key(const History& history);

/// Decision callback: (step, current state, history so far, rng) -> action.
using DecisionRule = std::function<int(int, int, const History&, RandomSource&)>;

struct Episode {
  History history;
  double cumulative_reward = 0.0;
};

/// Draws one trajectory under the fixed parameter theta.
Episode simulate_episode(const EnvironmentSpec& spec, const RewardModel& model, const DecisionRule& decide, int theta,
                         RandomSource& rng);
/// History rules look up history_key(); theta rules look up {theta}.
Episode simulate_episode(const EnvironmentSpec& spec, const PolicyTable& policy, int theta, RandomSource& rng);

}  // namespace mbr
