#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mbr/environment.hpp"
#include "mbr/policy.hpp"
#include "mbr/probability.hpp"

namespace mbr {

struct Posterior {
  FiniteDistribution dist;
};

/// One step of evidence. `next_state` is absent when the transition out of
/// `state` has not been observed yet.
struct Observation {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  std::optional<int> next_state;
};

/// Bayes rule on the initial state draw S_1 ~ P(S | theta).
Posterior initial_state_update(const EnvironmentSpec& spec, const Posterior& current, int state);

/// Bayes rule: weight(theta) ~ current(theta) P(reward | s, a, theta) P(next | s, a, theta).
/// Throws ZeroLikelihood when no theta with positive mass explains the observation.
Posterior posterior_update(const EnvironmentSpec& spec, const Posterior& current, const Observation& obs);

/// Posterior given the records of `history` (initial state, rewards and the
/// transitions between recorded states). The transition into the current,
/// unrecorded state is included only when `current_state` is given.
Posterior posterior_from_history(const EnvironmentSpec& spec, const History& history,
                                 std::optional<int> current_state = std::nullopt);

/// Thompson sampling as a distributional rule: at (t, s) with posterior
/// P(theta | history) the action law is the pushforward of the posterior
/// through theta -> psi*_t(s, theta).
class ThompsonPolicy {
 public:
  explicit ThompsonPolicy(PsiStar psi) : psi_(std::move(psi)) {}

  const PsiStar& psi_star() const { return psi_; }
  Eigen::VectorXd action_weights(int t, int state, const Eigen::Ref<const Eigen::VectorXd>& posterior,
                                 int n_actions) const;
  FiniteDistribution action_distribution(int t, int state, const Posterior& posterior, int n_actions) const;

 private:
  PsiStar psi_;
};

using GeneratingPolicy = std::variant<PolicyTable, ThompsonPolicy>;

inline constexpr int kNoState = -1;
inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

/// Budget from MBR_NODE_BUDGET when set, otherwise the default.
std::size_t node_budget_from_env();

struct HistoryNode {
  History history;                        ///< records of steps before `time`
  int time = 0;                           ///< 0-based step; == horizon on the terminal layer
  int state = kNoState;                   ///< current state; kNoState on the terminal layer
  double probability = 0.0;               ///< sum_theta prior(theta) per_theta_probability(theta)
  Eigen::VectorXd per_theta_probability;  ///< P(history, state | theta) under the generating policy
  Eigen::VectorXd action_distribution;    ///< law of the action taken here (empty for theta rules)
  int group = 0;
  int parent = -1;
};

/// Contiguous run of nodes in a layer that share the same record list.
struct HistoryGroup {
  int begin = 0;
  int end = 0;
};

struct HistoryLayer {
  int time = 0;
  std::vector<HistoryNode> nodes;
  std::vector<HistoryGroup> groups;

  double total_probability() const;
  /// Unnormalized per-theta weight prior(theta) P(history | theta) of a group.
  Eigen::VectorXd group_weight(const Eigen::VectorXd& prior, int g) const;
};

struct HistoryTree {
  int horizon = 0;
  Eigen::VectorXd prior;
  RewardModel model;
  std::vector<HistoryLayer> layers;  ///< layers[t] for t = 0..horizon

  std::size_t node_count() const;
};

/// Exact enumeration of every history reachable under `policy`, with reach
/// probabilities per parameter. Zero-probability branches are dropped.
/// Throws BudgetExceeded when a layer outgrows `budget`.
HistoryTree enumerate_history_tree(const EnvironmentSpec& spec, const GeneratingPolicy& policy,
                                   std::size_t budget = kDefaultNodeBudget);

/// P(theta, history group, Y_t = y, S_t = s) for each group of layer t, as a
/// Theta x (Y*S) matrix with column y*S + s.
std::vector<Eigen::MatrixXd> group_joints(const EnvironmentSpec& spec, const HistoryTree& tree, int t);

/// K(a*, y) = sum_{theta : gamma(theta) = a*} sum_s M(theta, y*S + s) for one
/// group joint M; an A x Y matrix.
Eigen::MatrixXd action_outcome_joint(const EnvironmentSpec& spec, const Eigen::MatrixXd& group_joint,
                                     const std::vector<int>& gamma);

/// Law of (Y*_t, S*_t) given theta along the known-parameter optimal trajectory,
/// over cells y*S + s.
Eigen::VectorXd optimal_trajectory_law(const EnvironmentSpec& spec, const PsiStar& psi, int theta, int t);

enum class LawQuery {
  OutcomeStateGivenHistory,                 ///< (Y_t, S_t) | H^t
  OptimalOutcomeStateGivenTheta,            ///< (Y*_t, S*_t) | Theta
  OutcomeGivenOptimalActionAndHistory,      ///< Y_t | A*, H^t
  OptimalCoordinateGivenActionAndHistory,   ///< Y_{t,A*} | A*, H^t
  OptimalCoordinateGivenHistory,            ///< Y_{t,A*} | H^t
  OptimalActionGivenHistory,                ///< A* | H^t
};

struct LawCell {
  std::vector<int> key;  ///< {group}, {theta} or {group, a*}
  double weight = 0.0;   ///< probability of the conditioning event
  FiniteDistribution law;
};

struct ConditionalLaw {
  LawQuery query;
  int time = 0;
  std::vector<LawCell> cells;
};

/// Exact conditional laws at step t of a tree. A*-queries need a static
/// instance whose psi* ignores step and state; coordinate queries also need
/// the partial-feedback structure. Zero-weight cells are omitted.
ConditionalLaw conditional_law(const EnvironmentSpec& spec, const HistoryTree& tree, int t, LawQuery query,
                               const PsiStar& psi, const PartialFeedbackSpec* feedback = nullptr);

}  // namespace mbr
