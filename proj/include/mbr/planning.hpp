#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mbr/environment.hpp"
#include "mbr/inference.hpp"
#include "mbr/policy.hpp"

namespace mbr {

struct ValueReport {
  double value = 0.0;
  std::optional<PolicyTable> policy;    ///< empty for randomized (Thompson) processes
  std::vector<double> per_time_values;  ///< expected reward collected at each step
};

struct KnownThetaSolution {
  PsiStar psi;
  ValueReport report;  ///< value is the fundamental limit R(kappa_Theta)
};

/// Per-theta backward induction. Argmax ties go to the lowest action index;
/// a later action replaces the incumbent only when it is better by more than
/// a relative 1e-12, so scaling all rewards never changes the chosen actions.
KnownThetaSolution optimal_policy_known_theta(const EnvironmentSpec& spec);

/// Bayesian cumulative reward over deterministic history-dependent policies.
/// Throws BudgetExceeded when more than `budget` history nodes are visited.
ValueReport bcr_exact(const EnvironmentSpec& spec, std::size_t budget = kDefaultNodeBudget);

/// Per-step knowledge channel X_t ~ kappa(. | s, a, y, theta), plus the
/// symbol X_0 ~ initial(. | theta) available before the first action.
struct KnowledgeKernelSpec {
  int n_symbols = 1;
  Eigen::MatrixXd initial;  ///< X x Theta
  Eigen::MatrixXd step;     ///< X x (S*A*Y*Theta); column ((s*A + a)*Y + y)*Theta + theta

  int step_column(const EnvironmentSpec& spec, int s, int a, int y, int theta) const {
    return ((s * spec.n_actions + a) * spec.n_outcomes + y) * spec.n_params + theta;
  }
};

/// X_t = (S_t, A_t, R_t) coded as (s*A + a)*|R| + reward index: the agent
/// recalls the full history.
KnowledgeKernelSpec history_knowledge(const EnvironmentSpec& spec);
/// X_t = Theta at every step.
KnowledgeKernelSpec theta_knowledge(const EnvironmentSpec& spec);
/// A single symbol; the agent only sees its current state.
KnowledgeKernelSpec constant_knowledge(const EnvironmentSpec& spec);

std::vector<Violation> validate(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know);

/// Processed information Z_t ~ per_step[t](. | X_0 ... X_t), drawn afresh at
/// every step. Column index of per_step[t] codes the knowledge sequence in
/// mixed radix |X| with X_0 as the most significant digit.
struct ProcessingKernelSpec {
  int n_symbols = 1;
  std::vector<Eigen::MatrixXd> per_step;  ///< per_step[t] is Z x |X|^(t+1)
};

/// Z_t = the whole knowledge sequence.
ProcessingKernelSpec identity_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know);
/// Z_t constant.
ProcessingKernelSpec constant_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know);

std::vector<Violation> validate(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know,
                                const ProcessingKernelSpec& proc);

/// Best value over rules phi_t(S_t, X_0 ... X_t). The rule does not recall
/// past states unless the knowledge carries them, so the search chooses the
/// actions of all states sharing a knowledge prefix jointly.
ValueReport bcr_with_knowledge(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know,
                               std::size_t budget = kDefaultNodeBudget);

/// Best value over rules phi_t(S_t, Z_t). Exhaustive over deterministic rules
/// on the reachable (state, symbol) pairs of each step.
ValueReport bcr_with_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know,
                                const ProcessingKernelSpec& proc, std::size_t budget = kDefaultNodeBudget);

/// Expected per-step rewards of a policy over its enumerated history tree.
ValueReport evaluate_policy(const EnvironmentSpec& spec, const GeneratingPolicy& policy,
                            std::size_t budget = kDefaultNodeBudget);

ThompsonPolicy thompson_policy(const PsiStar& psi);

/// Exact expected cumulative reward of Thompson sampling (posterior
/// pushforward, no sampling).
ValueReport thompson_value(const EnvironmentSpec& spec, std::size_t budget = kDefaultNodeBudget);

/// R(kappa_Theta) - bcr_exact.
double minimum_bayesian_regret(const EnvironmentSpec& spec, std::size_t budget = kDefaultNodeBudget);

struct MonteCarloEstimate {
  std::int64_t episodes = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Simulates Thompson sampling: theta ~ prior, then each step samples a
/// parameter from the posterior given the recorded steps and plays psi*.
MonteCarloEstimate simulate_thompson(const EnvironmentSpec& spec, const PsiStar& psi, std::int64_t episodes,
                                     std::uint64_t seed);

}  // namespace mbr
