#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbr/environment.hpp"
#include "mbr/inference.hpp"
#include "mbr/info_measures.hpp"
#include "mbr/planning.hpp"

namespace mbr {

/// Tolerance of every asserted inequality.
inline constexpr double kBoundTolerance = 1e-9;

struct BoundConfig {
  std::optional<FiniteMetric> outcome_state_metric;  ///< over cells y*S + s; discrete when absent
  std::optional<FiniteMetric> outcome_metric;        ///< over Y; discrete when absent
  std::optional<FiniteMetric> value_metric;          ///< over Y' (partial feedback); discrete when absent
  std::optional<double> lipschitz;                   ///< checked when given, tightest valid constant otherwise
  std::vector<double> sigma2;                        ///< per step; reward-range certificate when empty
  std::size_t budget = kDefaultNodeBudget;
};

struct OptimalActionLaw {
  std::vector<int> gamma_star;  ///< theta -> optimal action
  FiniteDistribution a_star_marginal;
  double a_star_entropy = 0.0;
};

/// Everything the bounds share: the known-parameter solution, exact values
/// and the Thompson-generated history tree.
struct InstanceAnalysis {
  EnvironmentSpec spec;
  std::optional<PartialFeedbackSpec> feedback;
  KnownThetaSolution known;
  ValueReport bcr;
  ValueReport thompson;
  HistoryTree tree;                                    ///< generated by Thompson sampling
  std::vector<std::vector<Eigen::MatrixXd>> joints;    ///< group_joints per step
  std::optional<OptimalActionLaw> optimal_action;      ///< static instances with state-free psi*

  double mbr() const { return known.report.value - bcr.value; }
  double thompson_regret() const { return known.report.value - thompson.value; }
};

InstanceAnalysis analyze(const EnvironmentSpec& spec, const PartialFeedbackSpec* feedback = nullptr,
                         std::size_t budget = kDefaultNodeBudget);

/// Throws NotStatic or NotApplicable when A* is not a function of theta.
OptimalActionLaw optimal_action_law(const EnvironmentSpec& spec, const PsiStar& psi);

/// Per-step sigma^2 from the config, defaulting to (hi - lo)^2 / 4.
std::vector<double> sigma2_schedule(const EnvironmentSpec& spec, const BoundConfig& config);

/// Tightest L with |r(y, psi*_t(s, theta)) - r(y', psi*_t(s', theta))| <= L rho over all
/// cell pairs, steps and parameters. Infinite when some pair at distance zero differs.
ExtendedReal outcome_state_lipschitz(const EnvironmentSpec& spec, const PsiStar& psi, const FiniteMetric& metric);
/// Tightest L with |r(y, a) - r(y', a)| <= L rho(y, y') for every action.
ExtendedReal outcome_lipschitz(const EnvironmentSpec& spec, const FiniteMetric& metric);
/// Tightest L for the preference over Y'.
ExtendedReal value_lipschitz(const PartialFeedbackSpec& feedback, const FiniteMetric& metric);

// General MDPs. Expectations run over (theta, recorded history) cells of the
// Thompson tree; laws compare the optimal trajectory at theta with the
// outcome-state law given the history.

/// sum_t E[sqrt(2 sigma_t^2 KL(P*_{theta,t} || P_{Y_t,S_t | H^t}))]
ExtendedReal kl_subgaussian_bound(const InstanceAnalysis& an, const std::vector<double>& sigma2);
/// L sum_t E[W(P*_{theta,t}, P_{Y_t,S_t | H^t})]; throws LipschitzViolated.
double wasserstein_lipschitz_bound(const InstanceAnalysis& an, const FiniteMetric& metric,
                                   std::optional<double> lipschitz);
/// sigma^2 = 1/4 version; rewards must lie in [0, 1].
ExtendedReal kl_bounded_bound(const InstanceAnalysis& an);
/// Discrete metric, L = 1; rewards in [0, 1]. Cross-checked against the TV sum.
double wasserstein_bounded_bound(const InstanceAnalysis& an);

// Static instances.

/// sum_t E[W(P_{Y_t | A*, H^t}, P_{Y_t | H^t})] under the discrete metric.
double static_wasserstein_bound(const InstanceAnalysis& an);
/// sum_t sqrt(I(Y_t; A* | H^t) / 2)
double static_mutual_information_bound(const InstanceAnalysis& an);
/// sum_t sqrt(2 sigma_t^2 I(Y_t; A* | H^t))
double static_mi_subgaussian_bound(const InstanceAnalysis& an, const std::vector<double>& sigma2);
/// L sum_t E[W(P_{Y_t | A*}, P_{Y_t | H^t})], first law not conditioned on the history.
double static_marginal_wasserstein_bound(const InstanceAnalysis& an, const FiniteMetric& metric,
                                         std::optional<double> lipschitz);

// Partial-feedback instances. Laws are of the coordinate Y_{t,a} at a = A*.

/// sum_t E[W(P_{Y_{t,A*} | A*, H^t}, P_{Y_{t,A*} | H^t})] under the discrete metric on Y'.
double feedback_wasserstein_bound(const InstanceAnalysis& an);
/// sum_t E[sqrt(KL(P_{Y_{t,A*} | A*, H^t} || P_{Y_{t,A*} | H^t}) / 2)]
ExtendedReal feedback_kl_bound(const InstanceAnalysis& an);

struct EntropyBounds {
  double general = 0.0;                ///< sqrt(|A| H(A*) T / 2)
  std::optional<double> full_reveal;   ///< sqrt(H(A*) T / 2) when every coordinate reveals the outcome
};
EntropyBounds feedback_entropy_bounds(const InstanceAnalysis& an);

/// sum_t E[sqrt(2 sigma_t^2 KL(P_{Y_{t,A*} | theta} || P_{Y_{t,A*} | H^t}))]
ExtendedReal feedback_theta_kl_bound(const InstanceAnalysis& an, const std::vector<double>& sigma2);
/// L sum_t E[W(P_{Y_{t,A*} | A*}, P_{Y_{t,A*} | H^t})], first law not conditioned on the history.
double feedback_marginal_wasserstein_bound(const InstanceAnalysis& an, const FiniteMetric& metric,
                                           std::optional<double> lipschitz);

struct EntropyDominance {
  std::vector<double> per_step;  ///< I(A*; Y_{t,A_t} | H^t) with A_t the Thompson action
  double lhs = 0.0;
  double rhs = 0.0;              ///< H(A*)
  bool holds = false;
};
EntropyDominance entropy_dominance_check(const InstanceAnalysis& an);

struct BoundEntry {
  std::string name;
  bool applicable = false;
  std::string reason;                 ///< why the bound does not apply
  ExtendedReal value;
  bool holds = false;                 ///< value >= mbr - tolerance
  bool vacuous = false;               ///< infinite value
  std::optional<bool> holds_for_thompson;

  double slack(double mbr) const { return value.is_finite() ? value.value() - mbr : value.to_double(); }
};

struct RelationCheck {
  std::string lower;
  std::string upper;
  double lower_value = 0.0;
  double upper_value = 0.0;
  bool holds = false;
};

struct BoundReport {
  std::string instance_id;
  double mbr_exact = 0.0;
  double thompson_regret_exact = 0.0;
  double known_theta_value = 0.0;
  double bcr_value = 0.0;
  double thompson_value = 0.0;
  std::vector<BoundEntry> entries;
  std::vector<RelationCheck> relations;
  std::optional<EntropyDominance> entropy_dominance;

  const BoundEntry* find(const std::string& name) const;
  /// Every asserted inequality: applicable entries, Thompson checks, relations,
  /// entropy dominance and mbr <= Thompson regret.
  bool all_hold() const;
  std::vector<std::string> failures() const;
};

BoundReport evaluate_all(const std::string& instance_id, const InstanceAnalysis& an, const BoundConfig& config);
BoundReport evaluate_all(const std::string& instance_id, const EnvironmentSpec& spec,
                         const PartialFeedbackSpec* feedback, const BoundConfig& config);

}  // namespace mbr
