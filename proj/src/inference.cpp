#include "mbr/inference.hpp"

#include <cstdlib>
#include <string>

namespace mbr {

namespace {

double reward_likelihood(const EnvironmentSpec& spec, int s, int a, int theta, double reward) {
  const auto out = spec.outcome_row(s, theta);
  double p = 0.0;
  for (int y = 0; y < spec.n_outcomes; ++y)
    if (spec.reward(y, a) == reward) p += out(y);
  return p;
}

Posterior renormalize(const Eigen::VectorXd& w, const char* what) {
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroLikelihood, what);
  return Posterior{FiniteDistribution(w / total)};
}

void check_state(const EnvironmentSpec& spec, int s) {
  if (s < 0 || s >= spec.n_states) throw Error(ErrorCode::BadIndex, "state out of range");
}

}  // namespace

Posterior initial_state_update(const EnvironmentSpec& spec, const Posterior& current, int state) {
  check_state(spec, state);
  Eigen::VectorXd w = current.dist.weights().cwiseProduct(spec.initial_state.row(state).transpose());
  return renormalize(w, "initial state has zero probability under every parameter");
}

Posterior posterior_update(const EnvironmentSpec& spec, const Posterior& current, const Observation& obs) {
  check_state(spec, obs.state);
  if (obs.action < 0 || obs.action >= spec.n_actions) throw Error(ErrorCode::BadIndex, "action out of range");
  if (obs.next_state) check_state(spec, *obs.next_state);
  Eigen::VectorXd w = current.dist.weights();
  for (int th = 0; th < spec.n_params; ++th) {
    if (w(th) == 0.0) continue;
    double like = reward_likelihood(spec, obs.state, obs.action, th, obs.reward);
    if (obs.next_state) like *= spec.trans_row(obs.state, obs.action, th)(*obs.next_state);
    w(th) *= like;
  }
  return renormalize(w, "observation has zero likelihood under every parameter");
}

Posterior posterior_from_history(const EnvironmentSpec& spec, const History& history,
                                 std::optional<int> current_state) {
  Posterior post{normalize(spec.prior)};
  const auto& rec = history.records;
  if (rec.empty()) {
    if (current_state) post = initial_state_update(spec, post, *current_state);
    return post;
  }
  post = initial_state_update(spec, post, rec.front().state);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    Observation obs{rec[i].state, rec[i].action, rec[i].reward, std::nullopt};
    if (i + 1 < rec.size())
      obs.next_state = rec[i + 1].state;
    else
      obs.next_state = current_state;
    post = posterior_update(spec, post, obs);
  }
  return post;
}

Eigen::VectorXd ThompsonPolicy::action_weights(int t, int state, const Eigen::Ref<const Eigen::VectorXd>& posterior,
                                               int n_actions) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_actions);
  for (int th = 0; th < psi_.n_params; ++th) w(psi_(t, state, th)) += posterior(th);
  return w;
}

FiniteDistribution ThompsonPolicy::action_distribution(int t, int state, const Posterior& posterior,
                                                       int n_actions) const {
  return normalize(action_weights(t, state, posterior.dist.weights(), n_actions));
}

std::size_t node_budget_from_env() {
  if (const char* v = std::getenv("MBR_NODE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long n = std::strtoull(v, &end, 10);
    if (end != v && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return kDefaultNodeBudget;
}

double HistoryLayer::total_probability() const {
  double total = 0.0;
  for (const auto& n : nodes) total += n.probability;
  return total;
}

Eigen::VectorXd HistoryLayer::group_weight(const Eigen::VectorXd& prior, int g) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(prior.size());
  for (int i = groups[g].begin; i < groups[g].end; ++i) w += nodes[i].per_theta_probability;
  return w.cwiseProduct(prior);
}

std::size_t HistoryTree::node_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.nodes.size();
  return n;
}

HistoryTree enumerate_history_tree(const EnvironmentSpec& spec, const GeneratingPolicy& policy, std::size_t budget) {
  require_valid(spec);
  const int S = spec.n_states, A = spec.n_actions, P = spec.n_params, T = spec.horizon;
  HistoryTree tree;
  tree.horizon = T;
  tree.prior = spec.prior;
  tree.model = tabulate_rewards(spec);
  const auto& model = tree.model;
  const int R = static_cast<int>(model.rewards.size());

  const auto* table = std::get_if<PolicyTable>(&policy);
  const auto* thompson = std::get_if<ThompsonPolicy>(&policy);
  if (table && table->information_kind() != InformationKind::History &&
      table->information_kind() != InformationKind::Theta)
    throw Error(ErrorCode::NotApplicable, "tree enumeration needs a history or theta policy");
  const bool theta_rule = table && table->information_kind() == InformationKind::Theta;

  auto overflow = [&](std::size_t n) {
    if (n > budget)
      throw Error(ErrorCode::BudgetExceeded, "history tree exceeds node budget of " + std::to_string(budget));
  };

  tree.layers.resize(T + 1);
  {
    auto& root = tree.layers[0];
    root.time = 0;
    for (int s = 0; s < S; ++s) {
      HistoryNode n;
      n.time = 0;
      n.state = s;
      n.per_theta_probability = spec.initial_state.row(s).transpose();
      n.probability = spec.prior.dot(n.per_theta_probability);
      if (n.probability <= 0.0) continue;
      root.nodes.push_back(std::move(n));
    }
    root.groups.push_back({0, static_cast<int>(root.nodes.size())});
    overflow(root.nodes.size());
  }

  for (int t = 0; t < T; ++t) {
    auto& layer = tree.layers[t];
    auto& next = tree.layers[t + 1];
    next.time = t + 1;
    const bool last = t + 1 == T;
    for (int g = 0; g < static_cast<int>(layer.groups.size()); ++g) {
      Eigen::VectorXd posterior;
      if (thompson) {
        posterior = layer.group_weight(spec.prior, g);
        posterior /= posterior.sum();
      }
      for (int i = layer.groups[g].begin; i < layer.groups[g].end; ++i) {
        auto& node = layer.nodes[i];
        const int s = node.state;
        // factor(a, theta): probability that the rule picks a at this node
        Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(A, P);
        if (thompson) {
          node.action_distribution = thompson->action_weights(t, s, posterior, A);
          for (int a = 0; a < A; ++a) factor.row(a).setConstant(node.action_distribution(a));
        } else if (theta_rule) {
          for (int th = 0; th < P; ++th) factor(table->action(t, s, {th}), th) = 1.0;
        } else {
          const int a = table->action(t, s, history_key(node.history));
          node.action_distribution = Eigen::VectorXd::Unit(A, a);
          factor.row(a).setOnes();
        }
        for (int a = 0; a < A; ++a) {
          if (factor.row(a).isZero()) continue;
          for (int r = 0; r < R; ++r) {
            const int group_begin = static_cast<int>(next.nodes.size());
            const int n_next = last ? 1 : S;
            for (int s2 = 0; s2 < n_next; ++s2) {
              HistoryNode child;
              child.time = t + 1;
              child.state = last ? kNoState : s2;
              child.parent = i;
              child.per_theta_probability.resize(P);
              for (int th = 0; th < P; ++th) {
                const int col = spec.trans_column(s, a, th);
                double p = node.per_theta_probability(th) * factor(a, th) * model.likelihood(r, col);
                if (!last) p *= spec.trans(s2, col);
                child.per_theta_probability(th) = p;
              }
              child.probability = spec.prior.dot(child.per_theta_probability);
              if (child.probability <= 0.0) continue;
              child.history = node.history;
              child.history.records.push_back({s, a, model.rewards[r], r});
              next.nodes.push_back(std::move(child));
            }
            const int group_end = static_cast<int>(next.nodes.size());
            if (group_end > group_begin) {
              const int id = static_cast<int>(next.groups.size());
              for (int k = group_begin; k < group_end; ++k) next.nodes[k].group = id;
              next.groups.push_back({group_begin, group_end});
            }
            overflow(next.nodes.size());
          }
        }
      }
    }
  }
  return tree;
}

std::vector<Eigen::MatrixXd> group_joints(const EnvironmentSpec& spec, const HistoryTree& tree, int t) {
  if (t < 0 || t >= tree.horizon) throw Error(ErrorCode::BadIndex, "step out of range");
  const int S = spec.n_states, Y = spec.n_outcomes, P = spec.n_params;
  const auto& layer = tree.layers[t];
  std::vector<Eigen::MatrixXd> out;
  out.reserve(layer.groups.size());
  for (const auto& g : layer.groups) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(P, Y * S);
    for (int i = g.begin; i < g.end; ++i) {
      const auto& n = layer.nodes[i];
      for (int th = 0; th < P; ++th) {
        const double w = spec.prior(th) * n.per_theta_probability(th);
        if (w == 0.0) continue;
        const auto law = spec.outcome_row(n.state, th);
        for (int y = 0; y < Y; ++y) m(th, y * S + n.state) += w * law(y);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::VectorXd optimal_trajectory_law(const EnvironmentSpec& spec, const PsiStar& psi, int theta, int t) {
  const int S = spec.n_states, Y = spec.n_outcomes;
  Eigen::VectorXd d = spec.initial_state.col(theta);
  for (int k = 0; k < t; ++k) {
    Eigen::VectorXd nd = Eigen::VectorXd::Zero(S);
    for (int s = 0; s < S; ++s)
      if (d(s) > 0.0) nd += d(s) * spec.trans_row(s, psi(k, s, theta), theta);
    d = std::move(nd);
  }
  Eigen::VectorXd law = Eigen::VectorXd::Zero(Y * S);
  for (int s = 0; s < S; ++s)
    for (int y = 0; y < Y; ++y) law(y * S + s) = d(s) * spec.outcome_row(s, theta)(y);
  return law;
}

Eigen::MatrixXd action_outcome_joint(const EnvironmentSpec& spec, const Eigen::MatrixXd& group_joint,
                                     const std::vector<int>& gamma) {
  const int S = spec.n_states, Y = spec.n_outcomes;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(spec.n_actions, Y);
  for (int th = 0; th < group_joint.rows(); ++th)
    for (int y = 0; y < Y; ++y) k(gamma[th], y) += group_joint.row(th).segment(y * S, S).sum();
  return k;
}

namespace {

void push_cell(ConditionalLaw& out, std::vector<int> key, const Eigen::VectorXd& w) {
  const double total = w.sum();
  if (!(total > 0.0)) return;
  out.cells.push_back({std::move(key), total, FiniteDistribution(w / total)});
}

}  // namespace

ConditionalLaw conditional_law(const EnvironmentSpec& spec, const HistoryTree& tree, int t, LawQuery query,
                               const PsiStar& psi, const PartialFeedbackSpec* feedback) {
  const int S = spec.n_states, A = spec.n_actions, Y = spec.n_outcomes, P = spec.n_params;
  ConditionalLaw out{query, t, {}};

  if (query == LawQuery::OptimalOutcomeStateGivenTheta) {
    if (t < 0 || t >= tree.horizon) throw Error(ErrorCode::BadIndex, "step out of range");
    for (int th = 0; th < P; ++th) {
      if (spec.prior(th) <= 0.0) continue;
      out.cells.push_back({{th}, spec.prior(th), normalize(optimal_trajectory_law(spec, psi, th, t))});
    }
    return out;
  }

  const auto joints = group_joints(spec, tree, t);
  if (query == LawQuery::OutcomeStateGivenHistory) {
    for (int g = 0; g < static_cast<int>(joints.size()); ++g)
      push_cell(out, {g}, joints[g].colwise().sum().transpose());
    return out;
  }

  if (!spec.is_static()) throw Error(ErrorCode::NotStatic, "optimal-action laws need a static instance");
  const auto gamma = optimal_action_map(psi);
  if (!gamma) throw Error(ErrorCode::NotApplicable, "optimal action depends on step or state");
  const bool coordinate_query = query == LawQuery::OptimalCoordinateGivenActionAndHistory ||
                                query == LawQuery::OptimalCoordinateGivenHistory;
  if (coordinate_query && !feedback)
    throw Error(ErrorCode::NotPartialFeedback, "coordinate laws need the partial-feedback structure");

  for (int g = 0; g < static_cast<int>(joints.size()); ++g) {
    const Eigen::MatrixXd k = action_outcome_joint(spec, joints[g], *gamma);
    switch (query) {
      case LawQuery::OutcomeGivenOptimalActionAndHistory:
        for (int a = 0; a < A; ++a) push_cell(out, {g, a}, k.row(a).transpose());
        break;
      case LawQuery::OptimalCoordinateGivenActionAndHistory:
        for (int a = 0; a < A; ++a) push_cell(out, {g, a}, feedback->project(k.row(a).transpose(), a));
        break;
      case LawQuery::OptimalCoordinateGivenHistory: {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(feedback->n_values);
        for (int a = 0; a < A; ++a) w += feedback->project(k.row(a).transpose(), a);
        push_cell(out, {g}, w);
        break;
      }
      case LawQuery::OptimalActionGivenHistory:
        push_cell(out, {g}, k.rowwise().sum());
        break;
      default:
        break;
    }
  }
  return out;
}

}  // namespace mbr
