#pragma once

// Reference computations for the tests. They read the kernels of an
// EnvironmentSpec directly and share no code with the planning, inference or
// bound engines: values come from brute-force policy enumeration and from an
// explicit list of Thompson-sampling trajectories.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "mbr/environment.hpp"
#include "mbr/planning.hpp"

namespace oracle {

using Vec = std::vector<double>;
using mbr::EnvironmentSpec;

// ---------------------------------------------------------------------------
// Elementary measures on plain vectors.

inline double sum(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline Vec scaled(Vec v, double k) {
  for (double& x : v) x *= k;
  return v;
}

inline double tv(const Vec& p, const Vec& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d / 2.0;
}

/// +inf without absolute continuity. Summed as p log(p/q) - p + q, which is
/// termwise non-negative and accurate when p and q nearly agree.
inline double kl(const Vec& p, const Vec& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) {
      d += q[i];
      continue;
    }
    if (q[i] <= 0.0) return INFINITY;
    const double r = (p[i] - q[i]) / q[i];
    d += p[i] * std::log1p(r) - (p[i] - q[i]);
  }
  return std::max(0.0, d);
}

inline double entropy(const Vec& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

/// I(X; Y) as KL(joint || product of marginals) for a joint given as rows of X.
inline double mutual_information(const std::vector<Vec>& joint) {
  double total = 0.0;
  for (const auto& r : joint) total += sum(r);
  if (total <= 0.0) return 0.0;
  Vec px(joint.size(), 0.0), py(joint[0].size(), 0.0), flat, prod;
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t j = 0; j < joint[i].size(); ++j) {
      px[i] += joint[i][j] / total;
      py[j] += joint[i][j] / total;
    }
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t j = 0; j < joint[i].size(); ++j) {
      flat.push_back(joint[i][j] / total);
      prod.push_back(px[i] * py[j]);
    }
  return kl(flat, prod);
}

// ---------------------------------------------------------------------------
// Kernel access.

inline double init(const EnvironmentSpec& e, int s, int th) { return e.initial_state(s, th); }
inline double trans(const EnvironmentSpec& e, int s, int a, int th, int s2) { return e.trans(s2, e.trans_column(s, a, th)); }
inline double out(const EnvironmentSpec& e, int s, int th, int y) { return e.outcome(y, e.outcome_column(s, th)); }
inline double rew(const EnvironmentSpec& e, int y, int a) { return e.reward(y, a); }

inline std::vector<double> reward_values(const EnvironmentSpec& e) {
  std::set<double> v;
  for (int y = 0; y < e.n_outcomes; ++y)
    for (int a = 0; a < e.n_actions; ++a) v.insert(e.reward(y, a));
  return {v.begin(), v.end()};
}

inline int reward_index(const std::vector<double>& values, double r) {
  return static_cast<int>(std::lower_bound(values.begin(), values.end(), r) - values.begin());
}

inline double reward_likelihood(const EnvironmentSpec& e, int s, int a, int th, double r) {
  double p = 0.0;
  for (int y = 0; y < e.n_outcomes; ++y)
    if (rew(e, y, a) == r) p += out(e, s, th, y);
  return p;
}

inline double expected_reward(const EnvironmentSpec& e, int s, int a, int th) {
  double v = 0.0;
  for (int y = 0; y < e.n_outcomes; ++y) v += out(e, s, th, y) * rew(e, y, a);
  return v;
}

// ---------------------------------------------------------------------------
// Markov rules a = rule[t * S + s].

inline double markov_value(const EnvironmentSpec& e, int th, const std::vector<int>& rule) {
  const int S = e.n_states;
  Vec dist(S);
  for (int s = 0; s < S; ++s) dist[s] = init(e, s, th);
  double v = 0.0;
  for (int t = 0; t < e.horizon; ++t) {
    Vec next(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (dist[s] == 0.0) continue;
      const int a = rule[t * S + s];
      v += dist[s] * expected_reward(e, s, a, th);
      for (int s2 = 0; s2 < S; ++s2) next[s2] += dist[s] * trans(e, s, a, th, s2);
    }
    dist = next;
  }
  return v;
}

inline void for_each_rule(int n_slots, int n_actions, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> rule(n_slots, 0);
  for (;;) {
    f(rule);
    int i = 0;
    while (i < n_slots && ++rule[i] == n_actions) rule[i++] = 0;
    if (i == n_slots) return;
  }
}

/// sum_theta prior max over Markov rules: the known-parameter limit.
inline double known_value(const EnvironmentSpec& e) {
  double v = 0.0;
  for (int th = 0; th < e.n_params; ++th) {
    double best = -INFINITY;
    for_each_rule(e.horizon * e.n_states, e.n_actions,
                  [&](const std::vector<int>& r) { best = std::max(best, markov_value(e, th, r)); });
    v += e.prior(th) * best;
  }
  return v;
}

/// Best single Markov rule against the prior mixture.
inline double best_markov_bayes(const EnvironmentSpec& e) {
  double best = -INFINITY;
  for_each_rule(e.horizon * e.n_states, e.n_actions, [&](const std::vector<int>& r) {
    double v = 0.0;
    for (int th = 0; th < e.n_params; ++th) v += e.prior(th) * markov_value(e, th, r);
    best = std::max(best, v);
  });
  return best;
}

/// Known-parameter rule by backward induction; ties go to the lowest action
/// within 1e-9 of the best. Indexed (t * S + s) * P + theta.
inline std::vector<int> psi_oracle(const EnvironmentSpec& e) {
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon;
  std::vector<int> psi(static_cast<std::size_t>(T) * S * P);
  for (int th = 0; th < P; ++th) {
    Vec v(S, 0.0);
    for (int t = T - 1; t >= 0; --t) {
      Vec nv(S);
      for (int s = 0; s < S; ++s) {
        Vec q(A);
        for (int a = 0; a < A; ++a) {
          q[a] = expected_reward(e, s, a, th);
          for (int s2 = 0; s2 < S; ++s2) q[a] += trans(e, s, a, th, s2) * v[s2];
        }
        const double best = *std::max_element(q.begin(), q.end());
        int pick = 0;
        while (q[pick] < best - 1e-9 * std::max(1.0, std::abs(best))) ++pick;
        psi[(t * S + s) * P + th] = pick;
        nv[s] = best;
      }
      v = nv;
    }
  }
  return psi;
}

inline int psi_at(const EnvironmentSpec& e, const std::vector<int>& psi, int t, int s, int th) {
  return psi[(t * e.n_states + s) * e.n_params + th];
}

// ---------------------------------------------------------------------------
// Brute force over every deterministic history-dependent policy. The rule at
// step t reads (s_0, a_0, r_0, ..., s_t); all keys are enumerated, reachable
// or not, so the count is A^(sum_t S^(t+1) (A R)^t).

inline double policy_count_log2(const EnvironmentSpec& e) {
  const double R = static_cast<double>(reward_values(e).size());
  double keys = 0.0, block = e.n_states;
  for (int t = 0; t < e.horizon; ++t) {
    keys += block;
    block *= e.n_actions * R * e.n_states;
  }
  return keys * std::log2(static_cast<double>(e.n_actions));
}

inline double bcr_bruteforce(const EnvironmentSpec& e) {
  const auto values = reward_values(e);
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon;
  const int R = static_cast<int>(values.size());
  std::vector<long long> offset(T + 1, 0);
  long long block = S;
  for (int t = 0; t < T; ++t) {
    offset[t + 1] = offset[t] + block;
    block *= static_cast<long long>(A) * R * S;
  }
  const long long n_keys = offset[T];
  if (policy_count_log2(e) > 22) throw std::invalid_argument("instance too large for brute force");

  std::vector<int> policy(n_keys, 0);
  // code = mixed-radix index of (s_0, a_0, r_0, ..., s_t) within step t.
  std::function<double(int, int, long long, int)> rec = [&](int th, int t, long long code, int s) -> double {
    const int a = policy[offset[t] + code];
    double v = 0.0;
    for (int y = 0; y < e.n_outcomes; ++y) {
      const double py = out(e, s, th, y);
      if (py == 0.0) continue;
      double cont = rew(e, y, a);
      if (t + 1 < T) {
        const int r = reward_index(values, rew(e, y, a));
        const long long base = ((code * A + a) * R + r) * S;
        for (int s2 = 0; s2 < S; ++s2) {
          const double ps = trans(e, s, a, th, s2);
          if (ps > 0.0) cont += ps * rec(th, t + 1, base + s2, s2);
        }
      }
      v += py * cont;
    }
    return v;
  };

  double best = -INFINITY;
  for (;;) {
    double v = 0.0;
    for (int th = 0; th < P; ++th)
      for (int s = 0; s < S; ++s)
        if (e.prior(th) * init(e, s, th) > 0.0) v += e.prior(th) * init(e, s, th) * rec(th, 0, s, s);
    best = std::max(best, v);
    long long i = 0;
    while (i < n_keys && ++policy[i] == A) policy[i++] = 0;
    if (i == n_keys) break;
  }
  return best;
}

/// Expectimax over unnormalized posterior weights w(theta) = prior P(history, s | theta).
/// The best action at a history depends only on these weights and the current
/// state, so this reaches the same optimum as enumerating policies.
inline double bcr_expectimax(const EnvironmentSpec& e) {
  const auto values = reward_values(e);
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon;
  std::function<double(const Vec&, int, int)> rec = [&](const Vec& w, int s, int t) -> double {
    double best = -INFINITY;
    for (int a = 0; a < A; ++a) {
      double v = 0.0;
      for (int th = 0; th < P; ++th) v += w[th] * expected_reward(e, s, a, th);
      if (t + 1 < T)
        for (double r : values)
          for (int s2 = 0; s2 < S; ++s2) {
            Vec w2(P);
            double mass = 0.0;
            for (int th = 0; th < P; ++th) {
              w2[th] = w[th] * reward_likelihood(e, s, a, th, r) * trans(e, s, a, th, s2);
              mass += w2[th];
            }
            if (mass > 0.0) v += rec(w2, s2, t + 1);
          }
      best = std::max(best, v);
    }
    return best;
  };
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    Vec w(P);
    double mass = 0.0;
    for (int th = 0; th < P; ++th) mass += (w[th] = e.prior(th) * init(e, s, th));
    if (mass > 0.0) total += rec(w, s, 0);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Knowledge and processing rules by brute force.

/// Rule phi_t(s, x_0 ... x_t), every key enumerated.
inline double knowledge_bruteforce(const EnvironmentSpec& e, const mbr::KnowledgeKernelSpec& k) {
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon, X = k.n_symbols;
  std::vector<long long> offset(T + 1, 0);
  long long block = static_cast<long long>(S) * X;
  for (int t = 0; t < T; ++t) {
    offset[t + 1] = offset[t] + block;
    block *= X;
  }
  const long long n_keys = offset[T];
  if (n_keys * std::log2(static_cast<double>(A)) > 20) throw std::invalid_argument("too many rules");
  std::vector<int> policy(n_keys, 0);

  // xs = mixed-radix code of x_0 ... x_t.
  std::function<double(int, int, int, long long)> rec = [&](int th, int t, int s, long long xs) -> double {
    const int a = policy[offset[t] + xs * S + s];
    double v = 0.0;
    for (int y = 0; y < e.n_outcomes; ++y) {
      const double py = out(e, s, th, y);
      if (py == 0.0) continue;
      double cont = rew(e, y, a);
      if (t + 1 < T)
        for (int x = 0; x < X; ++x) {
          const double px = k.step(x, k.step_column(e, s, a, y, th));
          if (px == 0.0) continue;
          for (int s2 = 0; s2 < S; ++s2) {
            const double ps = trans(e, s, a, th, s2);
            if (ps > 0.0) cont += px * ps * rec(th, t + 1, s2, xs * X + x);
          }
        }
      v += py * cont;
    }
    return v;
  };

  double best = -INFINITY;
  for (;;) {
    double v = 0.0;
    for (int th = 0; th < P; ++th)
      for (int x = 0; x < X; ++x)
        for (int s = 0; s < S; ++s) {
          const double w = e.prior(th) * k.initial(x, th) * init(e, s, th);
          if (w > 0.0) v += w * rec(th, 0, s, x);
        }
    best = std::max(best, v);
    long long i = 0;
    while (i < n_keys && ++policy[i] == A) policy[i++] = 0;
    if (i == n_keys) break;
  }
  return best;
}

/// Rule phi_t(s, z_t) with z_t ~ per_step[t](. | x_0 ... x_t), every key enumerated.
inline double processing_bruteforce(const EnvironmentSpec& e, const mbr::KnowledgeKernelSpec& k,
                                    const mbr::ProcessingKernelSpec& p) {
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon, X = k.n_symbols, Z = p.n_symbols;
  const int n_keys = T * S * Z;
  if (n_keys * std::log2(static_cast<double>(A)) > 20) throw std::invalid_argument("too many rules");
  std::vector<int> policy(n_keys, 0);

  std::function<double(int, int, int, long long)> rec = [&](int th, int t, int s, long long xs) -> double {
    double v = 0.0;
    for (int z = 0; z < Z; ++z) {
      const double pz = p.per_step[t](z, xs);
      if (pz == 0.0) continue;
      const int a = policy[(t * S + s) * Z + z];
      for (int y = 0; y < e.n_outcomes; ++y) {
        const double py = out(e, s, th, y);
        if (py == 0.0) continue;
        double cont = rew(e, y, a);
        if (t + 1 < T)
          for (int x = 0; x < X; ++x) {
            const double px = k.step(x, k.step_column(e, s, a, y, th));
            if (px == 0.0) continue;
            for (int s2 = 0; s2 < S; ++s2) {
              const double ps = trans(e, s, a, th, s2);
              if (ps > 0.0) cont += px * ps * rec(th, t + 1, s2, xs * X + x);
            }
          }
        v += pz * py * cont;
      }
    }
    return v;
  };

  double best = -INFINITY;
  for (;;) {
    double v = 0.0;
    for (int th = 0; th < P; ++th)
      for (int x = 0; x < X; ++x)
        for (int s = 0; s < S; ++s) {
          const double w = e.prior(th) * k.initial(x, th) * init(e, s, th);
          if (w > 0.0) v += w * rec(th, 0, s, x);
        }
    best = std::max(best, v);
    int i = 0;
    while (i < n_keys && ++policy[i] == A) policy[i++] = 0;
    if (i == n_keys) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Thompson sampling trajectories.

struct PathStep {
  int s = 0, a = 0, y = 0;
};

struct Path {
  std::vector<PathStep> steps;
  Vec weight;  ///< prior(theta) P(trajectory | theta) under Thompson sampling
};

/// P(theta | s_0, a_0, r_0, ..., a_{t-1}, r_{t-1}); the transition into the
/// current state is not part of the evidence. The prior at t = 0.
inline Vec thompson_posterior(const EnvironmentSpec& e, const std::vector<PathStep>& steps) {
  Vec w(e.n_params);
  for (int th = 0; th < e.n_params; ++th) {
    w[th] = e.prior(th);
    if (steps.empty()) continue;
    w[th] *= init(e, steps[0].s, th);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& st = steps[k];
      w[th] *= reward_likelihood(e, st.s, st.a, th, rew(e, st.y, st.a));
      if (k + 1 < steps.size()) w[th] *= trans(e, st.s, st.a, th, steps[k + 1].s);
    }
  }
  const double z = sum(w);
  if (z <= 0.0) throw std::logic_error("unreachable history");
  return scaled(w, 1.0 / z);
}

inline std::vector<Path> thompson_paths(const EnvironmentSpec& e, const std::vector<int>& psi) {
  const int S = e.n_states, A = e.n_actions, P = e.n_params, T = e.horizon;
  std::vector<Path> done;
  std::function<void(std::vector<PathStep>&, int, const Vec&)> grow = [&](std::vector<PathStep>& steps, int s,
                                                                          const Vec& w) {
    const int t = static_cast<int>(steps.size());
    const Vec post = thompson_posterior(e, steps);
    Vec pa(A, 0.0);
    for (int th = 0; th < P; ++th) pa[psi_at(e, psi, t, s, th)] += post[th];
    for (int a = 0; a < A; ++a) {
      if (pa[a] <= 0.0) continue;
      for (int y = 0; y < e.n_outcomes; ++y) {
        Vec wy(P);
        for (int th = 0; th < P; ++th) wy[th] = w[th] * pa[a] * out(e, s, th, y);
        if (sum(wy) <= 0.0) continue;
        steps.push_back({s, a, y});
        if (t + 1 == T) {
          done.push_back({steps, wy});
        } else {
          for (int s2 = 0; s2 < S; ++s2) {
            Vec ws(P);
            for (int th = 0; th < P; ++th) ws[th] = wy[th] * trans(e, s, a, th, s2);
            if (sum(ws) > 0.0) grow(steps, s2, ws);
          }
        }
        steps.pop_back();
      }
    }
  };
  for (int s = 0; s < S; ++s) {
    Vec w(P);
    for (int th = 0; th < P; ++th) w[th] = e.prior(th) * init(e, s, th);
    if (sum(w) <= 0.0) continue;
    std::vector<PathStep> steps;
    grow(steps, s, w);
  }
  return done;
}

inline double thompson_value(const EnvironmentSpec& e) {
  const auto psi = psi_oracle(e);
  double v = 0.0;
  for (const auto& p : thompson_paths(e, psi)) {
    double r = 0.0;
    for (const auto& st : p.steps) r += rew(e, st.y, st.a);
    v += sum(p.weight) * r;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Bound values recomputed from the trajectory list.

/// Key of the recorded history before step t: (s, a, reward) triples.
inline std::vector<double> history_key(const EnvironmentSpec& e, const std::vector<PathStep>& steps, int t) {
  std::vector<double> key;
  for (int k = 0; k < t; ++k) {
    key.push_back(steps[k].s);
    key.push_back(steps[k].a);
    key.push_back(rew(e, steps[k].y, steps[k].a));
  }
  return key;
}

/// Law of (Y_t, S_t) over cells y * S + s along psi* at theta.
inline Vec optimal_cell_law(const EnvironmentSpec& e, const std::vector<int>& psi, int th, int t) {
  const int S = e.n_states;
  Vec dist(S);
  for (int s = 0; s < S; ++s) dist[s] = init(e, s, th);
  for (int k = 0; k < t; ++k) {
    Vec next(S, 0.0);
    for (int s = 0; s < S; ++s)
      for (int s2 = 0; s2 < S; ++s2) next[s2] += dist[s] * trans(e, s, psi_at(e, psi, k, s, th), th, s2);
    dist = next;
  }
  Vec cells(static_cast<std::size_t>(e.n_outcomes) * S, 0.0);
  for (int s = 0; s < S; ++s)
    for (int y = 0; y < e.n_outcomes; ++y) cells[y * S + s] = dist[s] * out(e, s, th, y);
  return cells;
}

struct FeedbackShape {
  int n_values = 0;
  Vec preference;
  int coordinate(int y, int a) const {
    for (int k = 0; k < a; ++k) y /= n_values;
    return y % n_values;
  }
  Vec project(const Vec& law_y, int a) const {
    Vec out(n_values, 0.0);
    for (std::size_t y = 0; y < law_y.size(); ++y) out[coordinate(static_cast<int>(y), a)] += law_y[y];
    return out;
  }
};

struct BoundValues {
  double kl_subgaussian = 0.0;
  double wasserstein_bounded = 0.0;
  double wasserstein_lipschitz = 0.0;  ///< discrete metric, tightest constant
  // Static instances with a state-free optimal action.
  double static_wasserstein = 0.0;
  double static_mutual_information = 0.0;
  double static_mi_subgaussian = 0.0;
  double static_marginal_wasserstein = 0.0;
  // Partial feedback.
  double feedback_wasserstein = 0.0;
  double feedback_kl = 0.0;
  double feedback_theta_kl = 0.0;
  double feedback_marginal_wasserstein = 0.0;
  double feedback_entropy = 0.0;
  double feedback_entropy_full_reveal = 0.0;
  double information_sum = 0.0;  ///< sum_t I(A*; Y_{t, A_t} | H^t)
  double optimal_action_entropy = 0.0;
};

/// sqrt(2 sigma^2 KL) in the limit of small sigma^2 when rewards are constant:
/// infinite KL stays infinite, finite terms vanish.
inline double subgaussian_term(double s2, double k) {
  if (std::isinf(k)) return INFINITY;
  return std::sqrt(2.0 * s2 * k);
}

/// Sub-Gaussian proxy (hi - lo)^2 / 4 from the reward table.
inline double sigma2(const EnvironmentSpec& e) {
  const double lo = e.reward.minCoeff(), hi = e.reward.maxCoeff();
  return (hi - lo) * (hi - lo) / 4.0;
}

/// gamma(theta) when psi* ignores step and state, otherwise empty.
inline std::vector<int> gamma_of(const EnvironmentSpec& e, const std::vector<int>& psi) {
  std::vector<int> g(e.n_params);
  for (int th = 0; th < e.n_params; ++th) {
    g[th] = psi_at(e, psi, 0, 0, th);
    for (int t = 0; t < e.horizon; ++t)
      for (int s = 0; s < e.n_states; ++s)
        if (psi_at(e, psi, t, s, th) != g[th]) return {};
  }
  return g;
}

inline BoundValues bound_values(const EnvironmentSpec& e, const FeedbackShape* fb = nullptr) {
  const int S = e.n_states, P = e.n_params, Y = e.n_outcomes, T = e.horizon, A = e.n_actions;
  const int C = Y * S;
  const auto psi = psi_oracle(e);
  const auto paths = thompson_paths(e, psi);
  const auto gamma = gamma_of(e, psi);
  const double s2 = sigma2(e);
  BoundValues b;

  // Tightest Lipschitz constant of the cell reward map under the discrete metric.
  double lip = 0.0;
  for (int t = 0; t < T; ++t)
    for (int th = 0; th < P; ++th)
      for (int c1 = 0; c1 < C; ++c1)
        for (int c2 = 0; c2 < C; ++c2) {
          if (c1 == c2) continue;
          const double r1 = rew(e, c1 / S, psi_at(e, psi, t, c1 % S, th));
          const double r2 = rew(e, c2 / S, psi_at(e, psi, t, c2 % S, th));
          lip = std::max(lip, std::abs(r1 - r2));
        }

  for (int t = 0; t < T; ++t) {
    // J[h][theta][cell] = P(theta, h, Y_t, S_t); Ja[h][a*][a_t][y] with the Thompson action.
    std::map<std::vector<double>, std::vector<Vec>> J;
    std::map<std::vector<double>, std::vector<std::vector<Vec>>> Ja;
    for (const auto& p : paths) {
      const auto key = history_key(e, p.steps, t);
      auto& m = J[key];
      if (m.empty()) m.assign(P, Vec(C, 0.0));
      const auto& st = p.steps[t];
      for (int th = 0; th < P; ++th) m[th][st.y * S + st.s] += p.weight[th];
      if (!gamma.empty()) {
        auto& n = Ja[key];
        if (n.empty()) n.assign(A, std::vector<Vec>(A, Vec(Y, 0.0)));
        for (int th = 0; th < P; ++th) n[gamma[th]][st.a][st.y] += p.weight[th];
      }
    }

    for (const auto& [key, m] : J) {
      Vec mix(C, 0.0);
      for (int th = 0; th < P; ++th)
        for (int c = 0; c < C; ++c) mix[c] += m[th][c];
      const double ph = sum(mix);
      const Vec cond = scaled(mix, 1.0 / ph);
      for (int th = 0; th < P; ++th) {
        const double w = sum(m[th]);
        if (w <= 0.0) continue;
        const Vec star = optimal_cell_law(e, psi, th, t);
        b.wasserstein_bounded += w * tv(star, cond);
        b.kl_subgaussian += w * subgaussian_term(s2, kl(star, cond));
      }
    }

    if (gamma.empty()) continue;
    // Static quantities over outcomes Y (states summed out).
    auto outcome_law = [&](const Vec& cells) {
      Vec y(Y, 0.0);
      for (int c = 0; c < C; ++c) y[c / S] += cells[c];
      return y;
    };
    // P(Y_t | A* = a) marginal over histories.
    std::vector<Vec> y_given_a(A, Vec(Y, 0.0));
    for (const auto& [key, m] : J)
      for (int th = 0; th < P; ++th) {
        const Vec yl = outcome_law(m[th]);
        for (int y = 0; y < Y; ++y) y_given_a[gamma[th]][y] += yl[y];
      }
    double info_t = 0.0;
    for (const auto& [key, m] : J) {
      std::vector<Vec> joint(A, Vec(Y, 0.0));  // (a*, y) at this history
      for (int th = 0; th < P; ++th) {
        const Vec yl = outcome_law(m[th]);
        for (int y = 0; y < Y; ++y) joint[gamma[th]][y] += yl[y];
      }
      Vec py(Y, 0.0);
      for (int a = 0; a < A; ++a)
        for (int y = 0; y < Y; ++y) py[y] += joint[a][y];
      const double ph = sum(py);
      const Vec cond = scaled(py, 1.0 / ph);
      info_t += ph * mutual_information(joint);
      for (int a = 0; a < A; ++a) {
        const double w = sum(joint[a]);
        if (w <= 0.0) continue;
        const Vec ca = scaled(joint[a], 1.0 / w);
        b.static_wasserstein += w * tv(ca, cond);
        const Vec marg = scaled(y_given_a[a], 1.0 / sum(y_given_a[a]));
        b.static_marginal_wasserstein += w * tv(marg, cond);
        if (fb) {
          const Vec pa = fb->project(ca, a), pc = fb->project(cond, a);
          b.feedback_wasserstein += w * tv(pa, pc);
          b.feedback_kl += w * std::sqrt(kl(pa, pc) / 2.0);
          b.feedback_marginal_wasserstein += w * tv(fb->project(marg, a), pc);
        }
      }
      if (fb)
        for (int th = 0; th < P; ++th) {
          const double w = sum(m[th]);
          if (w <= 0.0) continue;
          Vec yth(Y);
          for (int y = 0; y < Y; ++y) yth[y] = out(e, 0, th, y);
          b.feedback_theta_kl += w * subgaussian_term(s2, kl(fb->project(yth, gamma[th]), fb->project(cond, gamma[th])));
        }
    }
    b.static_mutual_information += std::sqrt(info_t / 2.0);
    b.static_mi_subgaussian += std::sqrt(2.0 * s2 * info_t);

    if (fb)
      for (const auto& [key, n] : Ja) {
        std::vector<Vec> joint(A, Vec(fb->n_values, 0.0));  // (a*, observed coordinate)
        double ph = 0.0;
        for (int as = 0; as < A; ++as)
          for (int at = 0; at < A; ++at)
            for (int y = 0; y < Y; ++y) {
              joint[as][fb->coordinate(y, at)] += n[as][at][y];
              ph += n[as][at][y];
            }
        b.information_sum += ph * mutual_information(joint);
      }
  }

  b.wasserstein_lipschitz = lip * b.wasserstein_bounded;
  if (!gamma.empty()) {
    double lip_y = 0.0;
    for (int a = 0; a < A; ++a)
      for (int y1 = 0; y1 < Y; ++y1)
        for (int y2 = 0; y2 < Y; ++y2) lip_y = std::max(lip_y, std::abs(rew(e, y1, a) - rew(e, y2, a)));
    b.static_marginal_wasserstein *= lip_y;
    Vec pa(A, 0.0);
    for (int th = 0; th < P; ++th) pa[gamma[th]] += e.prior(th);
    b.optimal_action_entropy = entropy(scaled(pa, 1.0 / sum(pa)));
    if (fb) {
      double lip_v = 0.0;
      for (double u : fb->preference)
        for (double v : fb->preference) lip_v = std::max(lip_v, std::abs(u - v));
      b.feedback_marginal_wasserstein *= lip_v;
      b.feedback_entropy = std::sqrt(A * b.optimal_action_entropy * T / 2.0);
      b.feedback_entropy_full_reveal = std::sqrt(b.optimal_action_entropy * T / 2.0);
    }
  }
  return b;
}

}  // namespace oracle
