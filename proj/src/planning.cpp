#include "mbr/planning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

namespace mbr {

namespace {

// Relative tolerance only, so multiplying every reward by a power of two
// leaves each comparison unchanged.
bool improves(double q, double best) { return q - best > 1e-12 * std::max(std::abs(q), std::abs(best)); }

void budget_check(std::size_t used, std::size_t budget, const char* what) {
  if (used > budget)
    throw Error(ErrorCode::BudgetExceeded, std::string(what) + " exceeds budget of " + std::to_string(budget));
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Rule {
  int t;
  int state;
  PolicyTable::Key key;
  int action;
};

struct SearchResult {
  Eigen::VectorXd per_time;
  std::vector<Rule> rules;

  double value() const { return per_time.sum(); }
  void absorb(SearchResult&& other) {
    per_time += other.per_time;
    rules.insert(rules.end(), std::make_move_iterator(other.rules.begin()),
                 std::make_move_iterator(other.rules.end()));
  }
};

PolicyTable make_table(InformationKind kind, int horizon, const std::vector<Rule>& rules) {
  PolicyTable table(kind, horizon);
  for (const auto& r : rules) table.set(r.t, r.state, r.key, r.action);
  return table;
}

}  // namespace

KnownThetaSolution optimal_policy_known_theta(const EnvironmentSpec& spec) {
  require_valid(spec);
  const int S = spec.n_states, A = spec.n_actions, P = spec.n_params, T = spec.horizon;
  const auto model = tabulate_rewards(spec);
  KnownThetaSolution sol;
  sol.psi = PsiStar{T, S, P, std::vector<int>(static_cast<std::size_t>(T) * S * P, 0)};
  std::vector<double> per_time(T, 0.0);
  double value = 0.0;
  for (int th = 0; th < P; ++th) {
    Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
    for (int t = T - 1; t >= 0; --t) {
      Eigen::VectorXd v(S);
      for (int s = 0; s < S; ++s) {
        int best_a = 0;
        double best = 0.0;
        for (int a = 0; a < A; ++a) {
          const double q = model.expected_reward(s, a, th, P) + spec.trans_row(s, a, th).dot(v_next);
          if (a == 0 || improves(q, best)) {
            best = q;
            best_a = a;
          }
        }
        v(s) = best;
        sol.psi.actions[(t * S + s) * P + th] = best_a;
      }
      v_next = std::move(v);
    }
    value += spec.prior(th) * spec.initial_state.col(th).dot(v_next);

    Eigen::VectorXd d = spec.initial_state.col(th);
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd nd = Eigen::VectorXd::Zero(S);
      for (int s = 0; s < S; ++s) {
        if (d(s) == 0.0) continue;
        const int a = sol.psi(t, s, th);
        per_time[t] += spec.prior(th) * d(s) * model.expected_reward(s, a, th, P);
        nd += d(s) * spec.trans_row(s, a, th);
      }
      d = std::move(nd);
    }
  }
  sol.report.value = value;
  sol.report.per_time_values = std::move(per_time);
  sol.report.policy = sol.psi.to_table();
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

class HistorySearch {
 public:
  HistorySearch(const EnvironmentSpec& spec, std::size_t budget)
      : spec_(spec), model_(tabulate_rewards(spec)), budget_(budget), table_(InformationKind::History, spec.horizon) {}

  ValueReport run() {
    const int T = spec_.horizon;
    Eigen::VectorXd per_time = Eigen::VectorXd::Zero(T);
    History h;
    for (int s = 0; s < spec_.n_states; ++s) {
      Eigen::VectorXd w = spec_.prior.cwiseProduct(spec_.initial_state.row(s).transpose());
      if (w.sum() <= 0.0) continue;
      per_time += solve(0, s, w, h);
    }
    ValueReport report;
    report.per_time_values = to_std(per_time);
    report.value = per_time.sum();
    report.policy = std::move(table_);
    return report;
  }

 private:
  // Returns per-step reward contributions of the subtree rooted at (h, s),
  // weighted by the unnormalized per-theta mass w.
  Eigen::VectorXd solve(int t, int s, const Eigen::VectorXd& w, History& h) {
    budget_check(++visited_, budget_, "history search");
    const int A = spec_.n_actions, P = spec_.n_params, S = spec_.n_states, T = spec_.horizon;
    const int R = static_cast<int>(model_.rewards.size());
    Eigen::VectorXd best;
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(T);
      for (int th = 0; th < P; ++th) acc(t) += w(th) * model_.expected_reward(s, a, th, P);
      if (t + 1 < T) {
        for (int r = 0; r < R; ++r) {
          Eigen::VectorXd wr(P);
          for (int th = 0; th < P; ++th) wr(th) = w(th) * model_.likelihood(r, spec_.trans_column(s, a, th));
          if (wr.sum() <= 0.0) continue;
          h.records.push_back({s, a, model_.rewards[r], r});
          for (int s2 = 0; s2 < S; ++s2) {
            Eigen::VectorXd w2(P);
            for (int th = 0; th < P; ++th) w2(th) = wr(th) * spec_.trans(s2, spec_.trans_column(s, a, th));
            if (w2.sum() <= 0.0) continue;
            acc += solve(t + 1, s2, w2, h);
          }
          h.records.pop_back();
        }
      }
      if (a == 0 || improves(acc.sum(), best.sum())) {
        best = std::move(acc);
        best_a = a;
      }
    }
    table_.set(t, s, history_key(h), best_a);
    return best;
  }

  const EnvironmentSpec& spec_;
  RewardModel model_;
  std::size_t budget_;
  std::size_t visited_ = 0;
  PolicyTable table_;
};

}  // namespace

ValueReport bcr_exact(const EnvironmentSpec& spec, std::size_t budget) {
  require_valid(spec);
  return HistorySearch(spec, budget).run();
}

// ---------------------------------------------------------------------------

KnowledgeKernelSpec history_knowledge(const EnvironmentSpec& spec) {
  const auto model = tabulate_rewards(spec);
  const int S = spec.n_states, A = spec.n_actions, Y = spec.n_outcomes, P = spec.n_params;
  const int R = static_cast<int>(model.rewards.size());
  KnowledgeKernelSpec k;
  k.n_symbols = S * A * R;
  k.initial = Eigen::MatrixXd::Zero(k.n_symbols, P);
  k.initial.row(0).setOnes();
  k.step = Eigen::MatrixXd::Zero(k.n_symbols, S * A * Y * P);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int y = 0; y < Y; ++y)
        for (int th = 0; th < P; ++th)
          k.step((s * A + a) * R + model.reward_index(y, a), k.step_column(spec, s, a, y, th)) = 1.0;
  return k;
}

KnowledgeKernelSpec theta_knowledge(const EnvironmentSpec& spec) {
  const int S = spec.n_states, A = spec.n_actions, Y = spec.n_outcomes, P = spec.n_params;
  KnowledgeKernelSpec k;
  k.n_symbols = P;
  k.initial = Eigen::MatrixXd::Identity(P, P);
  k.step = Eigen::MatrixXd::Zero(P, S * A * Y * P);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int y = 0; y < Y; ++y)
        for (int th = 0; th < P; ++th) k.step(th, k.step_column(spec, s, a, y, th)) = 1.0;
  return k;
}

KnowledgeKernelSpec constant_knowledge(const EnvironmentSpec& spec) {
  KnowledgeKernelSpec k;
  k.n_symbols = 1;
  k.initial = Eigen::MatrixXd::Ones(1, spec.n_params);
  k.step = Eigen::MatrixXd::Ones(1, spec.n_states * spec.n_actions * spec.n_outcomes * spec.n_params);
  return k;
}

namespace {

void check_columns(const Eigen::MatrixXd& m, const std::string& name, std::vector<Violation>& out) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const auto col = m.col(c);
    if (!col.allFinite() || (col.array() < 0.0).any() || std::abs(col.sum() - 1.0) > 1e-9)
      out.push_back({name + "[" + std::to_string(c) + "]", "column is not a distribution"});
  }
}

long long checked_pow(long long base, int exp, long long limit) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > limit) return limit + 1;
  }
  return r;
}

}  // namespace

std::vector<Violation> validate(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know) {
  std::vector<Violation> out;
  const int cols = spec.n_states * spec.n_actions * spec.n_outcomes * spec.n_params;
  if (know.n_symbols <= 0 || know.initial.rows() != know.n_symbols || know.initial.cols() != spec.n_params ||
      know.step.rows() != know.n_symbols || know.step.cols() != cols) {
    out.push_back({"knowledge", "kernel shape does not match the instance"});
    return out;
  }
  check_columns(know.initial, "knowledge.initial", out);
  check_columns(know.step, "knowledge.step", out);
  return out;
}

ProcessingKernelSpec identity_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know) {
  const long long z = checked_pow(know.n_symbols, spec.horizon, 1'000'000);
  if (z > 1'000'000) throw Error(ErrorCode::BudgetExceeded, "identity processing alphabet too large");
  ProcessingKernelSpec proc;
  proc.n_symbols = static_cast<int>(z);
  for (int t = 0; t < spec.horizon; ++t) {
    const int nx = static_cast<int>(checked_pow(know.n_symbols, t + 1, z));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(proc.n_symbols, nx);
    for (int x = 0; x < nx; ++x) m(x, x) = 1.0;
    proc.per_step.push_back(std::move(m));
  }
  return proc;
}

ProcessingKernelSpec constant_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know) {
  ProcessingKernelSpec proc;
  proc.n_symbols = 1;
  for (int t = 0; t < spec.horizon; ++t)
    proc.per_step.push_back(Eigen::MatrixXd::Ones(1, checked_pow(know.n_symbols, t + 1, 1'000'000)));
  return proc;
}

std::vector<Violation> validate(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know,
                                const ProcessingKernelSpec& proc) {
  auto out = validate(spec, know);
  if (!out.empty()) return out;
  if (proc.n_symbols <= 0 || static_cast<int>(proc.per_step.size()) != spec.horizon) {
    out.push_back({"processing", "need one kernel per step"});
    return out;
  }
  for (int t = 0; t < spec.horizon; ++t) {
    const auto& m = proc.per_step[t];
    if (m.rows() != proc.n_symbols || m.cols() != checked_pow(know.n_symbols, t + 1, 1'000'000)) {
      out.push_back({"processing[" + std::to_string(t) + "]", "kernel shape does not match |Z| x |X|^(t+1)"});
      continue;
    }
    check_columns(m, "processing[" + std::to_string(t) + "]", out);
  }
  return out;
}

namespace {

void require(const std::vector<Violation>& v) {
  if (v.empty()) return;
  std::string msg;
  for (const auto& x : v) msg += x.location + ": " + x.message + "; ";
  throw Error(ErrorCode::ValidationError, msg);
}

// P(x' | s, a, theta) = sum_y out(y | s, theta) kappa(x' | s, a, y, theta); X x (S*A*Theta).
Eigen::MatrixXd knowledge_given_action(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(know.n_symbols, spec.n_states * spec.n_actions * spec.n_params);
  for (int s = 0; s < spec.n_states; ++s)
    for (int a = 0; a < spec.n_actions; ++a)
      for (int th = 0; th < spec.n_params; ++th) {
        const auto out = spec.outcome_row(s, th);
        for (int y = 0; y < spec.n_outcomes; ++y)
          if (out(y) > 0.0) k.col(spec.trans_column(s, a, th)) += out(y) * know.step.col(know.step_column(spec, s, a, y, th));
      }
  return k;
}

class KnowledgeSearch {
 public:
  KnowledgeSearch(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know, std::size_t budget)
      : spec_(spec), model_(tabulate_rewards(spec)), know_(know), kx_(knowledge_given_action(spec, know)),
        budget_(budget) {}

  ValueReport run() {
    const int S = spec_.n_states, P = spec_.n_params, T = spec_.horizon;
    SearchResult total{Eigen::VectorXd::Zero(T), {}};
    for (int x = 0; x < know_.n_symbols; ++x) {
      Eigen::MatrixXd m(P, S);
      for (int th = 0; th < P; ++th)
        for (int s = 0; s < S; ++s) m(th, s) = spec_.prior(th) * know_.initial(x, th) * spec_.initial_state(s, th);
      if (m.sum() <= 0.0) continue;
      total.absorb(solve(0, m, {x}));
    }
    ValueReport report;
    report.per_time_values = to_std(total.per_time);
    report.value = total.value();
    report.policy = make_table(InformationKind::Knowledge, T, total.rules);
    return report;
  }

 private:
  // m(theta, s) = P(theta, S_t = s, X^t = prefix), unnormalized.
  SearchResult solve(int t, const Eigen::MatrixXd& m, const PolicyTable::Key& prefix) {
    budget_check(++visited_, budget_, "knowledge search");
    const int S = spec_.n_states, A = spec_.n_actions, P = spec_.n_params, T = spec_.horizon;
    const int X = know_.n_symbols;
    std::vector<int> active;
    for (int s = 0; s < S; ++s)
      if (m.col(s).sum() > 0.0) active.push_back(s);

    SearchResult out{Eigen::VectorXd::Zero(T), {}};
    if (t + 1 == T) {
      for (int s : active) {
        int best_a = 0;
        double best = 0.0;
        for (int a = 0; a < A; ++a) {
          double q = 0.0;
          for (int th = 0; th < P; ++th) q += m(th, s) * model_.expected_reward(s, a, th, P);
          if (a == 0 || improves(q, best)) {
            best = q;
            best_a = a;
          }
        }
        out.per_time(t) += best;
        out.rules.push_back({t, s, prefix, best_a});
      }
      return out;
    }

    // States whose next-symbol supports overlap must be decided together:
    // the rule at the next step cannot tell them apart.
    std::vector<std::vector<char>> reach(active.size(), std::vector<char>(X, 0));
    for (std::size_t i = 0; i < active.size(); ++i)
      for (int a = 0; a < A; ++a)
        for (int th = 0; th < P; ++th) {
          if (m(th, active[i]) <= 0.0) continue;
          const auto col = kx_.col(spec_.trans_column(active[i], a, th));
          for (int x = 0; x < X; ++x)
            if (col(x) > 0.0) reach[i][x] = 1;
        }
    std::vector<int> comp(active.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int i) {
      while (comp[i] != i) i = comp[i] = comp[comp[i]];
      return i;
    };
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j)
        for (int x = 0; x < X; ++x)
          if (reach[i][x] && reach[j][x]) {
            comp[find(static_cast<int>(j))] = find(static_cast<int>(i));
            break;
          }

    for (std::size_t root = 0; root < active.size(); ++root) {
      if (find(static_cast<int>(root)) != static_cast<int>(root)) continue;
      std::vector<int> members;
      std::vector<char> symbols(X, 0);
      for (std::size_t i = 0; i < active.size(); ++i)
        if (find(static_cast<int>(i)) == static_cast<int>(root)) {
          members.push_back(active[i]);
          for (int x = 0; x < X; ++x) symbols[x] |= reach[i][x];
        }
      out.absorb(best_joint(t, m, prefix, members, symbols));
    }
    return out;
  }

  SearchResult best_joint(int t, const Eigen::MatrixXd& m, const PolicyTable::Key& prefix,
                          const std::vector<int>& members, const std::vector<char>& symbols) {
    const int S = spec_.n_states, A = spec_.n_actions, P = spec_.n_params, T = spec_.horizon;
    const int X = know_.n_symbols;
    const long long combos = checked_pow(A, static_cast<int>(members.size()), static_cast<long long>(budget_));
    budget_check(static_cast<std::size_t>(combos), budget_, "joint action enumeration");

    SearchResult best;
    bool have = false;
    std::vector<int> choice(members.size(), 0);
    for (long long c = 0; c < combos; ++c) {
      long long rest = c;
      for (std::size_t i = members.size(); i-- > 0;) {
        choice[i] = static_cast<int>(rest % A);
        rest /= A;
      }
      SearchResult cand{Eigen::VectorXd::Zero(T), {}};
      for (std::size_t i = 0; i < members.size(); ++i) {
        const int s = members[i];
        for (int th = 0; th < P; ++th) cand.per_time(t) += m(th, s) * model_.expected_reward(s, choice[i], th, P);
        cand.rules.push_back({t, s, prefix, choice[i]});
      }
      for (int x = 0; x < X; ++x) {
        if (!symbols[x]) continue;
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(P, S);
        for (std::size_t i = 0; i < members.size(); ++i) {
          const int s = members[i];
          for (int th = 0; th < P; ++th) {
            if (m(th, s) <= 0.0) continue;
            const int col = spec_.trans_column(s, choice[i], th);
            const double px = kx_(x, col);
            if (px <= 0.0) continue;
            next.row(th) += m(th, s) * px * spec_.trans.col(col).transpose();
          }
        }
        if (next.sum() <= 0.0) continue;
        auto key = prefix;
        key.push_back(x);
        cand.absorb(solve(t + 1, next, key));
      }
      budget_check(++visited_, budget_, "knowledge search");
      if (!have || improves(cand.value(), best.value())) {
        best = std::move(cand);
        have = true;
      }
    }
    return best;
  }

  const EnvironmentSpec& spec_;
  RewardModel model_;
  const KnowledgeKernelSpec& know_;
  Eigen::MatrixXd kx_;
  std::size_t budget_;
  std::size_t visited_ = 0;
};

class ProcessingSearch {
 public:
  ProcessingSearch(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know, const ProcessingKernelSpec& proc,
                   std::size_t budget)
      : spec_(spec), model_(tabulate_rewards(spec)), know_(know), proc_(proc),
        kx_(knowledge_given_action(spec, know)), budget_(budget) {}

  ValueReport run() {
    const int S = spec_.n_states, P = spec_.n_params, T = spec_.horizon;
    std::vector<Eigen::MatrixXd> mass(know_.n_symbols, Eigen::MatrixXd::Zero(P, S));
    for (int x = 0; x < know_.n_symbols; ++x)
      for (int th = 0; th < P; ++th)
        for (int s = 0; s < S; ++s) mass[x](th, s) = spec_.prior(th) * know_.initial(x, th) * spec_.initial_state(s, th);
    SearchResult best = search(0, mass);
    ValueReport report;
    report.per_time_values = to_std(best.per_time);
    report.value = best.value();
    report.policy = make_table(InformationKind::Processed, T, best.rules);
    return report;
  }

 private:
  // mass[x](theta, s) = P(theta, S_t = s, X^t coded as x).
  SearchResult search(int t, const std::vector<Eigen::MatrixXd>& mass) {
    const int S = spec_.n_states, A = spec_.n_actions, P = spec_.n_params, T = spec_.horizon;
    const int Z = proc_.n_symbols, X = know_.n_symbols;
    const auto& pz = proc_.per_step[t];
    const int nx = static_cast<int>(mass.size());

    // Reachable (s, z) pairs, ordered by state then symbol.
    std::vector<std::pair<int, int>> info;
    std::vector<int> slot(static_cast<std::size_t>(S) * Z, -1);
    for (int s = 0; s < S; ++s)
      for (int z = 0; z < Z; ++z) {
        bool reachable = false;
        for (int x = 0; x < nx && !reachable; ++x) reachable = pz(z, x) > 0.0 && mass[x].col(s).sum() > 0.0;
        if (!reachable) continue;
        slot[s * Z + z] = static_cast<int>(info.size());
        info.push_back({s, z});
      }

    // q(i, a): immediate expected reward collected at info state i under action a.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(info.size(), A);
    for (std::size_t i = 0; i < info.size(); ++i) {
      const auto [s, z] = info[i];
      for (int x = 0; x < nx; ++x) {
        const double pzx = pz(z, x);
        if (pzx <= 0.0) continue;
        for (int th = 0; th < P; ++th)
          for (int a = 0; a < A; ++a) q(i, a) += mass[x](th, s) * pzx * model_.expected_reward(s, a, th, P);
      }
    }

    if (t + 1 == T) {
      SearchResult out{Eigen::VectorXd::Zero(T), {}};
      for (std::size_t i = 0; i < info.size(); ++i) {
        int best_a = 0;
        for (int a = 1; a < A; ++a)
          if (improves(q(i, a), q(i, best_a))) best_a = a;
        out.per_time(t) += q(i, best_a);
        out.rules.push_back({t, info[i].first, {info[i].second}, best_a});
      }
      return out;
    }

    const long long combos = checked_pow(A, static_cast<int>(info.size()), static_cast<long long>(budget_));
    budget_check(visited_ + static_cast<std::size_t>(combos), budget_, "processing rule enumeration");
    SearchResult best;
    bool have = false;
    std::vector<int> choice(info.size(), 0);
    for (long long c = 0; c < combos; ++c) {
      long long rest = c;
      for (std::size_t i = info.size(); i-- > 0;) {
        choice[i] = static_cast<int>(rest % A);
        rest /= A;
      }
      budget_check(++visited_, budget_, "processing rule enumeration");
      SearchResult cand{Eigen::VectorXd::Zero(T), {}};
      for (std::size_t i = 0; i < info.size(); ++i) {
        cand.per_time(t) += q(i, choice[i]);
        cand.rules.push_back({t, info[i].first, {info[i].second}, choice[i]});
      }
      std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(nx) * X, Eigen::MatrixXd::Zero(P, S));
      for (int x = 0; x < nx; ++x)
        for (int s = 0; s < S; ++s)
          for (int z = 0; z < Z; ++z) {
            const double pzx = pz(z, x);
            if (pzx <= 0.0 || slot[s * Z + z] < 0) continue;
            const int a = choice[slot[s * Z + z]];
            for (int th = 0; th < P; ++th) {
              const double w = mass[x](th, s) * pzx;
              if (w <= 0.0) continue;
              const int col = spec_.trans_column(s, a, th);
              for (int x2 = 0; x2 < X; ++x2) {
                const double px = kx_(x2, col);
                if (px > 0.0) next[x * X + x2].row(th) += w * px * spec_.trans.col(col).transpose();
              }
            }
          }
      cand.absorb(search(t + 1, next));
      if (!have || improves(cand.value(), best.value())) {
        best = std::move(cand);
        have = true;
      }
    }
    return best;
  }

  const EnvironmentSpec& spec_;
  RewardModel model_;
  const KnowledgeKernelSpec& know_;
  const ProcessingKernelSpec& proc_;
  Eigen::MatrixXd kx_;
  std::size_t budget_;
  std::size_t visited_ = 0;
};

}  // namespace

ValueReport bcr_with_knowledge(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know, std::size_t budget) {
  require_valid(spec);
  require(validate(spec, know));
  return KnowledgeSearch(spec, know, budget).run();
}

ValueReport bcr_with_processing(const EnvironmentSpec& spec, const KnowledgeKernelSpec& know,
                                const ProcessingKernelSpec& proc, std::size_t budget) {
  require_valid(spec);
  require(validate(spec, know, proc));
  return ProcessingSearch(spec, know, proc, budget).run();
}

// ---------------------------------------------------------------------------

ValueReport evaluate_policy(const EnvironmentSpec& spec, const GeneratingPolicy& policy, std::size_t budget) {
  const auto tree = enumerate_history_tree(spec, policy, budget);
  const int P = spec.n_params, A = spec.n_actions, T = spec.horizon;
  const auto* table = std::get_if<PolicyTable>(&policy);
  std::vector<double> per_time(T, 0.0);
  for (int t = 0; t < T; ++t)
    for (const auto& node : tree.layers[t].nodes)
      for (int th = 0; th < P; ++th) {
        const double w = spec.prior(th) * node.per_theta_probability(th);
        if (w == 0.0) continue;
        if (node.action_distribution.size() > 0) {
          for (int a = 0; a < A; ++a)
            if (node.action_distribution(a) > 0.0)
              per_time[t] += w * node.action_distribution(a) * tree.model.expected_reward(node.state, a, th, P);
        } else {
          const int a = table->action(t, node.state, {th});
          per_time[t] += w * tree.model.expected_reward(node.state, a, th, P);
        }
      }
  ValueReport report;
  report.value = sum_of(per_time);
  report.per_time_values = std::move(per_time);
  if (table) report.policy = *table;
  return report;
}

ThompsonPolicy thompson_policy(const PsiStar& psi) { return ThompsonPolicy(psi); }

ValueReport thompson_value(const EnvironmentSpec& spec, std::size_t budget) {
  const auto known = optimal_policy_known_theta(spec);
  return evaluate_policy(spec, thompson_policy(known.psi), budget);
}

double minimum_bayesian_regret(const EnvironmentSpec& spec, std::size_t budget) {
  return optimal_policy_known_theta(spec).report.value - bcr_exact(spec, budget).value;
}

MonteCarloEstimate simulate_thompson(const EnvironmentSpec& spec, const PsiStar& psi, std::int64_t episodes,
                                     std::uint64_t seed) {
  require_valid(spec);
  const auto model = tabulate_rewards(spec);
  const int P = spec.n_params, T = spec.horizon;
  RandomSource rng(seed, 0);
  Eigen::VectorXd w(P);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t e = 0; e < episodes; ++e) {
    const int theta = sample(spec.prior, rng);
    int s = sample(spec.initial_state.col(theta), rng);
    int prev_s = -1, prev_a = -1;
    w = spec.prior;
    double total = 0.0;
    for (int t = 0; t < T; ++t) {
      // w holds prior(theta) P(recorded steps | theta); the transition into
      // the current state is not part of the record yet.
      const int guess = sample(w / w.sum(), rng);
      const int a = psi(t, s, guess);
      const int y = sample(spec.outcome_row(s, theta), rng);
      total += spec.reward(y, a);
      const int r = model.reward_index(y, a);
      for (int th = 0; th < P; ++th) {
        const double arrival =
            prev_s < 0 ? spec.initial_state(s, th) : spec.trans(s, spec.trans_column(prev_s, prev_a, th));
        w(th) *= arrival * model.likelihood(r, spec.trans_column(s, a, th));
      }
      if (t + 1 < T) {
        prev_s = s;
        prev_a = a;
        s = sample(spec.trans_row(s, a, theta), rng);
      }
    }
    const double delta = total - mean;
    mean += delta / static_cast<double>(e + 1);
    m2 += delta * (total - mean);
  }
  MonteCarloEstimate est;
  est.episodes = episodes;
  est.mean = mean;
  if (episodes > 1) est.standard_error = std::sqrt(m2 / static_cast<double>(episodes - 1) / static_cast<double>(episodes));
  return est;
}

}  // namespace mbr
