#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mbr/error.hpp"

namespace mbr {

/// What a decision rule is allowed to look at besides the current state.
enum class InformationKind { History, Theta, Knowledge, Processed };

const char* to_string(InformationKind kind);

/// Deterministic decision rule per step, keyed by (state, information key).
///
/// The information key is an integer encoding of whatever the rule observes:
/// the record list for history rules, {theta} for known-parameter rules, the
/// knowledge sequence or the processed symbol otherwise. Steps are 0-based.
class PolicyTable {
 public:
  using Key = std::vector<int>;

  PolicyTable() = default;
  PolicyTable(InformationKind kind, int horizon) : kind_(kind), rules_(horizon) {}

  InformationKind information_kind() const { return kind_; }
  int horizon() const { return static_cast<int>(rules_.size()); }

  void set(int t, int state, Key info, int action);
  std::optional<int> find(int t, int state, const Key& info) const;
  /// Throws PolicyUndefined when no rule covers (t, state, info).
  int action(int t, int state, const Key& info) const;

  std::size_t size() const;
  const std::map<std::pair<int, Key>, int>& rules(int t) const { return rules_.at(t); }

 private:
  InformationKind kind_ = InformationKind::History;
  std::vector<std::map<std::pair<int, Key>, int>> rules_;
};

/// Dense known-parameter rule psi*_t(s, theta), the output of per-theta
/// backward induction.
struct PsiStar {
  int horizon = 0;
  int n_states = 0;
  int n_params = 0;
  std::vector<int> actions;  ///< index (t * n_states + s) * n_params + theta

  int operator()(int t, int s, int theta) const { return actions[(t * n_states + s) * n_params + theta]; }
  PolicyTable to_table() const;
};

/// gamma*(theta) when psi* ignores both the step and the state, otherwise empty.
std::optional<std::vector<int>> optimal_action_map(const PsiStar& psi);

}  // namespace mbr
