#include "mbr/policy.hpp"

#include <string>

namespace mbr {

const char* to_string(InformationKind kind) {
  switch (kind) {
    case InformationKind::History: return "history";
    case InformationKind::Theta: return "theta";
    case InformationKind::Knowledge: return "knowledge";
    case InformationKind::Processed: return "processed";
  }
  return "unknown";
}

void PolicyTable::set(int t, int state, Key info, int action) {
  if (t < 0 || t >= horizon()) throw Error(ErrorCode::BadIndex, "policy step out of range");
  rules_[t][{state, std::move(info)}] = action;
}

std::optional<int> PolicyTable::find(int t, int state, const Key& info) const {
  if (t < 0 || t >= horizon()) return std::nullopt;
  const auto& step = rules_[t];
  auto it = step.find({state, info});
  if (it == step.end()) return std::nullopt;
  return it->second;
}

int PolicyTable::action(int t, int state, const Key& info) const {
  if (auto a = find(t, state, info)) return *a;
  throw Error(ErrorCode::PolicyUndefined,
              "no action for step " + std::to_string(t) + ", state " + std::to_string(state));
}

std::size_t PolicyTable::size() const {
  std::size_t n = 0;
  for (const auto& step : rules_) n += step.size();
  return n;
}

PolicyTable PsiStar::to_table() const {
  PolicyTable table(InformationKind::Theta, horizon);
  for (int t = 0; t < horizon; ++t)
    for (int s = 0; s < n_states; ++s)
      for (int th = 0; th < n_params; ++th) table.set(t, s, {th}, (*this)(t, s, th));
  return table;
}

std::optional<std::vector<int>> optimal_action_map(const PsiStar& psi) {
  std::vector<int> gamma(psi.n_params);
  for (int th = 0; th < psi.n_params; ++th) {
    gamma[th] = psi(0, 0, th);
    for (int t = 0; t < psi.horizon; ++t)
      for (int s = 0; s < psi.n_states; ++s)
        if (psi(t, s, th) != gamma[th]) return std::nullopt;
  }
  return gamma;
}

}  // namespace mbr
