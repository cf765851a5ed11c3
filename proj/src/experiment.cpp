#include "mbr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mbr {

namespace {

constexpr double kRewardGrid[] = {0.0, 0.25, 0.5, 0.75, 1.0};

int draw_size(RandomSource& rng, int cap) { return 1 + rng.uniform_int(std::max(1, cap)); }

Eigen::VectorXd positive_column(RandomSource& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 - rng.uniform01();
  return normalize(v).weights();
}

double grid_reward(RandomSource& rng) { return kRewardGrid[rng.uniform_int(5)]; }

std::vector<int> permutation(RandomSource& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_int(i + 1)]);
  return p;
}

Instance random_partial_feedback(RandomSource& rng, const InstanceCaps& caps, std::string id) {
  const int A = draw_size(rng, caps.actions);
  const int V = draw_size(rng, caps.outcomes);
  const int P = draw_size(rng, caps.params);
  const int T = draw_size(rng, caps.horizon);
  const bool full = rng.uniform_int(3) == 0;
  const bool injective = rng.uniform_int(3) != 0 && V <= 5;

  Eigen::VectorXd pref(V);
  if (injective) {
    const auto order = permutation(rng, 5);
    for (int v = 0; v < V; ++v) pref(v) = kRewardGrid[order[v]];
  } else {
    for (int v = 0; v < V; ++v) pref(v) = grid_reward(rng);
  }

  int Y = 1;
  for (int a = 0; a < A; ++a) Y *= V;
  const Eigen::VectorXd prior = positive_column(rng, P);
  Eigen::MatrixXd outcome = Eigen::MatrixXd::Zero(Y, P);
  if (full) {
    // A latent value l in Y' shows up in coordinate a as perm_a(l), so any
    // one coordinate determines the whole vector.
    std::vector<std::vector<int>> perms;
    for (int a = 0; a < A; ++a) perms.push_back(permutation(rng, V));
    for (int th = 0; th < P; ++th) {
      const Eigen::VectorXd latent = positive_column(rng, V);
      for (int l = 0; l < V; ++l) {
        int y = 0, weight = 1;
        for (int a = 0; a < A; ++a, weight *= V) y += perms[a][l] * weight;
        outcome(y, th) += latent(l);
      }
    }
  } else {
    for (int th = 0; th < P; ++th) outcome.col(th) = positive_column(rng, Y);
  }

  Instance inst;
  inst.id = std::move(id);
  inst.feedback = make_partial_feedback(1, A, V, prior, Eigen::MatrixXd::Ones(1, P), outcome, pref, full, T);
  inst.spec = inst.feedback->base;
  return inst;
}

}  // namespace

Suite parse_suite(const std::string& name) {
  if (name == "bounds") return Suite::Bounds;
  if (name == "dpi") return Suite::Dpi;
  if (name == "soundness") return Suite::Soundness;
  if (name == "sweep-T") return Suite::SweepT;
  throw Error(ErrorCode::InvalidArgument, "unknown suite '" + name + "' (bounds, dpi, soundness, sweep-T)");
}

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::Bounds: return "bounds";
    case Suite::Dpi: return "dpi";
    case Suite::Soundness: return "soundness";
    case Suite::SweepT: return "sweep-T";
  }
  return "?";
}

InstanceCaps parse_caps(const std::string& text) {
  InstanceCaps caps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "caps entry '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "caps entry '" + item + "' has a non-integer value");
    }
    if (value < 1 || value > 8) throw Error(ErrorCode::InvalidArgument, "caps values must lie in [1, 8]");
    if (key == "s") caps.states = value;
    else if (key == "a") caps.actions = value;
    else if (key == "y") caps.outcomes = value;
    else if (key == "theta") caps.params = value;
    else if (key == "T") caps.horizon = value;
    else throw Error(ErrorCode::InvalidArgument, "unknown caps key '" + key + "' (s, a, y, theta, T)");
  }
  return caps;
}

Instance generate_random_instance(RandomSource& rng, const InstanceCaps& caps, InstanceClass cls, std::string id) {
  if (cls == InstanceClass::PartialFeedback) return random_partial_feedback(rng, caps, std::move(id));
  const bool fixed = cls == InstanceClass::Static;
  const int S = draw_size(rng, caps.states);
  const int A = draw_size(rng, caps.actions);
  const int Y = draw_size(rng, caps.outcomes);
  const int P = draw_size(rng, caps.params);
  const int T = draw_size(rng, caps.horizon);

  Instance inst;
  inst.id = std::move(id);
  EnvironmentSpec& spec = inst.spec;
  spec = EnvironmentSpec::zeros(S, A, Y, P, T);
  spec.prior = positive_column(rng, P);
  for (int th = 0; th < P; ++th) spec.initial_state.col(th) = positive_column(rng, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int th = 0; th < P; ++th) {
        if (fixed) spec.trans_row(s, a, th)(s) = 1.0;
        else spec.trans_row(s, a, th) = positive_column(rng, S);
      }
  for (int s = 0; s < S; ++s)
    for (int th = 0; th < P; ++th) spec.outcome_row(s, th) = positive_column(rng, Y);
  for (int y = 0; y < Y; ++y)
    for (int a = 0; a < A; ++a) spec.reward(y, a) = grid_reward(rng);
  require_valid(spec);
  return inst;
}

Instance generate_random_instance(std::uint64_t seed, std::uint64_t index, const InstanceCaps& caps) {
  RandomSource rng(seed, index);
  const auto cls = static_cast<InstanceClass>(index % 3);
  return generate_random_instance(rng, caps, cls, "random-" + std::to_string(seed) + "-" + std::to_string(index));
}

KnowledgeKernelSpec random_knowledge(RandomSource& rng, const EnvironmentSpec& spec, int max_symbols) {
  KnowledgeKernelSpec k;
  k.n_symbols = draw_size(rng, max_symbols);
  auto column = [&] {
    if (rng.uniform_int(4) == 0) return Eigen::VectorXd(Eigen::VectorXd::Unit(k.n_symbols, rng.uniform_int(k.n_symbols)));
    return positive_column(rng, k.n_symbols);
  };
  k.initial.resize(k.n_symbols, spec.n_params);
  for (int th = 0; th < spec.n_params; ++th) k.initial.col(th) = column();
  const int cols = spec.n_states * spec.n_actions * spec.n_outcomes * spec.n_params;
  k.step.resize(k.n_symbols, cols);
  for (int c = 0; c < cols; ++c) k.step.col(c) = column();
  return k;
}

ProcessingKernelSpec random_processing(RandomSource& rng, const EnvironmentSpec& spec,
                                       const KnowledgeKernelSpec& know, int max_symbols) {
  ProcessingKernelSpec p;
  p.n_symbols = draw_size(rng, max_symbols);
  int cols = 1;
  for (int t = 0; t < spec.horizon; ++t) {
    cols *= know.n_symbols;
    Eigen::MatrixXd m(p.n_symbols, cols);
    for (int c = 0; c < cols; ++c) {
      if (rng.uniform_int(4) == 0) m.col(c) = Eigen::VectorXd::Unit(p.n_symbols, rng.uniform_int(p.n_symbols));
      else m.col(c) = positive_column(rng, p.n_symbols);
    }
    p.per_step.push_back(std::move(m));
  }
  return p;
}

// ---------------------------------------------------------------------------

std::vector<BoundReport> run_soundness_suite(std::uint64_t seed, int count, const InstanceCaps& caps,
                                             std::size_t budget, SuiteSummary& summary) {
  summary.name = "soundness";
  std::vector<BoundReport> reports;
  for (int i = 0; i < count; ++i) {
    Instance inst = generate_random_instance(seed, static_cast<std::uint64_t>(i), caps);
    inst.config.budget = budget;
    BoundReport r = evaluate_all(inst.id, inst.spec, inst.feedback_ptr(), inst.config);
    ++summary.cases;
    auto fails = r.failures();
    if (r.mbr_exact < -1e-10) fails.push_back(inst.id + ": minimum Bayesian regret is negative");
    if (!fails.empty()) {
      ++summary.failed;
      summary.failures.insert(summary.failures.end(), fails.begin(), fails.end());
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<DpiCase> run_dpi_suite(std::uint64_t seed, int count, std::size_t budget, SuiteSummary& summary) {
  summary.name = "dpi";
  const InstanceCaps caps{2, 2, 2, 3, 3};
  std::vector<DpiCase> out;
  for (int i = 0; i < count; ++i) {
    RandomSource rng(seed, 1'000'000 + static_cast<std::uint64_t>(i));
    const auto cls = i % 2 == 0 ? InstanceClass::General : InstanceClass::Static;
    const Instance inst = generate_random_instance(rng, caps, cls, "dpi-" + std::to_string(seed) + "-" + std::to_string(i));
    const KnowledgeKernelSpec know = random_knowledge(rng, inst.spec, 3);
    const ProcessingKernelSpec proc = random_processing(rng, inst.spec, know, 3);
    DpiCase c;
    c.instance_id = inst.id;
    c.knowledge_symbols = know.n_symbols;
    c.processing_symbols = proc.n_symbols;
    c.knowledge_value = bcr_with_knowledge(inst.spec, know, budget).value;
    c.processing_value = bcr_with_processing(inst.spec, know, proc, budget).value;
    c.holds = c.knowledge_value >= c.processing_value - kBoundTolerance;
    ++summary.cases;
    if (!c.holds) {
      ++summary.failed;
      summary.failures.push_back(inst.id + ": processed knowledge value " + format_number(c.processing_value) +
                                 " exceeds " + format_number(c.knowledge_value));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SweepPoint> run_sweep_suite(std::uint64_t seed, int families, std::size_t budget,
                                        SuiteSummary& summary) {
  summary.name = "sweep-T";
  const InstanceCaps caps{1, 3, 2, 3, 1};
  std::vector<SweepPoint> out;
  for (int f = 0; f < families; ++f) {
    const std::string family = "sweep-" + std::to_string(seed) + "-" + std::to_string(f);
    double previous = 0.0;
    for (int T = 1; T <= 4; ++T) {
      // Same draws for every horizon, so only T changes across the family.
      RandomSource rng(seed, 2'000'000 + static_cast<std::uint64_t>(f));
      Instance inst = generate_random_instance(rng, caps, InstanceClass::PartialFeedback, family);
      inst.feedback->base.horizon = T;
      inst.spec = inst.feedback->base;
      inst.config.budget = budget;
      const BoundReport r = evaluate_all(family + "-T" + std::to_string(T), inst.spec, inst.feedback_ptr(), inst.config);
      SweepPoint p;
      p.family = family;
      p.horizon = T;
      p.bounds_hold = r.all_hold();
      if (r.entropy_dominance) {
        p.lhs = r.entropy_dominance->lhs;
        p.rhs = r.entropy_dominance->rhs;
        p.below_entropy = r.entropy_dominance->holds;
      }
      p.monotone = T == 1 || p.lhs >= previous - kBoundTolerance;
      previous = p.lhs;
      ++summary.cases;
      if (!r.entropy_dominance || !p.below_entropy || !p.monotone || !p.bounds_hold) {
        ++summary.failed;
        std::string why = !r.entropy_dominance ? "entropy dominance not evaluated"
                          : !p.below_entropy  ? "information exceeds the optimal-action entropy"
                          : !p.monotone       ? "accumulated information decreased with the horizon"
                                              : "a bound failed";
        summary.failures.push_back(family + " T=" + std::to_string(T) + ": " + why);
      }
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

std::string dpi_csv(const std::vector<DpiCase>& cases) {
  std::string s = "instance_id,knowledge_symbols,processing_symbols,knowledge_value,processing_value,holds\n";
  for (const auto& c : cases)
    s += c.instance_id + "," + std::to_string(c.knowledge_symbols) + "," + std::to_string(c.processing_symbols) + "," +
         format_number(c.knowledge_value) + "," + format_number(c.processing_value) + "," +
         (c.holds ? "true" : "false") + "\n";
  return s;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string s = "family,horizon,information_sum,optimal_action_entropy,below_entropy,monotone,bounds_hold\n";
  for (const auto& p : points)
    s += p.family + "," + std::to_string(p.horizon) + "," + format_number(p.lhs) + "," + format_number(p.rhs) + "," +
         (p.below_entropy ? "true" : "false") + "," + (p.monotone ? "true" : "false") + "," +
         (p.bounds_hold ? "true" : "false") + "\n";
  return s;
}

std::string summary_json(const RunConfig& config, const RunResult& result) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["seed"] = config.seed;
  doc["node_budget"] = config.node_budget;
  ordered_json suites = ordered_json::array();
  for (const auto& s : result.summaries) {
    ordered_json o;
    o["name"] = s.name;
    o["cases"] = s.cases;
    o["passed"] = s.cases - s.failed;
    o["failed"] = s.failed;
    o["failures"] = s.failures;
    suites.push_back(std::move(o));
  }
  doc["suites"] = std::move(suites);
  doc["exit_status"] = result.exit_status;
  return doc.dump(2) + "\n";
}

std::string csv_of(const std::vector<BoundReport>& reports) {
  std::string s = report_csv_header();
  for (const auto& r : reports) s += report_csv_rows(r);
  return s;
}

void log_summary(std::ostream& log, const SuiteSummary& s) {
  log << s.name << ": " << s.cases - s.failed << "/" << s.cases << " passed\n";
  for (const auto& f : s.failures) log << "  FAIL " << f << "\n";
}

}  // namespace

RunResult run(const RunConfig& config, std::ostream& log) {
  RunResult result;
  namespace fs = std::filesystem;
  const bool json = config.emit.count(Emit::Json) > 0;
  const bool csv = config.emit.count(Emit::Csv) > 0;
  const fs::path out(config.output_dir);

  std::vector<Instance> instances;
  if (config.suites.count(Suite::Bounds)) {
    try {
      for (const auto& path : config.instance_paths) {
        instances.push_back(load_instance(path));
        instances.back().config.budget = config.node_budget;
      }
    } catch (const Error& e) {
      log << e.what() << "\n";
      result.exit_status = 2;
      return result;
    }
    if (instances.empty()) {
      log << "bounds suite: no instance files given\n";
      result.exit_status = 2;
      return result;
    }
  }

  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    log << "cannot create output directory: " << e.what() << "\n";
    result.exit_status = 2;
    return result;
  }

  try {
    if (config.suites.count(Suite::Bounds)) {
      SuiteSummary s;
      s.name = "bounds";
      std::vector<BoundReport> reports;
      for (const auto& inst : instances) {
        BoundReport r = evaluate_all(inst.id, inst.spec, inst.feedback_ptr(), inst.config);
        ++s.cases;
        const auto fails = r.failures();
        if (!fails.empty()) {
          ++s.failed;
          s.failures.insert(s.failures.end(), fails.begin(), fails.end());
        }
        log << inst.id << ": mbr " << format_number(r.mbr_exact) << ", thompson regret "
            << format_number(r.thompson_regret_exact) << "\n";
        if (json) write_text_file((out / (inst.id + ".json")).string(), report_to_json(r));
        reports.push_back(std::move(r));
      }
      if (csv) write_text_file((out / "bounds.csv").string(), csv_of(reports));
      log_summary(log, s);
      result.summaries.push_back(std::move(s));
      result.reports.insert(result.reports.end(), reports.begin(), reports.end());
    }
    if (config.suites.count(Suite::Soundness)) {
      SuiteSummary s;
      auto reports = run_soundness_suite(config.seed, config.soundness_count, config.caps, config.node_budget, s);
      if (json) write_text_file((out / "soundness.json").string(), reports_to_json("soundness", reports));
      if (csv) write_text_file((out / "soundness.csv").string(), csv_of(reports));
      log_summary(log, s);
      result.summaries.push_back(std::move(s));
      result.reports.insert(result.reports.end(), reports.begin(), reports.end());
    }
    if (config.suites.count(Suite::Dpi)) {
      SuiteSummary s;
      result.dpi = run_dpi_suite(config.seed, config.dpi_count, config.node_budget, s);
      if (csv) write_text_file((out / "dpi.csv").string(), dpi_csv(result.dpi));
      log_summary(log, s);
      result.summaries.push_back(std::move(s));
    }
    if (config.suites.count(Suite::SweepT)) {
      SuiteSummary s;
      result.sweep = run_sweep_suite(config.seed, config.sweep_families, config.node_budget, s);
      if (csv) write_text_file((out / "sweep_t.csv").string(), sweep_csv(result.sweep));
      log_summary(log, s);
      result.summaries.push_back(std::move(s));
    }
  } catch (const Error& e) {
    log << e.what() << "\n";
    if (e.code() == ErrorCode::BudgetExceeded)
      log << "lower the horizon or the caps, or raise --budget / MBR_NODE_BUDGET\n";
    result.exit_status = 2;
    return result;
  }

  for (const auto& s : result.summaries)
    if (s.failed > 0) result.exit_status = 1;
  if (json) write_text_file((out / "summary.json").string(), summary_json(config, result));
  return result;
}

}  // namespace mbr
