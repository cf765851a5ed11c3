#include "mbr/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbr {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Walks a parsed document keeping the path for error messages. nlohmann does
// not keep source positions, so the line is that of the first occurrence of
// the offending key in the text.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    const std::string key = last_key(path);
    std::string where = source_;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string::npos) where += ":" + std::to_string(line_of_offset(text_, pos));
    }
    throw Error(ErrorCode::ParseError, where + ": " + (path.empty() ? "document" : path) + ": " + message);
  }

  void keys(const json& obj, const std::string& path, const std::set<std::string>& required,
            const std::set<std::string>& optional) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (!required.count(k) && !optional.count(k)) fail(join(path, k), "unknown key");
    for (const auto& k : required)
      if (!obj.contains(k)) fail(path, "missing key \"" + k + "\"");
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& path, int lo) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > 1'000'000) fail(path, "integer out of range");
    return static_cast<int>(x);
  }

  bool boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  const json& array(const json& v, const std::string& path, std::optional<std::size_t> size) const {
    if (!v.is_array()) fail(path, "expected an array");
    if (v.empty()) fail(path, "array must not be empty");
    if (size && v.size() != *size)
      fail(path, "expected " + std::to_string(*size) + " entries, found " + std::to_string(v.size()));
    return v;
  }

  Eigen::VectorXd vector(const json& v, const std::string& path, std::optional<std::size_t> size) const {
    array(v, path, size);
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = number(v[i], index(path, i));
    return out;
  }

  /// rows x cols from a nested array [row][col].
  Eigen::MatrixXd matrix(const json& v, const std::string& path, std::optional<std::size_t> rows,
                         std::optional<std::size_t> cols) const {
    array(v, path, rows);
    const std::size_t n = v.size();
    if (!v[0].is_array()) fail(index(path, 0), "expected an array");
    const std::size_t m = cols ? *cols : v[0].size();
    Eigen::MatrixXd out(n, m);
    for (std::size_t i = 0; i < n; ++i) out.row(i) = vector(v[i], index(path, i), m).transpose();
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

 private:
  static std::string last_key(const std::string& path) {
    std::string p = path;
    const auto br = p.find('[');
    if (br != std::string::npos) p = p.substr(0, br);
    const auto dot = p.rfind('.');
    return dot == std::string::npos ? p : p.substr(dot + 1);
  }

  const std::string& text_;
  std::string source_;
};

void require_valid_reported(const EnvironmentSpec& spec, const std::string& source) {
  const auto v = validate(spec);
  if (v.empty()) return;
  std::string msg = source + ": " + std::to_string(v.size()) + " violation(s)";
  for (const auto& x : v) msg += "\n  " + x.location + ": " + x.message;
  throw Error(ErrorCode::ValidationError, msg);
}

EnvironmentSpec parse_general(const Reader& rd, const json& doc, int horizon, const Eigen::VectorXd& prior) {
  const int P = static_cast<int>(prior.size());
  const json& trans = rd.array(doc["trans"], "trans", std::nullopt);
  const int S = static_cast<int>(trans.size());
  const json& t0 = rd.array(trans[0], "trans[0]", std::nullopt);
  const int A = static_cast<int>(t0.size());
  const json& reward = rd.array(doc["reward"], "reward", std::nullopt);
  const int Y = static_cast<int>(reward.size());

  EnvironmentSpec spec = EnvironmentSpec::zeros(S, A, Y, P, horizon);
  spec.prior = prior;
  spec.reward = rd.matrix(reward, "reward", Y, A);
  spec.initial_state = rd.matrix(doc["initial_state"], "initial_state", P, S).transpose();
  for (int s = 0; s < S; ++s) {
    const std::string ps = Reader::index("trans", s);
    const json& row = rd.array(trans[s], ps, A);
    for (int a = 0; a < A; ++a) {
      const std::string pa = Reader::index(ps, a);
      const Eigen::MatrixXd m = rd.matrix(row[a], pa, P, S);
      for (int th = 0; th < P; ++th) spec.trans_row(s, a, th) = m.row(th).transpose();
    }
  }
  const json& out = rd.array(doc["outcome"], "outcome", S);
  for (int s = 0; s < S; ++s) {
    const Eigen::MatrixXd m = rd.matrix(out[s], Reader::index("outcome", s), P, Y);
    for (int th = 0; th < P; ++th) spec.outcome_row(s, th) = m.row(th).transpose();
  }
  return spec;
}

PartialFeedbackSpec parse_feedback(const Reader& rd, const json& pf, int horizon, const Eigen::VectorXd& prior,
                                   const json* initial) {
  const std::string p = "partial_feedback";
  rd.keys(pf, p, {"n_actions", "n_values", "preference", "outcome"}, {"full_reveal", "n_states"});
  const int P = static_cast<int>(prior.size());
  const int A = rd.integer(pf["n_actions"], Reader::join(p, "n_actions"), 1);
  const int V = rd.integer(pf["n_values"], Reader::join(p, "n_values"), 1);
  const int S = pf.contains("n_states") ? rd.integer(pf["n_states"], Reader::join(p, "n_states"), 1) : 1;
  const bool full = pf.contains("full_reveal") && rd.boolean(pf["full_reveal"], Reader::join(p, "full_reveal"));
  double y = 1.0;
  for (int a = 0; a < A; ++a) y *= V;
  if (y > 4096) rd.fail(p, "outcome space |Y'|^|A| is too large");
  const int Y = static_cast<int>(y);
  const Eigen::VectorXd pref = rd.vector(pf["preference"], Reader::join(p, "preference"), V);
  const Eigen::MatrixXd outcome = rd.matrix(pf["outcome"], Reader::join(p, "outcome"), P, Y).transpose();
  Eigen::MatrixXd init = Eigen::MatrixXd::Ones(1, P);
  if (initial) init = rd.matrix(*initial, "initial_state", P, S).transpose();
  else if (S != 1) rd.fail(p, "initial_state is required when n_states > 1");
  return make_partial_feedback(S, A, V, prior, init, outcome, pref, full, horizon);
}

BoundConfig parse_config(const Reader& rd, const json& c, int n_cells, int n_outcomes, int n_values) {
  BoundConfig cfg;
  rd.keys(c, "bound_config", {}, {"metrics", "lipschitz", "sigma2"});
  auto metric = [&](const json& m, const std::string& path, int n) {
    try {
      return FiniteMetric(rd.matrix(m, path, n, n));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      rd.fail(path, e.what());
    }
  };
  if (c.contains("metrics")) {
    const json& m = c["metrics"];
    rd.keys(m, "bound_config.metrics", {}, {"outcome_state", "outcome", "value"});
    if (m.contains("outcome_state"))
      cfg.outcome_state_metric = metric(m["outcome_state"], "bound_config.metrics.outcome_state", n_cells);
    if (m.contains("outcome")) cfg.outcome_metric = metric(m["outcome"], "bound_config.metrics.outcome", n_outcomes);
    if (m.contains("value")) {
      if (n_values == 0) rd.fail("bound_config.metrics.value", "only partial-feedback instances have a value metric");
      cfg.value_metric = metric(m["value"], "bound_config.metrics.value", n_values);
    }
  }
  if (c.contains("lipschitz")) {
    const double l = rd.number(c["lipschitz"], "bound_config.lipschitz");
    if (!(l >= 0.0)) rd.fail("bound_config.lipschitz", "must be non-negative");
    cfg.lipschitz = l;
  }
  if (c.contains("sigma2")) {
    const Eigen::VectorXd s = rd.vector(c["sigma2"], "bound_config.sigma2", std::nullopt);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (!(s(i) >= 0.0)) rd.fail("bound_config.sigma2", "entries must be non-negative");
      cfg.sigma2.push_back(s(i));
    }
  }
  return cfg;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

Instance parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  Reader rd(text, source);
  if (!doc.is_object()) rd.fail("", "expected an object at top level");

  Instance inst;
  const bool is_pf = doc.contains("partial_feedback");
  const bool is_bandit = doc.contains("bernoulli_bandit");
  if (is_pf && is_bandit) rd.fail("bernoulli_bandit", "conflicts with partial_feedback");
  if (is_bandit)
    rd.keys(doc, "", {"id", "horizon", "prior", "bernoulli_bandit"}, {"bound_config"});
  else if (is_pf)
    rd.keys(doc, "", {"id", "horizon", "prior", "partial_feedback"}, {"initial_state", "bound_config"});
  else
    rd.keys(doc, "", {"id", "horizon", "prior", "initial_state", "trans", "outcome", "reward"}, {"bound_config"});

  if (!doc["id"].is_string() || doc["id"].get<std::string>().empty()) rd.fail("id", "expected a non-empty string");
  inst.id = doc["id"].get<std::string>();
  const int horizon = rd.integer(doc["horizon"], "horizon", 1);
  const Eigen::VectorXd prior = rd.vector(doc["prior"], "prior", std::nullopt);

  if (is_bandit) {
    const json& b = doc["bernoulli_bandit"];
    rd.keys(b, "bernoulli_bandit", {"means"}, {});
    const Eigen::MatrixXd means = rd.matrix(b["means"], "bernoulli_bandit.means", std::nullopt, prior.size());
    try {
      inst.feedback = bernoulli_bandit(means, FiniteDistribution(prior), horizon);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      throw Error(ErrorCode::ValidationError, source + ": " + e.what());
    }
    inst.spec = inst.feedback->base;
  } else if (is_pf) {
    const json* init = doc.contains("initial_state") ? &doc["initial_state"] : nullptr;
    try {
      inst.feedback = parse_feedback(rd, doc["partial_feedback"], horizon, prior, init);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      throw Error(ErrorCode::ValidationError, source + ": " + e.what());
    }
    inst.spec = inst.feedback->base;
  } else {
    inst.spec = parse_general(rd, doc, horizon, prior);
    require_valid_reported(inst.spec, source);
  }

  if (doc.contains("bound_config")) {
    const int n_values = inst.feedback ? inst.feedback->n_values : 0;
    inst.config = parse_config(rd, doc["bound_config"], inst.spec.n_outcomes * inst.spec.n_states,
                               inst.spec.n_outcomes, n_values);
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

std::string instance_to_json(const Instance& instance) {
  const EnvironmentSpec& s = instance.spec;
  ordered_json doc;
  doc["id"] = instance.id;
  doc["horizon"] = s.horizon;
  doc["prior"] = vector_json(s.prior);
  if (instance.feedback) {
    const auto& pf = *instance.feedback;
    if (s.n_states > 1) doc["initial_state"] = matrix_json(s.initial_state.transpose());
    ordered_json f;
    f["n_actions"] = s.n_actions;
    f["n_values"] = pf.n_values;
    if (s.n_states > 1) f["n_states"] = s.n_states;
    f["preference"] = vector_json(pf.preference);
    f["full_reveal"] = pf.full_reveal;
    Eigen::MatrixXd out(s.n_params, s.n_outcomes);
    for (int th = 0; th < s.n_params; ++th) out.row(th) = s.outcome_row(0, th).transpose();
    f["outcome"] = matrix_json(out);
    doc["partial_feedback"] = std::move(f);
  } else {
    doc["initial_state"] = matrix_json(s.initial_state.transpose());
    ordered_json trans = ordered_json::array();
    for (int st = 0; st < s.n_states; ++st) {
      ordered_json row = ordered_json::array();
      for (int a = 0; a < s.n_actions; ++a) {
        Eigen::MatrixXd m(s.n_params, s.n_states);
        for (int th = 0; th < s.n_params; ++th) m.row(th) = s.trans_row(st, a, th).transpose();
        row.push_back(matrix_json(m));
      }
      trans.push_back(std::move(row));
    }
    doc["trans"] = std::move(trans);
    ordered_json outcome = ordered_json::array();
    for (int st = 0; st < s.n_states; ++st) {
      Eigen::MatrixXd m(s.n_params, s.n_outcomes);
      for (int th = 0; th < s.n_params; ++th) m.row(th) = s.outcome_row(st, th).transpose();
      outcome.push_back(matrix_json(m));
    }
    doc["outcome"] = std::move(outcome);
    doc["reward"] = matrix_json(s.reward);
  }
  const BoundConfig& c = instance.config;
  ordered_json cfg = ordered_json::object();
  ordered_json metrics = ordered_json::object();
  if (c.outcome_state_metric) metrics["outcome_state"] = matrix_json(c.outcome_state_metric->matrix());
  if (c.outcome_metric) metrics["outcome"] = matrix_json(c.outcome_metric->matrix());
  if (c.value_metric) metrics["value"] = matrix_json(c.value_metric->matrix());
  if (!metrics.empty()) cfg["metrics"] = std::move(metrics);
  if (c.lipschitz) cfg["lipschitz"] = *c.lipschitz;
  if (!c.sigma2.empty()) cfg["sigma2"] = c.sigma2;
  if (!cfg.empty()) doc["bound_config"] = std::move(cfg);
  return doc.dump(2) + "\n";
}

namespace {

ordered_json report_json(const BoundReport& r) {
  ordered_json doc;
  doc["instance_id"] = r.instance_id;
  doc["mbr_exact"] = r.mbr_exact;
  doc["thompson_regret"] = r.thompson_regret_exact;
  doc["known_theta_value"] = r.known_theta_value;
  doc["bcr_value"] = r.bcr_value;
  doc["thompson_value"] = r.thompson_value;
  doc["all_hold"] = r.all_hold();
  ordered_json bounds = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json b;
    b["name"] = e.name;
    b["applicable"] = e.applicable;
    if (e.applicable) {
      b["value"] = number_json(e.value.to_double());
      b["slack"] = number_json(e.slack(r.mbr_exact));
      b["holds"] = e.holds;
      b["vacuous"] = e.vacuous;
      if (e.holds_for_thompson) b["holds_for_thompson"] = *e.holds_for_thompson;
    } else {
      b["reason"] = e.reason;
    }
    bounds.push_back(std::move(b));
  }
  doc["bounds"] = std::move(bounds);
  ordered_json rel = ordered_json::array();
  for (const auto& x : r.relations) {
    ordered_json o;
    o["lower"] = x.lower;
    o["upper"] = x.upper;
    o["lower_value"] = number_json(x.lower_value);
    o["upper_value"] = number_json(x.upper_value);
    o["holds"] = x.holds;
    rel.push_back(std::move(o));
  }
  doc["relations"] = std::move(rel);
  if (r.entropy_dominance) {
    const auto& d = *r.entropy_dominance;
    ordered_json o;
    o["per_step"] = d.per_step;
    o["lhs"] = d.lhs;
    o["rhs"] = d.rhs;
    o["holds"] = d.holds;
    doc["entropy_dominance"] = std::move(o);
  }
  return doc;
}

}  // namespace

std::string report_to_json(const BoundReport& r) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc.update(report_json(r));
  return doc.dump(2) + "\n";
}

std::string reports_to_json(const std::string& suite, const std::vector<BoundReport>& reports) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["suite"] = suite;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  doc["reports"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string report_csv_header() { return "instance_id,bound_name,value,mbr_exact,thompson_regret,slack,holds,applicable\n"; }

std::string report_csv_rows(const BoundReport& r) {
  std::string out;
  for (const auto& e : r.entries) {
    out += r.instance_id + "," + e.name + ",";
    if (e.applicable) out += format_number(e.value.to_double());
    out += "," + format_number(r.mbr_exact) + "," + format_number(r.thompson_regret_exact) + ",";
    if (e.applicable) out += format_number(e.slack(r.mbr_exact));
    out += ",";
    if (e.applicable) out += e.holds ? "true" : "false";
    out += std::string(",") + (e.applicable ? "true" : "false") + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path);
}

}  // namespace mbr
