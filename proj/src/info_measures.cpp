#include "mbr/info_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mbr {

ExtendedReal::ExtendedReal(double v) : v_(v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "use ExtendedReal::infinity() for infinite values");
}

ExtendedReal ExtendedReal::infinity() {
  ExtendedReal x;
  x.finite_ = false;
  return x;
}

double ExtendedReal::value() const {
  if (!finite_) throw std::logic_error("value() on an infinite quantity");
  return v_;
}

double ExtendedReal::to_double() const { return finite_ ? v_ : std::numeric_limits<double>::infinity(); }

ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
  if (!a.finite_ || !b.finite_) return ExtendedReal::infinity();
  return ExtendedReal(a.v_ + b.v_);
}

ExtendedReal operator*(double k, const ExtendedReal& a) {
  if (k < 0.0) throw Error(ErrorCode::InvalidArgument, "scaling an extended real by a negative factor");
  if (!a.finite_) return k == 0.0 ? ExtendedReal(0.0) : ExtendedReal::infinity();
  return ExtendedReal(k * a.v_);
}

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  if (!a.finite_ && !b.finite_) return std::partial_ordering::equivalent;
  if (!a.finite_) return std::partial_ordering::greater;
  if (!b.finite_) return std::partial_ordering::less;
  return a.v_ <=> b.v_;
}

ExtendedReal sqrt(const ExtendedReal& x) {
  if (!x.is_finite()) return x;
  return ExtendedReal(std::sqrt(std::max(0.0, x.value())));
}

// ---------------------------------------------------------------------------

FiniteMetric::FiniteMetric(Eigen::MatrixXd dist) : dist_(std::move(dist)) {
  const Eigen::Index n = dist_.rows();
  if (n == 0 || dist_.cols() != n) throw Error(ErrorCode::InvalidMetric, "metric must be a non-empty square matrix");
  if (!dist_.allFinite()) throw Error(ErrorCode::InvalidMetric, "metric entries must be finite");
  constexpr double tol = 1e-12;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(dist_(i, i)) > tol) throw Error(ErrorCode::InvalidMetric, "metric diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (dist_(i, j) < -tol) throw Error(ErrorCode::InvalidMetric, "metric entries must be non-negative");
      if (std::abs(dist_(i, j) - dist_(j, i)) > tol) throw Error(ErrorCode::InvalidMetric, "metric must be symmetric");
      for (Eigen::Index k = 0; k < n; ++k)
        if (dist_(i, k) > dist_(i, j) + dist_(j, k) + tol)
          throw Error(ErrorCode::InvalidMetric, "metric violates the triangle inequality");
    }
  }
}

FiniteMetric FiniteMetric::discrete(int n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(n, n);
  d.diagonal().setZero();
  return FiniteMetric(std::move(d));
}

FiniteMetric FiniteMetric::line(const std::vector<double>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = std::abs(points[i] - points[j]);
  return FiniteMetric(std::move(d));
}

// ---------------------------------------------------------------------------

namespace {

void same_support(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::SupportMismatch, "distributions have different support sizes");
}

}  // namespace

double entropy(const FiniteDistribution& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return std::max(0.0, h);
}

namespace {

// p log(p/q) - (p - q) >= 0 termwise and sums to KL when both laws have unit
// mass. Its rounding error scales with |p - q| rather than with p, so equal
// laws give ~1e-32 instead of ~1e-16 (which a square root would turn into 1e-8).
double kl_term(double p, double q) {
  if (p <= 0.0) return q;
  const double d = p - q;
  return std::max(0.0, p * std::log1p(d / q) - d);
}

}  // namespace

ExtendedReal kl(const FiniteDistribution& p, const FiniteDistribution& q) {
  same_support(p, q);
  double d = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] <= 0.0) return ExtendedReal::infinity();
    d += kl_term(p[i], q[i]);
  }
  return ExtendedReal(d);
}

double tv(const FiniteDistribution& p, const FiniteDistribution& q) {
  same_support(p, q);
  return 0.5 * (p.weights() - q.weights()).cwiseAbs().sum();
}

namespace {

// Successive shortest paths on the bipartite transport network
// source -> i (cap p_i) -> j (cap inf, cost rho_ij) -> sink (cap q_j).
// Bellman-Ford handles the negative reverse arcs of the residual graph.
class TransportSolver {
 public:
  TransportSolver(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const FiniteMetric& metric)
      : n_(static_cast<int>(p.size())), m_(static_cast<int>(q.size())) {
    for (int i = 0; i < n_; ++i)
      if (p(i) > 0.0) add_edge(source(), left(i), p(i), 0.0);
    for (int j = 0; j < m_; ++j)
      if (q(j) > 0.0) add_edge(right(j), sink(), q(j), 0.0);
    middle_.assign(static_cast<std::size_t>(n_) * m_, -1);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j)
        if (p(i) > 0.0 && q(j) > 0.0)
          middle_[i * m_ + j] = add_edge(left(i), right(j), std::numeric_limits<double>::infinity(), metric(i, j));
  }

  TransportResult solve() {
    constexpr double eps = 1e-15;
    const int nodes = n_ + m_ + 2;
    std::vector<double> dist(nodes);
    std::vector<int> via(nodes);
    for (;;) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(via.begin(), via.end(), -1);
      dist[source()] = 0.0;
      for (int round = 0; round < nodes; ++round) {
        bool changed = false;
        for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
          const auto& ed = edges_[e];
          if (ed.cap <= eps || dist[ed.from] == std::numeric_limits<double>::infinity()) continue;
          const double nd = dist[ed.from] + ed.cost;
          if (nd < dist[ed.to] - 1e-15) {
            dist[ed.to] = nd;
            via[ed.to] = e;
            changed = true;
          }
        }
        if (!changed) break;
      }
      if (via[sink()] < 0) break;
      double push = std::numeric_limits<double>::infinity();
      for (int v = sink(); v != source(); v = edges_[via[v]].from) push = std::min(push, edges_[via[v]].cap);
      if (push <= eps) break;
      for (int v = sink(); v != source(); v = edges_[via[v]].from) {
        edges_[via[v]].cap -= push;
        edges_[via[v] ^ 1].cap += push;
      }
    }
    TransportResult r;
    r.coupling.matrix = Eigen::MatrixXd::Zero(n_, m_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) {
        const int e = middle_[i * m_ + j];
        if (e < 0) continue;
        const double flow = edges_[e ^ 1].cap;
        r.coupling.matrix(i, j) = flow;
        r.value += flow * edges_[e].cost;
      }
    return r;
  }

 private:
  struct Edge {
    int from, to;
    double cap, cost;
  };

  int source() const { return n_ + m_; }
  int sink() const { return n_ + m_ + 1; }
  int left(int i) const { return i; }
  int right(int j) const { return n_ + j; }

  int add_edge(int from, int to, double cap, double cost) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({from, to, cap, cost});
    edges_.push_back({to, from, 0.0, -cost});
    return id;
  }

  int n_, m_;
  std::vector<Edge> edges_;
  std::vector<int> middle_;
};

}  // namespace

TransportResult wasserstein1(const FiniteDistribution& p, const FiniteDistribution& q, const FiniteMetric& metric) {
  same_support(p, q);
  if (metric.n_points() != p.size()) throw Error(ErrorCode::SupportMismatch, "metric size differs from support size");
  // W1 depends on p - q only, so the shared mass stays in place and only the
  // excess of p is transported onto the excess of q.
  const Eigen::VectorXd shared = p.weights().cwiseMin(q.weights());
  TransportResult r = TransportSolver(p.weights() - shared, q.weights() - shared, metric).solve();
  r.coupling.matrix.diagonal() += shared;
  return r;
}

double mutual_information(const JointTable& joint) {
  if (joint.rank() != 2) throw Error(ErrorCode::InvalidArgument, "mutual information needs a rank-2 joint");
  const int nx = joint.dims()[0], ny = joint.dims()[1];
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      joint.weights().data(), nx, ny);
  const Eigen::VectorXd px = m.rowwise().sum();
  const Eigen::RowVectorXd py = m.colwise().sum();
  double mi = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      mi += kl_term(m(x, y), px(x) * py(y));
  return mi;
}

double conditional_mutual_information(const JointTable& joint) {
  if (joint.rank() != 3) throw Error(ErrorCode::InvalidArgument, "conditional mutual information needs a rank-3 joint");
  const int nx = joint.dims()[0], ny = joint.dims()[1], nz = joint.dims()[2];
  double cmi = 0.0;
  for (int z = 0; z < nz; ++z) {
    double pz = 0.0;
    Eigen::MatrixXd slice(nx, ny);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        slice(x, y) = joint.at({x, y, z});
        pz += slice(x, y);
      }
    if (pz <= 0.0) continue;
    const Eigen::VectorXd px = slice.rowwise().sum();
    const Eigen::RowVectorXd py = slice.colwise().sum();
    double term = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        term += kl_term(slice(x, y), px(x) * py(y) / pz);
    cmi += term;
  }
  return cmi;
}

double pinsker_bh_bound(const ExtendedReal& kl_value) {
  if (!kl_value.is_finite()) return 1.0;
  return pinsker_bh_bound(kl_value.value());
}

double pinsker_bh_bound(double kl_value) {
  if (std::isnan(kl_value) || kl_value < 0.0) throw Error(ErrorCode::NegativeKL, "KL value must be non-negative");
  if (std::isinf(kl_value)) return 1.0;
  return std::min(std::sqrt(kl_value / 2.0), std::sqrt(-std::expm1(-kl_value)));
}

}  // namespace mbr
