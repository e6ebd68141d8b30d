#include "schro/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

// Boost 1.74's pchip calls isnan unqualified; <math.h> puts it in scope.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/SparseCholesky>

#include "schro/actions.hpp"
#include "schro/density.hpp"
#include "schro/errors.hpp"
#include "schro/euclidean.hpp"
#include "schro/hat.hpp"
#include "schro/kernels.hpp"
#include "schro/lbfgs.hpp"

namespace schro {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Split {
  double kinetic = 0.0;
  double fisher = 0.0;
};

/// Factorization of tridiag(-1, 2, -1) of size n, reused for every solve.
class SecondDifference {
 public:
  explicit SecondDifference(std::size_t n) : c_(n), m_(n) {
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m_[i] = 2.0 + prev;  // 2 - (-1) * c_{i-1}
      c_[i] = -1.0 / m_[i];
      prev = c_[i];
    }
  }

  /// In-place solve on a strided vector.
  void solve(double* v, std::size_t stride) const {
    const std::size_t n = m_.size();
    v[0] /= m_[0];
    for (std::size_t i = 1; i < n; ++i) v[i * stride] = (v[i * stride] + v[(i - 1) * stride]) / m_[i];
    for (std::size_t i = n - 1; i-- > 0;) v[i * stride] -= c_[i] * v[(i + 1) * stride];
  }

 private:
  std::vector<double> c_, m_;
};

/// The discretized action as a function of the interior nodes.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t dim() const = 0;
  /// Returns kinetic + eps^2 fisher (+inf if infeasible); grad may be empty.
  virtual double value(std::span<const double> z, std::span<double> grad, Split* split) const = 0;
  virtual void precondition(std::span<const double> in, std::span<double> out) const = 0;
  /// Rebuild state-dependent parts of the preconditioner around z.
  virtual void prepare(std::span<const double> /*z*/) {}
  /// Iterations between preconditioner rebuilds (0: never rebuilt).
  virtual std::size_t refresh_interval() const { return 0; }
  virtual std::vector<double> initial(const WarmStart& warm) const = 0;
  virtual std::vector<double> encode(const Curve& curve) const = 0;
  virtual Curve decode(std::span<const double> z) const = 0;
  virtual double default_tol() const = 0;
  /// Length scale for random perturbations that keep z feasible.
  virtual double perturbation_scale(std::span<const double> /*z*/) const { return 0.1; }
};

double trapezoid_weight(std::size_t k, std::size_t intervals) {
  const double dt = 1.0 / static_cast<double>(intervals);
  return (k == 0 || k == intervals) ? 0.5 * dt : dt;
}

// ---------------------------------------------------------------- Euclidean

class EuclideanProblem final : public Problem {
 public:
  EuclideanProblem(const EuclideanBackend& backend, Coords x, Coords y, double eps,
                   std::size_t n_time)
      : backend_(backend),
        x_(std::move(x)),
        y_(std::move(y)),
        eps_(eps),
        d_(x_.size()),
        n_(n_time + 1),
        times_(uniform_times(n_)),
        t_(n_time) {}

  std::size_t dim() const override { return (n_ - 1) * d_; }
  double default_tol() const override { return 1e-7; }

  double value(std::span<const double> z, std::span<double> grad, Split* split) const override {
    const Potential& v = backend_.potential();
    const double dt = 1.0 / static_cast<double>(n_);
    auto node = [&](std::size_t k) -> std::span<const double> {
      if (k == 0) return x_;
      if (k == n_) return y_;
      return z.subspan((k - 1) * d_, d_);
    };
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    double kinetic = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      auto a = node(k);
      auto b = node(k + 1);
      for (std::size_t i = 0; i < d_; ++i) {
        const double diff = b[i] - a[i];
        kinetic += 0.5 * diff * diff / dt;
        if (!grad.empty()) {
          if (k + 1 < n_) grad[k * d_ + i] += diff / dt;
          if (k > 0) grad[(k - 1) * d_ + i] -= diff / dt;
        }
      }
    }
    double fisher = 0.0;
    for (std::size_t k = 0; k <= n_; ++k) {
      const double w = trapezoid_weight(k, n_);
      const Coords g = v.gradient(node(k));
      fisher += 0.5 * w * kernels::dot(g, g);
      if (!grad.empty() && k > 0 && k < n_ && eps_ > 0.0) {
        const Coords hg = v.hessian_vector(node(k), g);
        kernels::axpy(eps_ * eps_ * w, hg, grad.subspan((k - 1) * d_, d_));
      }
    }
    if (split) *split = {kinetic, fisher};
    const double total = kinetic + eps_ * eps_ * fisher;
    return std::isfinite(total) ? total : kInf;
  }

  void precondition(std::span<const double> in, std::span<double> out) const override {
    const double dt = 1.0 / static_cast<double>(n_);
    std::copy(in.begin(), in.end(), out.begin());
    for (std::size_t i = 0; i < d_; ++i) t_.solve(out.data() + i, d_);
    for (auto& v : out) v *= dt;
  }

  std::vector<double> initial(const WarmStart& warm) const override {
    switch (warm.kind) {
      case WarmStart::Kind::state:
        if (warm.state.size() != dim()) fail(ErrorCode::domain_error, "warm-start state has wrong size");
        return warm.state;
      case WarmStart::Kind::user:
        return encode(*warm.curve);
      default:
        break;
    }
    const bool regularize = warm.kind == WarmStart::Kind::regularized_geodesic && eps_ > 0.0;
    const HatFunction h = HatFunction::recovery(eps_);
    std::vector<double> z(dim());
    for (std::size_t k = 1; k < n_; ++k) {
      Point p = backend_.geodesic(x_, y_, times_[k]);
      if (regularize) p = backend_.flow(p, h(times_[k]));
      std::copy(p.coords().begin(), p.coords().end(), z.begin() + (k - 1) * d_);
    }
    return z;
  }

  std::vector<double> encode(const Curve& curve) const override {
    if (curve.size() != n_ + 1) fail(ErrorCode::domain_error, "warm-start curve has the wrong node count");
    std::vector<double> z(dim());
    for (std::size_t k = 1; k < n_; ++k) {
      const Coords& c = curve[k].coords();
      if (c.size() != d_) fail(ErrorCode::invalid_curve, "warm-start curve has the wrong dimension");
      std::copy(c.begin(), c.end(), z.begin() + (k - 1) * d_);
    }
    return z;
  }

  Curve decode(std::span<const double> z) const override {
    std::vector<Point> pts;
    pts.reserve(n_ + 1);
    pts.emplace_back(x_);
    for (std::size_t k = 1; k < n_; ++k) pts.emplace_back(Coords(z.begin() + (k - 1) * d_, z.begin() + k * d_));
    pts.emplace_back(y_);
    return Curve(times_, std::move(pts));
  }

 private:
  const EuclideanBackend& backend_;
  Coords x_, y_;
  double eps_;
  std::size_t d_;
  std::size_t n_;  // intervals
  std::vector<double> times_;
  SecondDifference t_;
};

// ------------------------------------------------------------------ Density

/// Cosine-graded levels u_i = (1 - cos(pi i / m)) / 2: uniform in the bulk
/// of the mass, quadratically refined towards both tails.
std::vector<double> graded_levels(std::size_t m) {
  std::vector<double> u(m + 1);
  for (std::size_t i = 0; i <= m; ++i)
    u[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(m)));
  u.front() = 0.0;
  u.back() = 1.0;
  return u;
}

/// Quantile of the monotone C^1 (PCHIP) interpolant of the cell-edge CDF,
/// sampled at `u`. Unlike the piecewise-linear quantile, sub-cell samples
/// see a continuous density, so finite differences across Lagrangian cells
/// stay consistent however the levels fall relative to the grid.
std::vector<double> smooth_quantile(const GridDensity& rho, std::span<const double> u) {
  const Grid& g = rho.grid();
  std::vector<double> edges(g.n + 1), cdf(g.n + 1, 0.0);
  for (std::size_t i = 0; i <= g.n; ++i) edges[i] = g.edge(i);
  for (std::size_t i = 0; i < g.n; ++i) cdf[i + 1] = cdf[i] + rho[i] * g.dx;
  const double total = cdf.back();
  for (auto& c : cdf) c /= total;
  cdf.back() = 1.0;
  const std::vector<double> f = cdf;
  auto spline = boost::math::interpolators::pchip<std::vector<double>>(std::vector<double>(edges),
                                                                        std::move(cdf));
  std::vector<double> q(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] <= 0.0) {
      q[k] = edges.front();
      continue;
    }
    if (u[k] >= 1.0) {
      q[k] = edges.back();
      continue;
    }
    const auto it = std::upper_bound(f.begin(), f.end(), u[k]);
    const std::size_t i = static_cast<std::size_t>(it - f.begin()) - 1;
    const double target = u[k];
    auto residual = [&](double x) { return spline(x) - target; };
    const double lo = residual(edges[i]);
    const double hi = residual(edges[i + 1]);
    if (lo >= 0.0) {
      q[k] = edges[i];
    } else if (hi <= 0.0) {
      q[k] = edges[i + 1];
    } else {
      std::uintmax_t iters = 100;
      const auto root = boost::math::tools::toms748_solve(
          residual, edges[i], edges[i + 1], lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
      q[k] = 0.5 * (root.first + root.second);
    }
  }
  return q;
}

/// Per-cell values of the Fisher root f(rho) and df/dL for the cells the
/// knots q delimit (rho_c = du_c / L_c). False if some cell is degenerate.
bool cell_roots(const EntropyKind& kind, std::span<const double> du, std::span<const double> q,
                std::vector<double>& f, std::vector<double>& dfdl) {
  const std::size_t cells = du.size();
  f.resize(cells);
  dfdl.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double len = q[c + 1] - q[c];
    if (!(len > 0.0)) return false;
    const double r = du[c] / len;
    f[c] = kind.fisher_root(r);
    dfdl[c] = -std::sqrt(r) * kind.pressure_log_derivative(r) / len;
  }
  return true;
}

/// Distance used for the difference of f across knot j: the harmonic mean
/// of the two adjacent cell lengths. On smoothly graded cells it agrees with
/// the center distance to second order; next to a long, nearly empty cell
/// it stays of the order of the short cell, so a density cliff cannot hide
/// behind it. Also returns the partials with respect to both lengths.
struct KnotSpacing {
  double d, dd_left, dd_right;
};

inline KnotSpacing knot_spacing(double left, double right) {
  const double s = left + right;
  return {2.0 * left * right / s, 2.0 * right * right / (s * s), 2.0 * left * left / (s * s)};
}

/// Squared slope int (d f(rho)/dx)^2 dx of the density whose quantile has
/// knots (u, q), from differences of f between neighbouring cells.
/// Optionally accumulates scale * d(S^2)/dq into grad (interior knots only,
/// knot i at grad[i - 1]).
double lagrangian_slope_sq(const EntropyKind& kind, std::span<const double> du,
                           std::span<const double> q, std::span<double> grad, double scale,
                           std::vector<double>& f, std::vector<double>& dfdl) {
  const std::size_t cells = du.size();
  if (!cell_roots(kind, du, q, f, dfdl)) return kInf;
  double s2 = 0.0;
  for (std::size_t j = 1; j < cells; ++j) {
    const double jump = f[j] - f[j - 1];
    const KnotSpacing sp = knot_spacing(q[j] - q[j - 1], q[j + 1] - q[j]);
    s2 += jump * jump / sp.d;
    if (grad.empty()) continue;
    const double dj = scale * 2.0 * jump / sp.d;
    const double a = dj * dfdl[j];
    const double b = dj * dfdl[j - 1];
    const double dd = -scale * jump * jump / (sp.d * sp.d);
    if (j + 1 < cells) grad[j] += a + dd * sp.dd_right;
    grad[j - 1] += -a - b + dd * (sp.dd_left - sp.dd_right);
    if (j >= 2) grad[j - 2] += b - dd * sp.dd_left;
  }
  return s2;
}

class DensityProblem final : public Problem {
 public:
  DensityProblem(const DensityBackend& backend, const GridDensity& x, const GridDensity& y,
                 double eps, std::size_t n_time, std::size_t levels)
      : backend_(backend),
        x_(x),
        y_(y),
        eps_(eps),
        n_(n_time + 1),
        times_(uniform_times(n_)),
        t_(n_time) {
    u_ = graded_levels(levels);
    du_.resize(u_.size() - 1);
    for (std::size_t i = 0; i + 1 < u_.size(); ++i) du_[i] = u_[i + 1] - u_[i];
    knots_ = u_.size();
    j_ = knots_ - 2;
    qa_ = smooth_quantile(x, u_);
    qb_ = smooth_quantile(y, u_);
    qa_.front() = qb_.front() = backend.grid().x_min;
    qa_.back() = qb_.back() = backend.grid().x_max();
    lumped_.resize(j_);
    for (std::size_t j = 0; j < j_; ++j) lumped_[j] = 0.5 * (du_[j] + du_[j + 1]);
  }

  std::size_t dim() const override { return (n_ - 1) * j_; }
  double default_tol() const override { return 1e-9; }

  double value(std::span<const double> z, std::span<double> grad, Split* split) const override {
    const double dt = 1.0 / static_cast<double>(n_);
    std::vector<double> prev(qa_), cur(knots_), diff(knots_), mdiff(knots_), f, dfdl;
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    auto fill = [&](std::size_t k, std::vector<double>& out) {
      if (k == 0) {
        out = qa_;
      } else if (k == n_) {
        out = qb_;
      } else {
        out.front() = qa_.front();
        out.back() = qa_.back();
        std::copy(z.begin() + (k - 1) * j_, z.begin() + k * j_, out.begin() + 1);
      }
    };
    double kinetic = 0.0;
    double fisher = 0.0;
    {
      const double s2 = lagrangian_slope_sq(backend_.kind(), du_, qa_, {}, 0.0, f, dfdl);
      if (!std::isfinite(s2)) return kInf;
      fisher += 0.5 * trapezoid_weight(0, n_) * s2;
    }
    for (std::size_t k = 1; k <= n_; ++k) {
      fill(k, cur);
      for (std::size_t i = 0; i < knots_; ++i) diff[i] = cur[i] - prev[i];
      kinetic += 0.5 * kernels::pl_l2_sq(du_, cur, prev) / dt;
      if (!grad.empty()) {
        kernels::pl_mass_apply(du_, diff, mdiff);
        if (k < n_) kernels::axpy(1.0 / dt, std::span<const double>(mdiff).subspan(1, j_), grad.subspan((k - 1) * j_, j_));
        if (k > 1) kernels::axpy(-1.0 / dt, std::span<const double>(mdiff).subspan(1, j_), grad.subspan((k - 2) * j_, j_));
      }
      const double w = trapezoid_weight(k, n_);
      std::span<double> gk;
      if (!grad.empty() && k < n_ && eps_ > 0.0) gk = grad.subspan((k - 1) * j_, j_);
      const double s2 = lagrangian_slope_sq(backend_.kind(), du_, cur, gk, 0.5 * w * eps_ * eps_, f, dfdl);
      if (!std::isfinite(s2)) return kInf;
      fisher += 0.5 * w * s2;
      prev.swap(cur);
    }
    if (split) *split = {kinetic, fisher};
    const double total = kinetic + eps_ * eps_ * fisher;
    return std::isfinite(total) ? total : kInf;
  }

  void precondition(std::span<const double> in, std::span<double> out) const override {
    if (factor_ready_) {
      Eigen::Map<const Eigen::VectorXd> r(in.data(), static_cast<Eigen::Index>(in.size()));
      Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = factor_.solve(r);
      return;
    }
    const double dt = 1.0 / static_cast<double>(n_);
    std::copy(in.begin(), in.end(), out.begin());
    for (std::size_t j = 0; j < j_; ++j) {
      t_.solve(out.data() + j, j_);
      const double s = dt / lumped_[j];
      for (std::size_t k = 0; k + 1 < n_; ++k) out[k * j_ + j] *= s;
    }
  }

  std::size_t refresh_interval() const override { return eps_ > 0.0 ? 50 : 0; }

  double perturbation_scale(std::span<const double> z) const override {
    double shortest = kInf;
    for (std::size_t k = 0; k + 1 < n_; ++k) {
      double prev = qa_.front();
      for (std::size_t j = 0; j <= j_; ++j) {
        const double next = j < j_ ? z[k * j_ + j] : qa_.back();
        shortest = std::min(shortest, next - prev);
        prev = next;
      }
    }
    return 0.1 * shortest;
  }

  /// Kinetic Hessian (time second difference times the P1 mass matrix) plus
  /// the Gauss-Newton part of eps^2 * Fisher, factored by sparse LDL^T.
  void prepare(std::span<const double> z) override {
    const double dt = 1.0 / static_cast<double>(n_);
    const std::size_t nodes = n_ - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nodes * j_ * 13);
    auto idx = [&](std::size_t k, std::size_t j) { return static_cast<int>(k * j_ + j); };
    // P1 mass: diag (du_{i-1} + du_i) / 3, off-diagonal du_i / 6 (knot i = j + 1).
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t j = 0; j < j_; ++j) {
        const double md = (du_[j] + du_[j + 1]) / 3.0;
        const double mo = du_[j + 1] / 6.0;
        for (int dk = -1; dk <= 1; ++dk) {
          const double tk = dk == 0 ? 2.0 / dt : -1.0 / dt;
          const long kk = static_cast<long>(k) + dk;
          if (kk < 0 || kk >= static_cast<long>(nodes)) continue;
          const auto kc = static_cast<std::size_t>(kk);
          trip.emplace_back(idx(k, j), idx(kc, j), tk * md);
          if (j + 1 < j_) {
            trip.emplace_back(idx(k, j), idx(kc, j + 1), tk * mo);
            trip.emplace_back(idx(k, j + 1), idx(kc, j), tk * mo);
          }
        }
      }
    }
    if (eps_ > 0.0) {
      std::vector<double> q(knots_), f, dfdl;
      const std::size_t cells = du_.size();
      for (std::size_t k = 0; k < nodes; ++k) {
        q.front() = qa_.front();
        q.back() = qa_.back();
        std::copy(z.begin() + k * j_, z.begin() + (k + 1) * j_, q.begin() + 1);
        if (!cell_roots(backend_.kind(), du_, q, f, dfdl)) continue;
        const double scale = eps_ * eps_ * trapezoid_weight(k + 1, n_);
        for (std::size_t j = 1; j < cells; ++j) {
          // residual R = (f_j - f_{j-1}) / sqrt(d_j); S^2 = sum R^2
          const KnotSpacing sp = knot_spacing(q[j] - q[j - 1], q[j + 1] - q[j]);
          const double rs = std::sqrt(sp.d);
          const double res = (f[j] - f[j - 1]) / rs;
          const double c = -0.5 * res / sp.d;
          const double d[3] = {dfdl[j - 1] / rs - c * sp.dd_left,
                               -(dfdl[j - 1] + dfdl[j]) / rs + c * (sp.dd_left - sp.dd_right),
                               dfdl[j] / rs + c * sp.dd_right};
          for (int r = 0; r < 3; ++r) {
            const std::size_t kr = j - 1 + static_cast<std::size_t>(r);
            if (kr == 0 || kr == cells) continue;
            for (int c2 = 0; c2 < 3; ++c2) {
              const std::size_t kc = j - 1 + static_cast<std::size_t>(c2);
              if (kc == 0 || kc == cells) continue;
              trip.emplace_back(idx(k, kr - 1), idx(k, kc - 1), scale * d[r] * d[c2]);
            }
          }
        }
      }
    }
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(trip.begin(), trip.end());
    factor_.compute(h);
    factor_ready_ = factor_.info() == Eigen::Success;
  }

  std::vector<double> initial(const WarmStart& warm) const override {
    switch (warm.kind) {
      case WarmStart::Kind::state:
        if (warm.state.size() != dim()) fail(ErrorCode::domain_error, "warm-start state has wrong size");
        return warm.state;
      case WarmStart::Kind::user:
        return encode(*warm.curve);
      default:
        break;
    }
    const bool regularize = warm.kind == WarmStart::Kind::regularized_geodesic && eps_ > 0.0;
    const HatFunction h = HatFunction::recovery(eps_);
    std::vector<double> z(dim()), q(knots_);
    for (std::size_t k = 1; k < n_; ++k) {
      const double t = times_[k];
      for (std::size_t i = 0; i < knots_; ++i) q[i] = (1.0 - t) * qa_[i] + t * qb_[i];
      if (regularize) {
        const GridDensity rho = backend_.flow(deposit(backend_.grid(), u_, q), h(t));
        q = smooth_quantile(rho, u_);
      }
      std::copy(q.begin() + 1, q.end() - 1, z.begin() + (k - 1) * j_);
    }
    return z;
  }

  std::vector<double> encode(const Curve& curve) const override {
    if (curve.size() != n_ + 1) fail(ErrorCode::domain_error, "curve has the wrong node count for this grid");
    std::vector<double> z(dim());
    for (std::size_t k = 1; k < n_; ++k) {
      const std::vector<double> qk = smooth_quantile(curve[k].density(), u_);
      std::copy(qk.begin() + 1, qk.end() - 1, z.begin() + (k - 1) * j_);
    }
    return z;
  }

  Curve decode(std::span<const double> z) const override {
    std::vector<Point> pts;
    pts.reserve(n_ + 1);
    pts.emplace_back(x_);
    std::vector<double> q(knots_);
    q.front() = qa_.front();
    q.back() = qa_.back();
    for (std::size_t k = 1; k < n_; ++k) {
      std::copy(z.begin() + (k - 1) * j_, z.begin() + k * j_, q.begin() + 1);
      pts.emplace_back(deposit(backend_.grid(), u_, q));
    }
    pts.emplace_back(y_);
    return Curve(times_, std::move(pts));
  }

 private:
  const DensityBackend& backend_;
  GridDensity x_, y_;
  double eps_;
  std::size_t n_;
  std::vector<double> times_;
  SecondDifference t_;
  std::vector<double> u_, du_, qa_, qb_, lumped_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
  bool factor_ready_ = false;
  std::size_t knots_ = 0;
  std::size_t j_ = 0;  // interior knots per node
};

std::unique_ptr<Problem> make_problem(const SpaceBackend& backend, const Point& x, const Point& y,
                                      double eps, const SolverOptions& options) {
  const std::size_t n_time = options.n_time;
  if (!backend.accepts(x) || !backend.accepts(y) || !x.same_space(y))
    fail(ErrorCode::invalid_curve, "endpoints do not belong to the backend's state space");
  if (const auto* e = dynamic_cast<const EuclideanBackend*>(&backend)) {
    return std::make_unique<EuclideanProblem>(*e, x.coords(), y.coords(), eps, n_time);
  }
  if (const auto* d = dynamic_cast<const DensityBackend*>(&backend)) {
    if (d->grid().boundary != Boundary::no_flux)
      fail(ErrorCode::unsupported, "the action solver supports no-flux density grids only");
    const std::size_t levels = options.levels ? options.levels : 2 * d->grid().n;
    return std::make_unique<DensityProblem>(*d, x.density(), y.density(), eps, n_time, levels);
  }
  fail(ErrorCode::unsupported, "no action solver for backend '" + backend.name() + "'");
}

SchrodingerResult finish(const Problem& problem, std::span<const double> z, double eps) {
  Split split;
  std::vector<double> g(problem.dim());
  const double cost = problem.value(z, g, &split);
  SchrodingerResult r(problem.decode(z), eps);
  r.kinetic = split.kinetic;
  r.fisher = split.fisher;
  r.cost = cost;
  r.stationarity = kernels::max_abs(g);
  r.state.assign(z.begin(), z.end());
  return r;
}

}  // namespace

void SolverOptions::validate() const {
  if (n_time < 3) fail(ErrorCode::domain_error, "n_time must be at least 3");
  if (grad_tol && !(*grad_tol > 0.0)) fail(ErrorCode::domain_error, "grad_tol must be positive");
  if (levels != 0 && levels < 4) fail(ErrorCode::domain_error, "levels must be 0 (automatic) or >= 4");
  if (memory == 0) fail(ErrorCode::domain_error, "memory must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail(ErrorCode::domain_error, "armijo_c must lie in (0,1)");
  if (!(shrink > 0.0 && shrink < 1.0)) fail(ErrorCode::domain_error, "shrink must lie in (0,1)");
  if (warm_start.kind == WarmStart::Kind::user && !warm_start.curve)
    fail(ErrorCode::domain_error, "user warm start needs a curve");
}

SchrodingerResult solve(const SpaceBackend& backend, const Point& x, const Point& y, double eps,
                        const SolverOptions& options) {
  options.validate();
  if (!(eps >= 0.0) || !std::isfinite(eps)) fail(ErrorCode::domain_error, "eps must be finite and >= 0");
  if (eps > 0.0 && (!std::isfinite(backend.entropy(x)) || !std::isfinite(backend.entropy(y))))
    fail(ErrorCode::endpoint_entropy_infinite,
         "eps > 0 needs finite endpoint entropies; mollify the endpoints (mollified_sweep)");
  const auto problem = make_problem(backend, x, y, eps, options);
  const double tol = options.grad_tol.value_or(problem->default_tol());

  std::vector<double> z0 = problem->initial(options.warm_start);
  if (eps == 0.0 && dynamic_cast<const DensityBackend*>(&backend) &&
      options.warm_start.kind != WarmStart::Kind::state && options.warm_start.kind != WarmStart::Kind::user) {
    // Closed form: the quantile geodesic.
    SchrodingerResult r = finish(*problem, z0, eps);
    r.converged = true;
    r.history = {r.cost};
    return r;
  }

  problem->prepare(z0);
  LbfgsOptions lo;
  lo.grad_tol = tol;
  lo.memory = options.memory;
  lo.armijo_c = options.armijo_c;
  lo.shrink = options.shrink;
  const std::size_t chunk = problem->refresh_interval();
  auto objective = [&](std::span<const double> z, std::span<double> g) { return problem->value(z, g, nullptr); };
  auto seed = [&](std::span<const double> in, std::span<double> out) { problem->precondition(in, out); };

  // Restart L-BFGS with a rebuilt preconditioner every `chunk` iterations.
  LbfgsReport rep;
  rep.x = std::move(z0);
  std::vector<double> history;
  std::size_t iterations = 0;
  while (true) {
    const std::size_t left = options.max_iter - iterations;
    lo.max_iter = chunk ? std::min(chunk, left) : left;
    LbfgsReport part = minimize_lbfgs(objective, std::move(rep.x), lo, seed);
    history.insert(history.end(), part.history.begin() + (history.empty() ? 0 : 1), part.history.end());
    iterations += part.iterations;
    rep = std::move(part);
    if (rep.converged || iterations >= options.max_iter || rep.iterations < lo.max_iter) break;
    problem->prepare(rep.x);
  }
  rep.iterations = iterations;
  rep.history = std::move(history);

  SchrodingerResult r = finish(*problem, rep.x, eps);
  r.iterations = rep.iterations;
  r.converged = r.stationarity <= tol;
  r.history = rep.history;
  return r;
}

SchrodingerResult evaluate(const SpaceBackend& backend, const Curve& curve, double eps,
                           const SolverOptions& options) {
  options.validate();
  if (!(eps >= 0.0)) fail(ErrorCode::domain_error, "eps must be >= 0");
  if (curve.size() != options.n_time + 2)
    fail(ErrorCode::domain_error, "curve node count does not match n_time");
  const auto problem = make_problem(backend, curve.front(), curve.back(), eps, options);
  const std::vector<double> z = problem->encode(curve);
  SchrodingerResult r = finish(*problem, z, eps);
  r.minimizer = curve;
  r.converged = true;
  r.history = {r.cost};
  return r;
}

GradientCheck check_gradient(const SpaceBackend& backend, const Point& x, const Point& y, double eps,
                             const SolverOptions& options, std::size_t samples, std::uint64_t seed) {
  options.validate();
  const auto problem = make_problem(backend, x, y, eps, options);
  const std::vector<double> base = problem->initial(WarmStart::straight());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  GradientCheck out;
  const std::size_t n = problem->dim();
  std::vector<double> z(n), v(n), g(n), probe(n), unused;
  for (std::size_t s = 0; s < samples; ++s) {
    const double scale = problem->perturbation_scale(base);
    for (std::size_t i = 0; i < n; ++i) z[i] = base[i] + scale * unit(rng);
    for (std::size_t i = 0; i < n; ++i) v[i] = scale * unit(rng);
    problem->value(z, g, nullptr);
    const double analytic = kernels::dot(g, v);
    auto f = [&](double t) {
      for (std::size_t i = 0; i < n; ++i) probe[i] = z[i] + t * v[i];
      return problem->value(probe, unused, nullptr);
    };
    const double h = 1e-3;
    const double fd = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-12});
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.samples;
  }
  return out;
}

double geodesic_cost(const SpaceBackend& backend, const Point& x, const Point& y) {
  const double d = backend.distance(x, y);
  return 0.5 * d * d;
}

SchrodingerResult bridge_from_flow(const SpaceBackend& backend, const Point& x, double eps,
                                   const SolverOptions& options) {
  options.validate();
  if (!(eps > 0.0)) fail(ErrorCode::domain_error, "bridge_from_flow needs eps > 0");
  const std::size_t intervals = options.n_time + 1;
  const std::vector<double> times = uniform_times(intervals);
  std::vector<Point> pts{x};
  pts.reserve(intervals + 1);
  for (std::size_t k = 1; k <= intervals; ++k)
    pts.push_back(backend.flow(pts.back(), eps * (times[k] - times[k - 1])));
  Curve curve(times, std::move(pts));
  SchrodingerResult r(curve, eps);
  r.kinetic = kinetic_action(backend, curve);
  r.fisher = fisher_action(backend, curve);
  r.cost = r.kinetic + eps * eps * r.fisher;
  r.converged = true;
  r.history = {r.cost};
  return r;
}

}  // namespace schro
