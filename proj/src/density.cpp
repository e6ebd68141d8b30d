#include "schro/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "schro/errors.hpp"
#include "schro/kernels.hpp"
#include "tridiagonal.hpp"

namespace schro {

EntropyKind EntropyKind::porous_medium(double m) {
  if (!(m > 1.0)) fail(ErrorCode::domain_error, "porous-medium exponent must be > 1");
  return EntropyKind(Type::porous_medium, m);
}

std::string EntropyKind::name() const {
  if (type_ == Type::boltzmann) return "boltzmann";
  return fmt::format("porous_medium(m={})", m_);
}

double EntropyKind::energy_density(double r) const {
  if (type_ == Type::boltzmann) return r * std::log(r);
  return std::pow(r, m_) / (m_ - 1.0);
}

double EntropyKind::pressure(double r) const {
  if (type_ == Type::boltzmann) return std::log(r);
  return m_ / (m_ - 1.0) * std::pow(r, m_ - 1.0);
}

double EntropyKind::pressure_log_derivative(double r) const {
  if (type_ == Type::boltzmann) return 1.0;
  return m_ * std::pow(r, m_ - 1.0);
}

double EntropyKind::fisher_root(double r) const {
  if (type_ == Type::boltzmann) return 2.0 * std::sqrt(r);
  return m_ / (m_ - 0.5) * std::pow(r, m_ - 0.5);
}

double Quantile::operator()(double v) const {
  if (v <= u.front()) return x.front();
  if (v >= u.back()) return x.back();
  const auto it = std::upper_bound(u.begin(), u.end(), v);
  const std::size_t k = static_cast<std::size_t>(it - u.begin()) - 1;
  const double du = u[k + 1] - u[k];
  if (du <= 0.0) return x[k];
  return x[k] + (x[k + 1] - x[k]) * (v - u[k]) / du;
}

Quantile quantile_of(const GridDensity& density) {
  const Grid& g = density.grid();
  Quantile q;
  q.u.resize(g.n + 1);
  q.x.resize(g.n + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    q.u[i] = acc;
    q.x[i] = g.edge(i);
    acc += density[i] * g.dx;
  }
  // Absorb the <= 1e-12 normalization residue into the last cell.
  q.u[g.n] = 1.0;
  q.x[g.n] = g.x_max();
  for (std::size_t i = 0; i < g.n; ++i) q.u[i] /= acc;
  return q;
}

GridDensity deposit(const Grid& grid, std::span<const double> u, std::span<const double> x) {
  const std::size_t n = grid.n;
  const bool periodic = grid.boundary == Boundary::periodic;
  const auto n_signed = static_cast<long long>(n);
  std::vector<double> mass(n, 0.0);
  auto cell_of = [&](long long k) -> std::size_t {
    if (periodic) return static_cast<std::size_t>(((k % n_signed) + n_signed) % n_signed);
    return static_cast<std::size_t>(std::clamp<long long>(k, 0, n_signed - 1));
  };
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double m = u[j + 1] - u[j];
    if (m <= 0.0) continue;
    const double a = x[j];
    const double b = x[j + 1];
    auto k = static_cast<long long>(std::floor((a - grid.x_min) / grid.dx));
    if (!(b - a > 1e-14 * grid.dx)) {
      mass[cell_of(k)] += m;
      continue;
    }
    const double rate = m / (b - a);
    double cur = a;
    while (cur < b) {
      double end = grid.x_min + static_cast<double>(k + 1) * grid.dx;
      if (end <= cur) {
        ++k;
        continue;
      }
      const double stop = std::min(b, end);
      mass[cell_of(k)] += rate * (stop - cur);
      cur = stop;
      ++k;
    }
  }
  for (auto& v : mass) v /= grid.dx;
  return GridDensity(grid, std::move(mass));
}

namespace {

// Lifted quantile of a periodic measure: G(v + 1) = G(v) + L.
double lifted(const Quantile& q, double v, double length) {
  const double k = std::floor(v);
  return q(v - k) + k * length;
}

// Knots of v -> G_b(v + shift) on [0,1], merged with a's knots.
std::vector<double> merged_levels(const Quantile& qa, const Quantile& qb, double shift) {
  std::vector<double> levels(qa.u.begin(), qa.u.end());
  levels.reserve(qa.u.size() + qb.u.size());
  for (double ub : qb.u) {
    double v = ub - shift;
    v -= std::floor(v);
    levels.push_back(v);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

struct Aligned {
  std::vector<double> u, du, xa, xb;
};

Aligned align(const Quantile& qa, const Quantile& qb, double shift, double length,
              bool periodic) {
  Aligned al;
  if (!periodic) {
    al.u = qa.u;
    al.u.insert(al.u.end(), qb.u.begin(), qb.u.end());
    std::sort(al.u.begin(), al.u.end());
    al.u.erase(std::unique(al.u.begin(), al.u.end()), al.u.end());
  } else {
    al.u = merged_levels(qa, qb, shift);
  }
  const std::size_t k = al.u.size();
  al.xa.resize(k);
  al.xb.resize(k);
  al.du.resize(k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    al.xa[i] = qa(al.u[i]);
    al.xb[i] = periodic ? lifted(qb, al.u[i] + shift, length) : qb(al.u[i]);
    if (i + 1 < k) al.du[i] = al.u[i + 1] - al.u[i];
  }
  return al;
}

double aligned_cost(const Aligned& al) { return kernels::pl_l2_sq(al.du, al.xa, al.xb); }

}  // namespace

DensityBackend::DensityBackend(Grid grid, EntropyKind kind, DensityFlowOptions options)
    : grid_(grid), kind_(kind), options_(options) {
  if (grid_.n < 3 || !(grid_.dx > 0.0)) fail(ErrorCode::domain_error, "invalid grid");
  if (!(options_.substep_factor > 0.0 && options_.substep_factor <= 1.0))
    fail(ErrorCode::domain_error, "substep_factor must lie in (0,1]");
}

bool DensityBackend::accepts(const Point& p) const {
  return p.is_density() && p.density().grid() == grid_;
}

void DensityBackend::check_grid(const GridDensity& rho) const {
  if (!(rho.grid() == grid_)) fail(ErrorCode::grid_mismatch, "density lives on a different grid");
}

double DensityBackend::periodic_shift(const GridDensity& a, const GridDensity& b) const {
  check_grid(a);
  check_grid(b);
  const Quantile qa = quantile_of(a);
  const Quantile qb = quantile_of(b);
  const double length = grid_.length();
  auto cost = [&](double s) { return aligned_cost(align(qa, qb, s, length, true)); };
  // Brute-force scan over 2n offsets in [-1, 1), then golden-section
  // refinement inside the winning bracket.
  const std::size_t candidates = 2 * grid_.n;
  const double step = 2.0 / static_cast<double>(candidates);
  double best_s = -1.0;
  double best_c = cost(best_s);
  for (std::size_t i = 1; i < candidates; ++i) {
    const double s = -1.0 + step * static_cast<double>(i);
    const double c = cost(s);
    if (c < best_c) {
      best_c = c;
      best_s = s;
    }
  }
  double lo = best_s - step;
  double hi = best_s + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = cost(x1);
  double f2 = cost(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = cost(x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  return cost(refined) < best_c ? refined : best_s;
}

double DensityBackend::w2_distance(const GridDensity& a, const GridDensity& b) const {
  check_grid(a);
  check_grid(b);
  if (a == b) return 0.0;
  const bool periodic = grid_.boundary == Boundary::periodic;
  const double shift = periodic ? periodic_shift(a, b) : 0.0;
  const Aligned al = align(quantile_of(a), quantile_of(b), shift, grid_.length(), periodic);
  return std::sqrt(std::max(0.0, aligned_cost(al)));
}

GridDensity DensityBackend::w2_geodesic(const GridDensity& a, const GridDensity& b,
                                        double theta) const {
  check_grid(a);
  check_grid(b);
  if (!(theta >= 0.0 && theta <= 1.0)) fail(ErrorCode::domain_error, "theta outside [0,1]");
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  const bool periodic = grid_.boundary == Boundary::periodic;
  const double shift = periodic ? periodic_shift(a, b) : 0.0;
  Aligned al = align(quantile_of(a), quantile_of(b), shift, grid_.length(), periodic);
  std::vector<double> x(al.u.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - theta) * al.xa[i] + theta * al.xb[i];
  return deposit(grid_, al.u, x);
}

double DensityBackend::entropy(const GridDensity& rho) const {
  check_grid(rho);
  double acc = 0.0;
  for (double r : rho.rho()) acc += kind_.energy_density(r);
  return acc * grid_.dx;
}

double DensityBackend::slope(const GridDensity& rho) const {
  check_grid(rho);
  const std::size_t n = grid_.n;
  const bool periodic = grid_.boundary == Boundary::periodic;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = kind_.pressure(rho[i]);
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Mirror ghost cells at no-flux walls.
    const double left = i > 0 ? p[i - 1] : (periodic ? p[n - 1] : p[0]);
    const double right = i + 1 < n ? p[i + 1] : (periodic ? p[0] : p[n - 1]);
    grad[i] = (right - left) / (2.0 * grid_.dx);
  }
  return std::sqrt(kernels::weighted_sum_sq(rho.rho(), grad) * grid_.dx);
}

void DensityBackend::substep(std::vector<double>& rho, double ds) const {
  const std::size_t n = grid_.n;
  const bool periodic = grid_.boundary == Boundary::periodic;
  const double r = ds / (grid_.dx * grid_.dx);
  // face[i] couples cell i and i+1 (face[n-1] wraps to cell 0 when periodic).
  std::vector<double> face(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n && !periodic) break;
    const std::size_t j = (i + 1) % n;
    if (kind_.type() == EntropyKind::Type::boltzmann) {
      face[i] = 1.0;
    } else {
      const double m = kind_.exponent();
      const double a = rho[i];
      const double b = rho[j];
      face[i] = std::abs(b - a) > 1e-14 * std::max(a, b)
                    ? (std::pow(b, m) - std::pow(a, m)) / (b - a)
                    : m * std::pow(0.5 * (a + b), m - 1.0);
    }
  }
  detail::Tridiagonal sys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? face[i - 1] : (periodic ? face[n - 1] : 0.0);
    const double right = face[i];
    sys.diag[i] = 1.0 + r * (left + right);
    sys.lower[i] = -r * left;
    sys.upper[i] = -r * right;
  }
  rho = periodic ? detail::solve_cyclic(std::move(sys), rho) : detail::solve(std::move(sys), rho);
  normalize_with_floor(rho, grid_.dx);
}

GridDensity DensityBackend::flow(const GridDensity& rho, double s) const {
  check_grid(rho);
  if (!(s >= 0.0)) fail(ErrorCode::domain_error, "flow time must be >= 0");
  if (s == 0.0) return rho;
  double limit = options_.substep_factor * grid_.dx * grid_.dx;
  if (kind_.type() == EntropyKind::Type::porous_medium) {
    // The maximum principle keeps max rho non-increasing, so the initial
    // bound holds for every substep.
    const double peak = *std::max_element(rho.rho().begin(), rho.rho().end());
    limit /= kind_.exponent() * std::pow(peak, kind_.exponent() - 1.0);
  }
  const auto steps = static_cast<std::size_t>(std::ceil(s / limit - 1e-12));
  const double ds = s / static_cast<double>(std::max<std::size_t>(steps, 1));
  std::vector<double> state(rho.rho().begin(), rho.rho().end());
  for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) substep(state, ds);
  return GridDensity(grid_, std::move(state));
}

double DensityBackend::distance(const Point& a, const Point& b) const {
  return w2_distance(a.density(), b.density());
}

Point DensityBackend::geodesic(const Point& a, const Point& b, double theta) const {
  return Point(w2_geodesic(a.density(), b.density(), theta));
}

double DensityBackend::entropy(const Point& p) const { return entropy(p.density()); }

double DensityBackend::slope(const Point& p) const { return slope(p.density()); }

Point DensityBackend::flow(const Point& p, double s) const {
  if (s == 0.0) {
    if (!accepts(p)) fail(ErrorCode::grid_mismatch, "density lives on a different grid");
    return p;
  }
  return Point(flow(p.density(), s));
}

GridDensity sample_density(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> rho(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) rho[i] = std::max(0.0, f(grid.center(i)));
  return GridDensity(grid, std::move(rho));
}

GridDensity gaussian(const Grid& grid, double mean, double sigma) {
  const double w = 1.0;
  return gaussian_mixture(grid, std::span(&w, 1), std::span(&mean, 1), std::span(&sigma, 1));
}

GridDensity gaussian_mixture(const Grid& grid, std::span<const double> weights,
                             std::span<const double> means, std::span<const double> sigmas) {
  if (weights.size() != means.size() || means.size() != sigmas.size() || weights.empty())
    fail(ErrorCode::domain_error, "mixture needs matching weights, means and sigmas");
  for (double s : sigmas)
    if (!(s > 0.0)) fail(ErrorCode::domain_error, "Gaussian sigma must be > 0");
  const bool periodic = grid.boundary == Boundary::periodic;
  const int images = periodic ? 3 : 0;
  return sample_density(grid, [&](double x) {
    double v = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
      for (int k = -images; k <= images; ++k) {
        const double z = (x - means[c] - k * grid.length()) / sigmas[c];
        v += weights[c] * std::exp(-0.5 * z * z) / (sigmas[c] * std::sqrt(2.0 * std::numbers::pi));
      }
    }
    return v;
  });
}

GridDensity near_dirac(const Grid& grid, double x0) {
  if (!(x0 >= grid.x_min && x0 < grid.x_max()))
    fail(ErrorCode::domain_error, "near_dirac location outside the grid");
  std::vector<double> rho(grid.n, 0.0);
  const auto i = std::min(grid.n - 1, static_cast<std::size_t>((x0 - grid.x_min) / grid.dx));
  rho[i] = 1.0 / grid.dx;
  return GridDensity(grid, std::move(rho));
}

GridDensity uniform_density(const Grid& grid) {
  return GridDensity(grid, std::vector<double>(grid.n, 1.0 / grid.length()));
}

double l1_distance(const GridDensity& a, const GridDensity& b) {
  if (!(a.grid() == b.grid())) fail(ErrorCode::grid_mismatch, "L1 distance across grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc * a.grid().dx;
}

}  // namespace schro
