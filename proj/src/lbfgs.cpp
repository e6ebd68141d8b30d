#include "schro/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "schro/errors.hpp"
#include "schro/kernels.hpp"

namespace schro {
namespace {

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsReport minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                           const LbfgsOptions& options, const Preconditioner& precondition) {
  const std::size_t n = x0.size();
  LbfgsReport report;
  report.x = std::move(x0);
  std::vector<double> g(n), d(n), q(n), r(n), xn(n), gn(n);

  auto apply_seed = [&](std::span<const double> in, std::span<double> out) {
    if (precondition) {
      precondition(in, out);
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };

  double f = objective(report.x, g);
  if (!std::isfinite(f)) fail(ErrorCode::domain_error, "L-BFGS started at an infeasible point");
  report.value = f;
  report.history.push_back(f);
  report.stationarity = kernels::max_abs(g);
  if (n == 0) {
    report.converged = true;
    return report;
  }

  std::deque<Pair> memory;
  bool steepest = false;
  std::size_t flat_steps = 0;

  while (report.iterations < options.max_iter) {
    report.stationarity = kernels::max_abs(g);
    if (report.stationarity <= options.grad_tol) {
      report.converged = true;
      break;
    }

    // Two-loop recursion with a scaled seed matrix.
    std::copy(g.begin(), g.end(), q.begin());
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      alpha[i] = memory[i].rho * kernels::dot(memory[i].s, q);
      kernels::axpy(-alpha[i], memory[i].y, q);
    }
    apply_seed(q, r);
    if (!memory.empty() && !steepest) {
      const Pair& last = memory.back();
      std::vector<double> py(n);
      apply_seed(last.y, py);
      const double yhy = kernels::dot(last.y, py);
      if (yhy > 0.0) {
        const double gamma = 1.0 / (last.rho * yhy);
        for (auto& v : r) v *= gamma;
      }
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].rho * kernels::dot(memory[i].y, r);
      kernels::axpy(alpha[i] - beta, memory[i].s, r);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];

    double gd = kernels::dot(g, d);
    if (steepest || !(gd < 0.0)) {
      memory.clear();
      apply_seed(g, r);
      for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];
      gd = kernels::dot(g, d);
      if (!(gd < 0.0)) break;
    }

    double step = 1.0;
    double fn = f;
    bool accepted = false;
    for (std::size_t bt = 0; bt < options.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = report.x[i] + step * d[i];
      fn = objective(xn, gn);
      if (std::isfinite(fn) && fn <= f + options.armijo_c * step * gd) {
        accepted = true;
        break;
      }
      step *= options.shrink;
    }
    if (!accepted) {
      if (memory.empty()) break;
      steepest = true;
      continue;
    }
    steepest = false;

    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = xn[i] - report.x[i];
      p.y[i] = gn[i] - g[i];
    }
    const double sy = kernels::dot(p.s, p.y);
    if (sy > 1e-300 && sy > 1e-12 * std::sqrt(kernels::dot(p.s, p.s) * kernels::dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (memory.size() > options.memory) memory.pop_front();
    }

    flat_steps = (f - fn <= 1e-16 * std::abs(f)) ? flat_steps + 1 : 0;
    report.x.swap(xn);
    g.swap(gn);
    f = fn;
    report.value = f;
    report.history.push_back(f);
    ++report.iterations;
    if (flat_steps >= 20) break;
  }
  report.stationarity = kernels::max_abs(g);
  report.converged = report.stationarity <= options.grad_tol;
  return report;
}

}  // namespace schro
