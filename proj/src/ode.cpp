#include "swarm/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace swarm {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Hairer's continuous extension coefficients.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

}  // namespace

void DenseStep::eval(double t, std::span<double> out) const {
  const double h = t1_ - t0_;
  const double s = h == 0.0 ? 0.0 : (t - t0_) / h;
  const double s1 = 1.0 - s;
  for (std::size_t i = 0; i < r1_.size(); ++i) {
    out[i] = r1_[i] + s * (r2_[i] + s1 * (r3_[i] + s * (r4_[i] + s1 * r5_[i])));
  }
}

std::vector<double> DenseStep::operator()(double t) const {
  std::vector<double> out(r1_.size());
  eval(t, out);
  return out;
}

DormandPrince::DormandPrince(OdeRhs rhs, OdeOptions opts) : rhs_(std::move(rhs)), opts_(opts) {
  if (!(opts_.rtol > 0.0) || !(opts_.atol >= 0.0)) {
    throw std::invalid_argument("ODE tolerances must satisfy rtol > 0, atol >= 0");
  }
  stats_.rtol = opts_.rtol;
  stats_.atol = opts_.atol;
}

double DormandPrince::error_norm(std::span<const double> err, std::span<const double> y0,
                                 std::span<const double> y1) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sk = opts_.atol + opts_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sk;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(err.size(), 1)));
}

double DormandPrince::initial_step(double t, std::span<const double> y, std::span<const double> f0,
                                   double span) const {
  if (opts_.initial_step > 0.0) return std::min(opts_.initial_step, span);
  const std::size_t n = y.size();
  double d0 = 0.0, d1n = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = opts_.atol + opts_.rtol * std::abs(y[i]);
    d0 += (y[i] / sk) * (y[i] / sk);
    d1n += (f0[i] / sk) * (f0[i] / sk);
  }
  d0 = std::sqrt(d0 / n);
  d1n = std::sqrt(d1n / n);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, span);
  std::vector<double> y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h0 * f0[i];
  rhs_(t + h0, y1, f1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = opts_.atol + opts_.rtol * std::abs(y[i]);
    d2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  d2 = std::sqrt(d2 / n) / h0;
  const double dmax = std::max(d1n, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

void DormandPrince::enforce_nonnegative(std::vector<double>& y, double t) {
  const std::size_t m = std::min(opts_.nonneg_prefix, y.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (y[i] < 0.0) {
      if (y[i] < -opts_.tol_neg) {
        throw NegativityError("component " + std::to_string(i) + " reached " +
                              std::to_string(y[i]) + " at t=" + std::to_string(t) +
                              "; the exact flow keeps the orthant, check tolerances");
      }
      y[i] = 0.0;
      ++stats_.clamped;
    }
  }
}

double DormandPrince::integrate(std::vector<double>& y, double t0, double t_end,
                                const StepObserver& observer) {
  const std::size_t n = y.size();
  if (!(t_end >= t0)) throw std::invalid_argument("integration horizon precedes start time");
  if (t_end == t0 || n == 0) return t_end;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  rhs_(t0, y, k1);
  ++stats_.evaluations;

  double t = t0;
  double h = initial_step(t, y, k1, t_end - t0);
  DenseStep dense;
  bool last_rejected = false;

  while (t < t_end) {
    if (stats_.steps >= opts_.max_steps) {
      throw std::runtime_error("ODE step budget exhausted at t=" + std::to_string(t));
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_min) throw StepSizeUnderflow("step size underflow at t=" + std::to_string(t));
    if (t + h > t_end || t_end - (t + h) < h_min) h = t_end - t;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs_(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs_(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs_(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs_(t + h, ynew, k7);
    stats_.evaluations += 6;

    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    const double e = error_norm(err, y, ynew);
    ++stats_.steps;

    if (!(e <= 1.0)) {
      ++stats_.rejected;
      const double fac = std::isfinite(e) ? std::max(kMinFactor, kSafety * std::pow(e, -0.2)) : kMinFactor;
      h *= std::min(1.0, fac);
      last_rejected = true;
      continue;
    }

    dense.t0_ = t;
    dense.t1_ = t + h;
    dense.r1_ = y;
    dense.r2_.resize(n);
    dense.r3_.resize(n);
    dense.r4_.resize(n);
    dense.r5_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      dense.r2_[i] = ydiff;
      dense.r3_[i] = bspl;
      dense.r4_[i] = ydiff - h * k7[i] - bspl;
      dense.r5_[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }

    t = (t_end - (t + h) <= h_min) ? t_end : t + h;
    dense.t1_ = t;
    y.swap(ynew);
    const std::size_t before = static_cast<std::size_t>(stats_.clamped);
    enforce_nonnegative(y, t);
    if (static_cast<std::size_t>(stats_.clamped) != before) {
      rhs_(t, y, k7);
      ++stats_.evaluations;
    }
    k1.swap(k7);

    if (observer && !observer(dense)) return t;

    double fac = e == 0.0 ? kMaxFactor : kSafety * std::pow(e, -0.2);
    fac = std::clamp(fac, kMinFactor, kMaxFactor);
    if (last_rejected) fac = std::min(fac, 1.0);
    h *= fac;
    last_rejected = false;
  }
  return t;
}

GridSolution solve_on_grid(const OdeRhs& rhs, std::vector<double> y0, std::span<const double> grid,
                           const OdeOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("empty output grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("output grid must be increasing");
  }
  GridSolution out;
  out.times.assign(grid.begin(), grid.end());
  out.states.reserve(grid.size());
  out.states.push_back(y0);
  std::size_t next = 1;
  DormandPrince solver(rhs, opts);
  std::vector<double> y = std::move(y0);
  solver.integrate(y, grid.front(), grid.back(), [&](const DenseStep& step) {
    while (next < grid.size() && grid[next] <= step.t1()) {
      out.states.push_back(next + 1 == grid.size() && grid[next] == step.t1() ? std::vector<double>{}
                                                                               : step(grid[next]));
      ++next;
    }
    return true;
  });
  // The final grid point takes the step endpoint exactly (clamped state).
  if (!out.states.empty() && out.states.back().empty()) out.states.back() = y;
  while (out.states.size() < grid.size()) out.states.push_back(y);
  out.stats = solver.stats();
  return out;
}

std::vector<double> linear_grid(double t0, double t1, std::size_t intervals) {
  if (intervals == 0) throw std::invalid_argument("grid needs at least one interval");
  std::vector<double> g(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(intervals);
  }
  g.back() = t1;
  return g;
}

}  // namespace swarm
