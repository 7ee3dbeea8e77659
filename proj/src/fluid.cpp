#include "swarm/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swarm {

namespace {

void check_state(const ModelParams& p, std::span<const double> x) {
  if (x.size() != p.dim()) {
    throw std::invalid_argument("state has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(p.dim()));
  }
}

// One component of v. Loops over every label B, so the whole field is O(4^n n).
double field_component(const ModelParams& p, std::span<const double> x, Mask a) {
  const Mask full = p.full();
  const int n = p.n;
  const int size_a = popcount(a);

  double drop[kMaxChunks];  // x^{A-a} per chunk a in A, 0 otherwise
  double psi_d = 0.0;
  for (int c = 0; c < n; ++c) {
    const Mask bit = Mask{1} << c;
    drop[c] = (a & bit) ? x[a & ~bit] : 0.0;
    psi_d += drop[c];
  }

  double phi_d = 0.0, phi_s = 0.0, gain_d = 0.0, gain_s = 0.0;
  const bool swaps = p.gamma > 0.0;
  for (Mask b = 0; b <= full; ++b) {
    const double xb = x[b];
    if (xb == 0.0) continue;
    if (mask_subset(a, b)) {
      const int extra = popcount(b) - size_a;
      gain_d += xb / (1 + extra);
      if (b != a) phi_d += xb;
    } else if (swaps) {
      if (!mask_subset(b, a)) phi_s += xb;
      const Mask common = a & b;
      if (common) {
        double psi_s = 0.0;
        for (Mask m = common; m; m &= m - 1) psi_s += drop[std::countr_zero(m)];
        gain_s += psi_s * xb / (1 + popcount(b & ~a));
      }
    }
  }

  double v = p.alpha[a] - x[a] * (p.beta * phi_d + p.gamma * phi_s) + p.beta * psi_d * gain_d +
             p.gamma * gain_s;
  if (a == full) v -= p.delta * x[full];
  return v;
}

}  // namespace

PhiPsi phi_psi(const ModelParams& p, std::span<const double> x, Mask a, std::optional<Mask> b) {
  check_state(p, x);
  PhiPsi out;
  for (Mask c = 0; c <= p.full(); ++c) {
    if (mask_subset(a, c) && c != a) out.phi_d += x[c];
    if (!mask_relates(a, c)) out.phi_s += x[c];
  }
  for (Mask m = a; m; m &= m - 1) out.psi_d += x[a & ~(m & -m)];
  if (b) {
    for (Mask m = a & *b; m; m &= m - 1) out.psi_s += x[a & ~(m & -m)];
  }
  return out;
}

void vector_field_serial(const ModelParams& p, std::span<const double> x, std::span<double> out) {
  check_state(p, x);
  for (Mask a = 0; a <= p.full(); ++a) out[a] = field_component(p, x, a);
}

void vector_field(const ModelParams& p, std::span<const double> x, std::span<double> out) {
  check_state(p, x);
  const long long dim = static_cast<long long>(p.dim());
  // Small fields are cheaper than a thread-team wakeup.
#pragma omp parallel for schedule(static) if (dim >= 64)
  for (long long a = 0; a < dim; ++a) {
    out[static_cast<std::size_t>(a)] = field_component(p, x, static_cast<Mask>(a));
  }
}

std::vector<double> vector_field(const ModelParams& p, std::span<const double> x) {
  std::vector<double> out(p.dim());
  vector_field(p, x, out);
  return out;
}

std::vector<double> drift_oracle(const JumpSet& jumps, std::span<const double> x) {
  check_state(jumps.params(), x);
  std::vector<double> u(x.size(), 0.0);
  for (const auto& z : jumps) {
    const double q = z.rate(x);
    for (auto [idx, d] : z.delta) u[static_cast<std::size_t>(idx)] += d * q;
  }
  return u;
}

Eigen::MatrixXd jacobian(const ModelParams& p, std::span<const double> x) {
  check_state(p, x);
  const Mask full = p.full();
  const int n = p.n;
  const long long dim = static_cast<long long>(p.dim());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);

#pragma omp parallel for schedule(static) if (dim >= 64)
  for (long long row = 0; row < dim; ++row) {
    const Mask a = static_cast<Mask>(row);
    const int size_a = popcount(a);
    double psi_d = 0.0;
    for (Mask m = a; m; m &= m - 1) psi_d += x[a & ~(m & -m)];

    double phi_d = 0.0, phi_s = 0.0, gain_d = 0.0;
    double swap_partner[kMaxChunks] = {};  // sum over B with a in B, A not in B, of x^B w_AB
    for (Mask b = 0; b <= full; ++b) {
      const double xb = x[b];
      if (mask_subset(a, b)) {
        const double w = 1.0 / (1 + popcount(b) - size_a);
        gain_d += xb * w;
        if (b != a) {
          phi_d += xb;
          J(row, b) -= p.beta * x[a];
        }
        J(row, b) += p.beta * psi_d * w;
      } else if (p.gamma > 0.0) {
        if (!mask_subset(b, a)) {
          phi_s += xb;
          J(row, b) -= p.gamma * x[a];
        }
        const Mask common = a & b;
        if (common) {
          const double w = 1.0 / (1 + popcount(b & ~a));
          double psi_s = 0.0;
          for (Mask m = common; m; m &= m - 1) {
            const int c = std::countr_zero(m);
            psi_s += x[a & ~(Mask{1} << c)];
            swap_partner[c] += xb * w;
          }
          J(row, b) += p.gamma * psi_s * w;
        }
      }
    }
    J(row, row) -= p.beta * phi_d + p.gamma * phi_s;
    for (int c = 0; c < n; ++c) {
      const Mask bit = Mask{1} << c;
      if (!(a & bit)) continue;
      J(row, a & ~bit) += p.beta * gain_d + p.gamma * swap_partner[c];
    }
    if (a == full) J(row, row) -= p.delta;
  }
  return J;
}

double v_plus_full(const ModelParams& p, std::span<const double> x) {
  check_state(p, x);
  const Mask full = p.full();
  double s = 0.0;
  for (int j = 0; j < p.n; ++j) s += p.beta * x[full] * x[full & ~(Mask{1} << j)];
  if (p.gamma > 0.0) {
    for (Mask b = 0; b < full; ++b) {
      for (Mask m = b; m; m &= m - 1) s += p.gamma * x[b] * x[full & ~(m & -m)];
    }
  }
  return s;
}

OdeRhs fluid_rhs(const ModelParams& p) {
  return [p](double, std::span<const double> y, std::span<double> dy) { vector_field(p, y, dy); };
}

OdeOptions fluid_ode_options(const ModelParams& p, const FluidOptions& opts) {
  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  o.tol_neg = opts.tol_neg;
  o.nonneg_prefix = p.dim();
  return o;
}

FluidTrajectory integrate(const ModelParams& p, const DensityState& x0, std::span<const double> grid,
                          const FluidOptions& opts) {
  p.validate();
  check_state(p, x0);
  for (double v : x0) {
    if (!(v >= 0.0)) throw std::invalid_argument("initial density must be nonnegative");
  }
  GridSolution sol = solve_on_grid(fluid_rhs(p), x0, grid, fluid_ode_options(p, opts));
  return FluidTrajectory{std::move(sol.times), std::move(sol.states), sol.stats};
}

FluidTrajectory integrate(const ModelParams& p, const DensityState& x0, double T,
                          std::size_t intervals, const FluidOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  const auto grid = linear_grid(0.0, T, intervals);
  return integrate(p, x0, grid, opts);
}

DensityState flow(const ModelParams& p, DensityState x0, double T, const FluidOptions& opts) {
  p.validate();
  check_state(p, x0);
  DormandPrince solver(fluid_rhs(p), fluid_ode_options(p, opts));
  solver.integrate(x0, 0.0, T);
  return x0;
}

FluidPath::FluidPath(const ModelParams& p, DensityState x0, double T, const FluidOptions& opts)
    : x0_(x0), horizon_(T) {
  p.validate();
  check_state(p, x0);
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  DormandPrince solver(fluid_rhs(p), fluid_ode_options(p, opts));
  solver.integrate(x0, 0.0, T, [&](const DenseStep& step) {
    steps_.push_back(step);
    return true;
  });
  x_end_ = std::move(x0);
  stats_ = solver.stats();
}

void FluidPath::at(double t, std::span<double> out) const {
  if (t <= 0.0 || steps_.empty()) {
    std::copy(x0_.begin(), x0_.end(), out.begin());
    return;
  }
  if (t >= horizon_) {
    std::copy(x_end_.begin(), x_end_.end(), out.begin());
    return;
  }
  auto it = std::lower_bound(steps_.begin(), steps_.end(), t,
                             [](const DenseStep& s, double v) { return s.t1() < v; });
  if (it == steps_.end()) --it;
  it->eval(t, out);
}

DensityState FluidPath::at(double t) const {
  DensityState out(x0_.size());
  at(t, out);
  return out;
}

double closed_form_logistic(double x0, double beta, double t) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::invalid_argument("logistic start must lie in [0, 1]");
  const double e = std::exp(-beta * t);
  return x0 * e / (x0 * e + (1.0 - x0));
}

double sir_integral(double x, double x0, double y0, double beta, double delta) {
  if (!(x > 0.0) || !(x0 > 0.0)) throw std::domain_error("SIR integral needs x > 0 and x0 > 0");
  return (x0 + y0) + (delta / beta) * std::log(x / x0) - x;
}

double sir_final_size(double x0, double y0, double beta, double delta) {
  if (!(x0 > 0.0) || !(y0 >= 0.0) || !(beta > 0.0) || !(delta > 0.0)) {
    throw std::domain_error("SIR final size needs x0 > 0, y0 >= 0, beta > 0, delta > 0");
  }
  if (y0 == 0.0) return x0;
  auto g = [&](double x) { return sir_integral(x, x0, y0, beta, delta); };
  double hi = std::min(x0, delta / beta);
  double lo = hi;
  while (g(lo) > 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

Case1State closed_form_case1(double x0, double u0, double w0, double beta, double t) {
  if (!(w0 > 0.0)) throw std::domain_error("closed form for w needs w0 > 0");
  if (std::abs(x0 + u0 + w0 - 1.0) > 1e-12 || x0 < 0.0 || u0 < 0.0) {
    throw std::invalid_argument("closed form needs nonnegative x0 + u0 + w0 = 1");
  }
  // Numerator and denominator scaled by exp(-beta t) so large t stays finite.
  const double e = std::exp(-beta * t);
  const double d = x0 * e + (1.0 - x0);
  Case1State s;
  s.x = closed_form_logistic(x0, beta, t);
  s.w = d / (d + (x0 * beta * t + (1.0 - w0) / w0) * e);
  s.u = 1.0 - s.x - s.w;
  return s;
}

}  // namespace swarm
