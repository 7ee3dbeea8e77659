#include "swarm/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "swarm/incentives.hpp"

namespace swarm {

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

namespace {

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
}

// Strongly connected components of the nonzero pattern (Tarjan). A symmetric
// permutation by components makes J block triangular, so its spectrum is the
// union of the diagonal blocks' spectra; 1x1 blocks are then exact. Entries at
// or below eps |J| count as zero, the level at which QR deflates anyway.
std::vector<std::vector<Eigen::Index>> pattern_components(const Eigen::MatrixXd& J) {
  const Eigen::Index n = J.rows();
  const double negligible = std::numeric_limits<double>::epsilon() * J.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<Eigen::Index>> comps;
  Eigen::Index counter = 0;
  // Iterative DFS: (vertex, next column to scan).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> frames;
  for (Eigen::Index root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      bool descended = false;
      for (; next < n; ++next) {
        if (next == v || std::abs(J(v, next)) <= negligible) continue;
        const Eigen::Index w = next;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          ++next;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      const Eigen::Index done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<Eigen::Index> comp;
        Eigen::Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

std::vector<std::complex<double>> spectrum(const Eigen::MatrixXd& J) {
  std::vector<std::complex<double>> out;
  for (const auto& comp : pattern_components(J)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    if (k == 1) {
      out.emplace_back(J(comp[0], comp[0]), 0.0);
      continue;
    }
    Eigen::MatrixXd block(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) block(i, j) = J(comp[i], comp[j]);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(block, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
    for (Eigen::Index i = 0; i < k; ++i) out.push_back(es.eigenvalues()(i));
  }
  return out;
}

}  // namespace

EquilibriumReport classify_point(const ModelParams& p, const DensityState& x, double eig_tol) {
  EquilibriumReport r;
  r.x_star = x;
  r.residual = l1(vector_field(p, x));
  bool any_positive = false, any_zero = false;
  for (const std::complex<double> e : spectrum(jacobian(p, x))) {
    r.eigenvalues.push_back(e);
    if (e.real() > eig_tol) any_positive = true;
    else if (e.real() >= -eig_tol) any_zero = true;
    if (std::abs(e.imag()) > eig_tol) r.spiral = true;
  }
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  r.stability = any_positive ? Stability::unstable : any_zero ? Stability::marginal : Stability::stable;
  return r;
}

namespace {

struct NewtonOutcome {
  DensityState x;
  double residual = 0.0;
  int iterations = 0;
  bool singular = false;
};

NewtonOutcome damped_newton(const ModelParams& p, DensityState x, const NewtonOptions& opts) {
  std::vector<double> f = vector_field(p, x);
  double res = l1(f);
  int it = 0;
  bool singular = false;
  DensityState trial(x.size());
  // Past the tolerance a few more steps are taken while they still reduce the
  // residual: eigenvalues at defective points are sensitive to tiny state errors.
  int polish = 0;
  for (; it < opts.max_iter && res > 0.0 && (res > opts.tol || polish++ < opts.polish_steps); ++it) {
    const Eigen::MatrixXd J = jacobian(p, x);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    if (cod.rank() < J.rows()) singular = true;
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    const Eigen::VectorXd step = cod.solve(rhs);

    bool accepted = false;
    double scale = 1.0;
    for (int h = 0; h < 40; ++h, scale *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        trial[i] = std::max(0.0, x[i] + scale * step(static_cast<Eigen::Index>(i)));
      }
      std::vector<double> ft = vector_field(p, trial);
      const double rt = l1(ft);
      if (rt < res) {
        x = trial;
        f = std::move(ft);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return {std::move(x), res, it, singular};
}

}  // namespace

EquilibriumReport find_equilibrium_general(const ModelParams& p, const DensityState& x_guess,
                                           const NewtonOptions& opts) {
  p.validate();
  if (x_guess.size() != p.dim()) throw std::invalid_argument("guess has wrong dimension");
  for (double v : x_guess) {
    if (!(v >= 0.0)) throw std::invalid_argument("guess must be nonnegative");
  }
  DensityState start = x_guess;
  double flowed = 0.0;
  if (opts.warmup > 0.0) {
    start = flow(p, start, opts.warmup);
    flowed = opts.warmup;
  }
  NewtonOutcome out = damped_newton(p, start, opts);
  for (double leg = 1.0; !(out.residual <= opts.tol) && opts.flow_fallback && leg <= 256.0; leg *= 4.0) {
    start = flow(p, start, leg);
    flowed += leg;
    out = damped_newton(p, start, opts);
  }
  if (!(out.residual <= opts.tol)) {
    throw EquilibriumNotFound("Newton stopped after " + std::to_string(out.iterations) +
                              " iterations with residual " + std::to_string(out.residual));
  }
  EquilibriumReport r = classify_point(p, out.x, opts.eig_tol);
  r.iterations = out.iterations;
  r.singular_jacobian = out.singular;
  r.flowed_time = flowed;
  return r;
}

std::vector<EquilibriumReport> find_equilibria_multistart(const ModelParams& p,
                                                          const std::vector<DensityState>& guesses,
                                                          const NewtonOptions& opts, double merge_tol) {
  std::vector<EquilibriumReport> found;
  for (const auto& g : guesses) {
    try {
      EquilibriumReport r = find_equilibrium_general(p, g, opts);
      const bool seen = std::any_of(found.begin(), found.end(), [&](const EquilibriumReport& e) {
        return l1_distance(e.x_star, r.x_star) <= merge_tol;
      });
      if (!seen) found.push_back(std::move(r));
    } catch (const EquilibriumNotFound&) {
    }
  }
  return found;
}

SingleChunkEquilibrium equilibrium_n1_open(double lambda, double beta, double delta) {
  require_positive(lambda, "lambda");
  require_positive(beta, "beta");
  require_positive(delta, "delta");
  return {delta / beta, lambda / delta, lambda * beta < 4.0 * delta * delta};
}

DensityState equilibrium_n2_open(double lambda, double beta_t, double gamma_t, double delta) {
  require_positive(lambda, "lambda");
  require_positive(beta_t, "beta_t");
  require_positive(gamma_t, "gamma_t");
  require_positive(delta, "delta");
  const double u = q_root(lambda, beta_t, gamma_t, delta);
  const double empty = (delta / beta_t) / (delta * u / lambda + 1.0);
  return {empty, u / 2.0, u / 2.0, lambda / delta};
}

double settling_equation(double tau, double x0, double w0, double beta, double eps) {
  return (1.0 - w0) / w0 + x0 * beta * tau -
         eps / (1.0 - eps) * (x0 + (1.0 - x0) * std::exp(beta * tau));
}

double settling_time_case1(double x0, double w0, double beta, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(w0 > 0.0 && w0 <= 1.0)) throw std::invalid_argument("w0 must lie in (0, 1]");
  if (!(x0 >= 0.0 && x0 < 1.0)) throw std::invalid_argument("x0 must lie in [0, 1)");
  require_positive(beta, "beta");
  if (w0 >= 1.0 - eps) return 0.0;

  auto g = [&](double t) { return settling_equation(t, x0, w0, beta, eps); };
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > std::ldexp(1.0, 40)) throw std::domain_error("no sign change in the settling bracket");
  }
  for (int i = 0; i < 300 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
}

double settling_lower_bound(double x0_norm, double alpha_norm, double x_star_norm, double r,
                            double delta) {
  require_positive(delta, "delta");
  require_positive(r, "r");
  const double ratio = (x0_norm + alpha_norm) / (x_star_norm + r);
  return ratio <= 1.0 ? 0.0 : std::log(ratio) / delta;
}

double norm_decay_lower_bound(double x0_norm, double x_star_norm, double r, double delta) {
  return settling_lower_bound(x0_norm, 0.0, x_star_norm, r, delta);
}

double settling_upper_bound(double x0_full, double vbar, double delta, double r) {
  require_positive(r, "r");
  if (!(vbar < delta)) {
    throw BoundInapplicable("seed inflow rate " + std::to_string(vbar) + " is not below delta " +
                            std::to_string(delta));
  }
  if (x0_full <= r) return 0.0;
  return std::log(x0_full / r) / (delta - vbar);
}

double seed_inflow_rate_bound(const ModelParams& p, double radius) {
  if (p.gamma > 0.0 && p.n >= 2) {
    throw BoundInapplicable("swap inflow into the full label has no seed factor");
  }
  const Mask full = p.full();
  std::vector<Monomial> terms;
  for (int j = 0; j < p.n; ++j) {
    terms.push_back({p.beta, static_cast<std::int32_t>(full & ~(Mask{1} << j)), kNoFactor});
  }
  return bound_polynomial(terms, radius).max_rate;
}

std::optional<double> first_entry_time(const ModelParams& p, const DensityState& x0,
                                       std::span<const double> target, double r, double t_max,
                                       const FluidOptions& opts) {
  if (target.size() != p.dim()) throw std::invalid_argument("target has wrong dimension");
  if (l1_distance(x0, target) <= r) return 0.0;
  DormandPrince solver(fluid_rhs(p), fluid_ode_options(p, opts));
  std::optional<double> hit;
  std::vector<double> buf(p.dim());
  auto dist = [&](const DenseStep& s, double t) {
    s.eval(t, buf);
    return l1_distance(buf, target);
  };
  DensityState y = x0;
  constexpr int kSamples = 32;
  solver.integrate(y, 0.0, t_max, [&](const DenseStep& s) {
    double prev = s.t0();
    for (int k = 1; k <= kSamples; ++k) {
      const double t = s.t0() + (s.t1() - s.t0()) * k / kSamples;
      if (dist(s, t) <= r) {
        double lo = prev, hi = t;
        for (int i = 0; i < 80; ++i) {
          const double mid = 0.5 * (lo + hi);
          (dist(s, mid) <= r ? hi : lo) = mid;
        }
        hit = hi;
        return false;
      }
      prev = t;
    }
    return true;
  });
  return hit;
}

std::vector<std::pair<double, double>> seed_inflow_trace(const ModelParams& p, const DensityState& x0,
                                                         double T, std::size_t intervals,
                                                         const FluidOptions& opts) {
  const FluidTrajectory traj = integrate(p, x0, T, intervals, opts);
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out.emplace_back(traj.times[k], v_plus_full(p, traj.states[k]));
  }
  return out;
}

ThreeState two_chunk_field(const ThreeState& s, double rho, double lambda) {
  const auto [x, u, w] = s;
  return {-x * (u + w), -u * w + x * (u + w), lambda + u * w - rho * w};
}

Eigen::Matrix3d two_chunk_jacobian(const ThreeState& s, double rho) {
  const auto [x, u, w] = s;
  Eigen::Matrix3d J;
  J << -(u + w), -x, -x,
       u + w, x - w, x - u,
       0.0, w, u - rho;
  return J;
}

ThreeState two_chunk_flow(ThreeState s, double rho, double lambda, double T, const FluidOptions& opts) {
  OdeOptions o;
  o.rtol = opts.rtol;
  o.atol = opts.atol;
  o.tol_neg = opts.tol_neg;
  o.nonneg_prefix = 3;
  DormandPrince solver(
      [rho, lambda](double, std::span<const double> y, std::span<double> dy) {
        const ThreeState v = two_chunk_field({y[0], y[1], y[2]}, rho, lambda);
        std::copy(v.begin(), v.end(), dy.begin());
      },
      o);
  std::vector<double> y(s.begin(), s.end());
  solver.integrate(y, 0.0, T);
  return {y[0], y[1], y[2]};
}

ReducedState reduce_symmetric(int n, std::span<const double> x) {
  check_chunk_count(n);
  if (x.size() != (std::size_t{1} << n)) throw std::invalid_argument("state has wrong dimension");
  ReducedState z(static_cast<std::size_t>(n) + 1, 0.0);
  for (Mask a = 0; a < x.size(); ++a) z[static_cast<std::size_t>(popcount(a))] += x[a];
  return z;
}

DensityState lift_symmetric(int n, std::span<const double> z) {
  check_chunk_count(n);
  if (z.size() != static_cast<std::size_t>(n) + 1) throw std::invalid_argument("reduced state has wrong size");
  DensityState x(std::size_t{1} << n);
  for (Mask a = 0; a < x.size(); ++a) {
    const int k = popcount(a);
    x[a] = z[static_cast<std::size_t>(k)] / binomial(n, k);
  }
  return x;
}

bool is_size_symmetric(int n, std::span<const double> x, double tol) {
  const DensityState lifted = lift_symmetric(n, reduce_symmetric(n, x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - lifted[i]) > tol * std::max(1.0, std::abs(lifted[i]))) return false;
  }
  return true;
}

ReducedState reduced_vector_field(const ModelParams& p, std::span<const double> z) {
  return reduce_symmetric(p.n, vector_field(p, lift_symmetric(p.n, z)));
}

FluidTrajectory integrate_reduced(const ModelParams& p, const DensityState& x0,
                                  std::span<const double> grid, const FluidOptions& opts) {
  p.validate();
  if (!is_size_symmetric(p.n, p.alpha)) {
    throw std::invalid_argument("arrival rates depend on more than the label size");
  }
  if (!is_size_symmetric(p.n, x0)) {
    throw std::invalid_argument("initial state depends on more than the label size");
  }
  OdeOptions o = fluid_ode_options(p, opts);
  o.nonneg_prefix = static_cast<std::size_t>(p.n) + 1;
  const OdeRhs rhs = [&p](double, std::span<const double> z, std::span<double> dz) {
    const ReducedState v = reduced_vector_field(p, z);
    std::copy(v.begin(), v.end(), dz.begin());
  };
  GridSolution sol = solve_on_grid(rhs, reduce_symmetric(p.n, x0), grid, o);
  return FluidTrajectory{std::move(sol.times), std::move(sol.states), sol.stats};
}

}  // namespace swarm
