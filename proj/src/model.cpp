#include "swarm/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace swarm {

ModelParams ModelParams::closed(int n, double beta, double gamma, double delta) {
  check_chunk_count(n);
  ModelParams p;
  p.n = n;
  p.alpha.assign(std::size_t{1} << n, 0.0);
  p.beta = beta;
  p.gamma = gamma;
  p.delta = delta;
  return p;
}

double ModelParams::alpha_total() const {
  double s = 0.0;
  for (double a : alpha) s += a;
  return s;
}

bool ModelParams::has_arrivals() const {
  return std::any_of(alpha.begin(), alpha.end(), [](double a) { return a > 0.0; });
}

std::string ModelParams::classification() const {
  if (is_open()) return "open";
  if (is_conservative()) return "conservative";
  if (is_dissipative()) return "dissipative";
  return "unbounded";
}

void ModelParams::validate() const {
  check_chunk_count(n);
  if (alpha.size() != dim()) {
    throw std::invalid_argument("alpha has " + std::to_string(alpha.size()) +
                                " entries, expected 2^n = " + std::to_string(dim()));
  }
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    if (!(alpha[a] >= 0.0) || !std::isfinite(alpha[a])) {
      throw std::invalid_argument("alpha" + label_string(n, static_cast<Mask>(a)) +
                                  " must be a finite nonnegative rate");
    }
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be >= 0");
}

ModelParams ModelParams::scaled(double N) const {
  if (!(N > 0.0)) throw std::invalid_argument("scale N must be positive");
  ModelParams p = *this;
  for (double& a : p.alpha) a *= N;
  p.beta /= N;
  p.gamma /= N;
  return p;
}

double download_rate(const ModelParams& p, std::span<const double> x, Mask a, Mask a_prime) {
  if (!mask_covers(a, a_prime)) return 0.0;
  const Mask rest = p.full() & ~a_prime;
  double s = 0.0;
  // C ranges over supersets of A': C = A' | sub for sub a submask of the complement.
  for (Mask sub = rest;; sub = (sub - 1) & rest) {
    const Mask c = a_prime | sub;
    s += x[c] / popcount(c & ~a);
    if (sub == 0) break;
  }
  return p.beta * x[a] * s;
}

double swap_rate(const ModelParams& p, std::span<const double> x, Mask a, Mask b) {
  if (mask_relates(a, b)) return 0.0;
  return p.gamma * x[a] * x[b] / (popcount(a & ~b) * popcount(b & ~a));
}

std::string to_string(JumpKind k) {
  switch (k) {
    case JumpKind::arrival: return "arrival";
    case JumpKind::departure: return "departure";
    case JumpKind::download: return "download";
    case JumpKind::swap: return "swap";
  }
  return "?";
}

std::vector<std::int32_t> JumpVector::dense(std::size_t dim) const {
  std::vector<std::int32_t> out(dim, 0);
  for (auto [idx, d] : delta) out[static_cast<std::size_t>(idx)] += d;
  return out;
}

int JumpVector::net_change() const {
  int s = 0;
  for (auto [idx, d] : delta) s += d;
  return s;
}

int JumpVector::norm() const {
  int s = 0;
  for (auto [idx, d] : delta) s += std::abs(d);
  return s;
}

std::string JumpVector::describe(int n) const {
  std::ostringstream os;
  os << to_string(kind) << ' ';
  bool first = true;
  for (auto [idx, d] : delta) {
    if (!first) os << ' ';
    os << (d > 0 ? "+" : "") << d << "e" << label_string(n, static_cast<Mask>(idx));
    first = false;
  }
  return os.str();
}

namespace {

using DeltaKey = std::vector<std::pair<std::int32_t, std::int32_t>>;

DeltaKey make_delta(std::initializer_list<std::pair<Mask, int>> parts) {
  std::map<std::int32_t, std::int32_t> acc;
  for (auto [m, d] : parts) acc[static_cast<std::int32_t>(m)] += d;
  DeltaKey out;
  for (auto [idx, d] : acc) {
    if (d != 0) out.emplace_back(idx, d);
  }
  return out;
}

}  // namespace

JumpSet::JumpSet(const ModelParams& params, JumpSetOptions opts) : params_(params) {
  params_.validate();
  const int n = params_.n;
  const Mask full = params_.full();
  const std::size_t dim = params_.dim();
  if (params_.gamma > 0.0 && n > kMaxSwapChunks && !opts.allow_large) {
    throw std::length_error("swap-enabled jump set for n=" + std::to_string(n) +
                            " exceeds n=" + std::to_string(kMaxSwapChunks) +
                            "; set allow_large to build it anyway");
  }

  // Equal state changes from distinct generating tuples share one entry.
  std::map<DeltaKey, std::size_t> index;
  auto add = [&](JumpKind kind, DeltaKey delta, std::vector<Monomial> terms, Mask s0, Mask t0,
                 Mask s1 = 0, Mask t1 = 0) {
    auto it = index.find(delta);
    if (it == index.end()) {
      index.emplace(delta, jumps_.size());
      JumpVector z;
      z.kind = kind;
      z.source[0] = s0;
      z.source[1] = s1;
      z.target[0] = t0;
      z.target[1] = t1;
      z.delta = std::move(delta);
      z.rate_terms = std::move(terms);
      jumps_.push_back(std::move(z));
    } else {
      auto& dst = jumps_[it->second].rate_terms;
      dst.insert(dst.end(), terms.begin(), terms.end());
    }
  };

  for (std::size_t a = 0; a < dim; ++a) {
    if (params_.alpha[a] > 0.0) {
      add(JumpKind::arrival, make_delta({{static_cast<Mask>(a), +1}}),
          {Monomial{params_.alpha[a], kNoFactor, kNoFactor}}, 0, static_cast<Mask>(a));
    }
  }
  if (params_.delta > 0.0) {
    add(JumpKind::departure, make_delta({{full, -1}}),
        {Monomial{params_.delta, static_cast<std::int32_t>(full), kNoFactor}}, full, 0);
  }

  for (Mask a = 0; a < full; ++a) {
    for (int c = 0; c < n; ++c) {
      const Mask bit = Mask{1} << c;
      if (a & bit) continue;
      const Mask a_prime = a | bit;
      std::vector<Monomial> terms;
      const Mask rest = full & ~a_prime;
      for (Mask sub = rest;; sub = (sub - 1) & rest) {
        const Mask src = a_prime | sub;
        terms.push_back(Monomial{params_.beta / popcount(src & ~a),
                                 static_cast<std::int32_t>(a), static_cast<std::int32_t>(src)});
        if (sub == 0) break;
      }
      add(JumpKind::download, make_delta({{a, -1}, {a_prime, +1}}), std::move(terms), a, a_prime);
    }
  }

  if (params_.gamma > 0.0) {
    // Ordered tuples (A,B,A',B') with A < B; (B,A,B',A') is the same physical swap.
    for (Mask a = 0; a <= full; ++a) {
      for (Mask b = a + 1; b <= full; ++b) {
        if (mask_relates(a, b)) continue;
        const Mask a_only = a & ~b;
        const Mask b_only = b & ~a;
        const double coeff = params_.gamma / (popcount(a_only) * popcount(b_only));
        for (int j = 0; j < n; ++j) {
          if (!((b_only >> j) & 1u)) continue;
          for (int i = 0; i < n; ++i) {
            if (!((a_only >> i) & 1u)) continue;
            const Mask a_prime = a | (Mask{1} << j);
            const Mask b_prime = b | (Mask{1} << i);
            add(JumpKind::swap, make_delta({{a, -1}, {b, -1}, {a_prime, +1}, {b_prime, +1}}),
                {Monomial{coeff, static_cast<std::int32_t>(a), static_cast<std::int32_t>(b)}}, a,
                a_prime, b, b_prime);
          }
        }
      }
    }
  }
}

double total_rate(const JumpSet& jumps, std::span<const double> x) {
  return jumps.total_rate(x);
}

double apply_generator(const JumpSet& jumps, const StateFunctional& f, std::span<const double> x) {
  const double fx = f(x);
  std::vector<double> y(x.begin(), x.end());
  double out = 0.0;
  for (const auto& z : jumps) {
    const double q = z.rate(x);
    if (q == 0.0) continue;
    for (auto [idx, d] : z.delta) y[static_cast<std::size_t>(idx)] += d;
    out += (f(y) - fx) * q;
    for (auto [idx, d] : z.delta) y[static_cast<std::size_t>(idx)] -= d;
  }
  return out;
}

RateBound bound_polynomial(std::span<const Monomial> terms, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("rate-bound radius must be positive");
  const double B = radius;

  auto per_monomial = [&](const Monomial& m) {
    const double c = std::abs(m.coeff);
    switch (m.degree()) {
      case 0: return RateBound{c, 0.0, true};
      case 1: return RateBound{c * B, c, true};
      default:
        if (m.i == m.j) return RateBound{c * B * B, 2.0 * c * B, true};
        return RateBound{c * B * B / 4.0, c * B, true};
    }
  };

  if (terms.empty()) return RateBound{};
  const bool nonneg = std::all_of(terms.begin(), terms.end(),
                                  [](const Monomial& m) { return m.coeff >= 0.0; });
  const int deg = terms.front().degree();
  const bool same_degree = std::all_of(terms.begin(), terms.end(),
                                       [&](const Monomial& m) { return m.degree() == deg; });

  if (nonneg && same_degree) {
    if (deg == 0) {
      double s = 0.0;
      for (const auto& m : terms) s += m.coeff;
      return RateBound{s, 0.0, true};
    }
    if (deg == 1) {
      // Linear form: maximum at the vertex B*e_i with the largest merged coefficient.
      std::map<std::int32_t, double> merged;
      for (const auto& m : terms) merged[m.i != kNoFactor ? m.i : m.j] += m.coeff;
      double cmax = 0.0;
      for (auto [k, c] : merged) cmax = std::max(cmax, c);
      return RateBound{cmax * B, cmax, true};
    }
    // Quadratic with one variable shared by every monomial: x^a * sum_k c_k x^k.
    const bool no_squares = std::all_of(terms.begin(), terms.end(),
                                        [](const Monomial& m) { return m.i != m.j; });
    if (no_squares) {
      for (std::int32_t pivot : {terms.front().i, terms.front().j}) {
        const bool shared = std::all_of(terms.begin(), terms.end(), [&](const Monomial& m) {
          return m.i == pivot || m.j == pivot;
        });
        if (!shared) continue;
        std::map<std::int32_t, double> merged;
        for (const auto& m : terms) merged[m.i == pivot ? m.j : m.i] += m.coeff;
        double cmax = 0.0;
        for (auto [k, c] : merged) cmax = std::max(cmax, c);
        return RateBound{cmax * B * B / 4.0, cmax * B, true};
      }
    }
  }

  RateBound sum{0.0, 0.0, false};
  for (const auto& m : terms) {
    const RateBound b = per_monomial(m);
    sum.max_rate += b.max_rate;
    sum.lipschitz += b.lipschitz;
  }
  return sum;
}

std::vector<RateBound> estimate_rate_bounds(const JumpSet& jumps, double radius) {
  std::vector<RateBound> out;
  out.reserve(jumps.size());
  for (const auto& z : jumps) out.push_back(bound_polynomial(z.rate_terms, radius));
  return out;
}

}  // namespace swarm
