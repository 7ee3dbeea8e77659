#ifndef SWARM_MODEL_HPP
#define SWARM_MODEL_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "swarm/labels.hpp"

namespace swarm {

/// Integer peer counts per label, indexed by label mask.
using PopulationState = std::vector<std::int64_t>;
/// Real peer densities per label, indexed by label mask.
using DensityState = std::vector<double>;

/// Rates of the swarm chain. alpha is indexed by label mask (length 2^n).
struct ModelParams {
  int n = 1;
  std::vector<double> alpha;
  double beta = 1.0;
  double gamma = 0.0;
  double delta = 0.0;

  /// Zero arrivals for every label.
  static ModelParams closed(int n, double beta, double gamma, double delta);

  std::size_t dim() const { return std::size_t{1} << n; }
  Mask full() const { return full_mask(n); }
  double alpha_total() const;

  bool has_arrivals() const;
  bool is_closed() const { return !has_arrivals(); }
  bool is_open() const { return has_arrivals() && delta > 0.0; }
  bool is_conservative() const { return is_closed() && delta == 0.0; }
  bool is_dissipative() const { return is_closed() && delta > 0.0; }
  /// "open", "conservative", "dissipative" or "unbounded" (arrivals, no departures).
  std::string classification() const;

  /// Throws std::invalid_argument when any rate is out of its domain.
  void validate() const;

  /// The N-th member of the fluid-scaled sequence: (N alpha, beta/N, gamma/N, delta).
  ModelParams scaled(double N) const;
};

/// Download rate lambda_{A,A'}(x): zero unless A' covers A.
double download_rate(const ModelParams& p, std::span<const double> x, Mask a, Mask a_prime);
/// Swap rate mu_{A,B}(x): zero when A and B relate.
double swap_rate(const ModelParams& p, std::span<const double> x, Mask a, Mask b);

inline constexpr std::int32_t kNoFactor = -1;

/// coeff * x[i] * x[j]; an index of kNoFactor drops that factor.
struct Monomial {
  double coeff = 0.0;
  std::int32_t i = kNoFactor;
  std::int32_t j = kNoFactor;

  template <class T>
  double eval(std::span<const T> x) const {
    double v = coeff;
    if (i != kNoFactor) v *= static_cast<double>(x[static_cast<std::size_t>(i)]);
    if (j != kNoFactor) v *= static_cast<double>(x[static_cast<std::size_t>(j)]);
    return v;
  }
  int degree() const { return (i != kNoFactor) + (j != kNoFactor); }
};

enum class JumpKind { arrival, departure, download, swap };

std::string to_string(JumpKind k);

/// One element zeta of the jump set with its rate polynomial Q_zeta.
struct JumpVector {
  JumpKind kind = JumpKind::arrival;
  /// Generating tuple: source[k] becomes target[k]. Arrivals use target[0],
  /// departures source[0], downloads slot 0, swaps both slots.
  Mask source[2] = {0, 0};
  Mask target[2] = {0, 0};
  /// Sparse state change: (label index, signed count), sorted by index.
  std::vector<std::pair<std::int32_t, std::int32_t>> delta;
  std::vector<Monomial> rate_terms;

  template <class T>
  double rate(std::span<const T> x) const {
    double r = 0.0;
    for (const auto& m : rate_terms) r += m.eval(x);
    return r;
  }
  /// Dense zeta over 2^n labels.
  std::vector<std::int32_t> dense(std::size_t dim) const;
  /// Sum of the entries of zeta.
  int net_change() const;
  /// L1 norm of zeta.
  int norm() const;
  std::string describe(int n) const;
};

struct JumpSetOptions {
  /// Allows swap-enabled jump sets beyond kMaxSwapChunks.
  bool allow_large = false;
};

inline constexpr int kMaxSwapChunks = 10;

/// The jump set of a model, immutable once built.
class JumpSet {
 public:
  JumpSet(const ModelParams& params, JumpSetOptions opts = {});

  const ModelParams& params() const { return params_; }
  const std::vector<JumpVector>& jumps() const { return jumps_; }
  std::size_t size() const { return jumps_.size(); }
  const JumpVector& operator[](std::size_t k) const { return jumps_[k]; }
  auto begin() const { return jumps_.begin(); }
  auto end() const { return jumps_.end(); }

  template <class T>
  double total_rate(std::span<const T> x) const {
    double r = 0.0;
    for (const auto& z : jumps_) r += z.rate(x);
    return r;
  }
  /// Fills rates[k] = Q_k(x) and returns their sum.
  template <class T>
  double rates(std::span<const T> x, std::span<double> out) const {
    double r = 0.0;
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      out[k] = jumps_[k].rate(x);
      r += out[k];
    }
    return r;
  }

 private:
  ModelParams params_;
  std::vector<JumpVector> jumps_;
};

/// Convenience wrapper matching the jump-set construction operation.
inline JumpSet build_jump_set(const ModelParams& p, JumpSetOptions opts = {}) {
  return JumpSet(p, opts);
}

double total_rate(const JumpSet& jumps, std::span<const double> x);

using StateFunctional = std::function<double(std::span<const double>)>;

/// (Qf)(x) = sum_zeta (f(x+zeta) - f(x)) Q_zeta(x).
double apply_generator(const JumpSet& jumps, const StateFunctional& f, std::span<const double> x);

/// Sup of Q_zeta and a Lipschitz constant (w.r.t. the L1 norm) over {x >= 0, |x| <= B}.
struct RateBound {
  double max_rate = 0.0;
  double lipschitz = 0.0;
  /// False when the polynomial is not of a shape whose maximum is known in closed
  /// form; max_rate is then the (valid) sum of per-monomial maxima.
  bool exact = true;
};

RateBound bound_polynomial(std::span<const Monomial> terms, double radius);
std::vector<RateBound> estimate_rate_bounds(const JumpSet& jumps, double radius);

}  // namespace swarm

#endif  // SWARM_MODEL_HPP
