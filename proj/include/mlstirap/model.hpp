#pragma once

// Problem definition for the parallel multi-Lambda system: static couplings,
// pulse envelopes, the RWA Hamiltonian and the closed-form determinant.
//
// Basis order is always (i, 1..N, f). Frequencies are measured in units of the
// peak Rabi frequency omega0, times in units of 1/omega0.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlstirap/error.hpp"

namespace mlstirap {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Static definition of the N intermediate states: relative pump and Stokes
/// coupling strengths plus single-photon detunings.
class MultiLambdaSystem {
 public:
  /// Builds a validated system. The first intermediate state fixes the
  /// coupling units, so alphas[0] and betas[0] must both be exactly 1.
  static MultiLambdaSystem create(std::vector<double> alphas, std::vector<double> betas,
                                  std::vector<double> detunings) {
    MultiLambdaSystem sys(std::move(alphas), std::move(betas), std::move(detunings));
    sys.validate(true);
    return sys;
  }

  /// Same as create() but without the alphas[0] == betas[0] == 1 convention.
  /// Reduced (effective) systems carry rescaled couplings on their first state.
  static MultiLambdaSystem create_unnormalized(std::vector<double> alphas,
                                               std::vector<double> betas,
                                               std::vector<double> detunings) {
    MultiLambdaSystem sys(std::move(alphas), std::move(betas), std::move(detunings));
    sys.validate(false);
    return sys;
  }

  std::size_t size() const noexcept { return detunings_.size(); }
  std::size_t dimension() const noexcept { return detunings_.size() + 2; }

  double alpha(std::size_t k) const { return alphas_.at(k); }
  double beta(std::size_t k) const { return betas_.at(k); }
  double detuning(std::size_t k) const { return detunings_.at(k); }

  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> betas() const noexcept { return betas_; }
  std::span<const double> detunings() const noexcept { return detunings_; }

  /// Copy with every detuning shifted by the same amount (two-photon
  /// resonance is preserved).
  MultiLambdaSystem with_common_shift(double shift) const {
    MultiLambdaSystem out = *this;
    for (double& d : out.detunings_) d += shift;
    return out;
  }

  MultiLambdaSystem with_detunings(std::vector<double> detunings) const {
    MultiLambdaSystem out = *this;
    out.detunings_ = std::move(detunings);
    out.validate(false);
    return out;
  }

 private:
  MultiLambdaSystem(std::vector<double> alphas, std::vector<double> betas,
                    std::vector<double> detunings)
      : alphas_(std::move(alphas)), betas_(std::move(betas)), detunings_(std::move(detunings)) {}

  void validate(bool normalized) const {
    if (detunings_.empty())
      throw Error(ErrorCode::InvalidArgument, "at least one intermediate state is required");
    if (alphas_.size() != detunings_.size() || betas_.size() != detunings_.size())
      throw Error(ErrorCode::InvalidArgument, "alphas, betas and detunings must all have length N");
    for (std::size_t k = 0; k < detunings_.size(); ++k) {
      if (!(alphas_[k] > 0.0) || !(betas_[k] > 0.0) || !std::isfinite(alphas_[k]) ||
          !std::isfinite(betas_[k]))
        throw Error(ErrorCode::InvalidArgument,
                    "coupling strengths must be finite and strictly positive (state " +
                        std::to_string(k + 1) + ")");
      if (!std::isfinite(detunings_[k]))
        throw Error(ErrorCode::InvalidArgument, "detunings must be finite");
    }
    if (normalized && (alphas_[0] != 1.0 || betas_[0] != 1.0))
      throw Error(ErrorCode::InvalidArgument, "alphas[0] and betas[0] must equal 1");
  }

  std::vector<double> alphas_;
  std::vector<double> betas_;
  std::vector<double> detunings_;
};

enum class PulseShape { Gaussian };

struct Envelopes {
  double pump = 0.0;
  double stokes = 0.0;
};

/// Pump and Stokes envelopes. The pump is centred at +delay, the Stokes at
/// -delay, so delay > 0 means counterintuitive ordering.
struct PulsePair {
  double omega0 = 1.0;
  double width = 1.0;
  double delay = 0.5;
  PulseShape shape = PulseShape::Gaussian;

  static PulsePair gaussian(double omega0, double width, double delay) {
    PulsePair p{omega0, width, delay, PulseShape::Gaussian};
    p.validate();
    return p;
  }

  /// Gaussian pair with the conventional delay of half a width.
  static PulsePair gaussian(double omega0, double width) {
    return gaussian(omega0, width, 0.5 * width);
  }

  void validate() const {
    if (!(omega0 > 0.0) || !(width > 0.0) || !(delay > 0.0) || !std::isfinite(omega0) ||
        !std::isfinite(width) || !std::isfinite(delay))
      throw Error(ErrorCode::InvalidArgument, "omega0, width and delay must be finite and > 0");
  }

  double pump(double t) const { return profile(t - delay); }
  double stokes(double t) const { return profile(t + delay); }

  double pump_rate(double t) const { return profile_rate(t - delay); }
  double stokes_rate(double t) const { return profile_rate(t + delay); }

  /// Half-length of the default integration window, 4 widths past the
  /// later pulse centre.
  double default_half_window() const { return 4.0 * width + delay; }

 private:
  double profile(double s) const {
    const double x = s / width;
    return omega0 * std::exp(-x * x);
  }
  double profile_rate(double s) const {
    return -2.0 * s / (width * width) * profile(s);
  }
};

inline Envelopes pulse_values(const PulsePair& pulses, double t) {
  return {pulses.pump(t), pulses.stokes(t)};
}

/// Probability amplitudes ordered (c_i, c_1, ..., c_N, c_f).
struct StateVector {
  ComplexVector amplitudes;

  static StateVector initial(std::size_t n_intermediate) {
    StateVector s{ComplexVector::Zero(static_cast<Eigen::Index>(n_intermediate + 2))};
    s.amplitudes(0) = 1.0;
    return s;
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
  double population(std::size_t m) const {
    return std::norm(amplitudes(static_cast<Eigen::Index>(m)));
  }
  double initial_population() const { return population(0); }
  double final_population() const { return population(size() - 1); }

  double intermediate_population() const {
    double sum = 0.0;
    for (std::size_t m = 1; m + 1 < size(); ++m) sum += population(m);
    return sum;
  }
};

/// H in the (i, 1..N, f) basis for the given envelope values.
inline RealMatrix build_hamiltonian(const MultiLambdaSystem& sys, double pump, double stokes) {
  const auto n = static_cast<Eigen::Index>(sys.size());
  RealMatrix h = RealMatrix::Zero(n + 2, n + 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double p = sys.alpha(ku) * pump;
    const double s = sys.beta(ku) * stokes;
    h(0, k + 1) = p;
    h(k + 1, 0) = p;
    h(k + 1, n + 1) = s;
    h(n + 1, k + 1) = s;
    h(k + 1, k + 1) = sys.detuning(ku);
  }
  return h;
}

inline RealMatrix build_hamiltonian(const MultiLambdaSystem& sys, const PulsePair& pulses,
                                    double t) {
  const Envelopes e = pulse_values(pulses, t);
  return build_hamiltonian(sys, e.pump, e.stokes);
}

/// Indices k (0-based) with an exactly vanishing detuning.
inline std::vector<std::size_t> resonant_indices(const MultiLambdaSystem& sys) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < sys.size(); ++k)
    if (sys.detuning(k) == 0.0) out.push_back(k);
  return out;
}

/// True when alpha_k/beta_k is the same for every listed state, compared as
/// cross products to relative tolerance `rel_tol`. An empty list selects all
/// states.
inline bool couplings_proportional(const MultiLambdaSystem& sys,
                                   std::span<const std::size_t> indices = {},
                                   double rel_tol = 1e-12) {
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  if (idx.empty())
    for (std::size_t k = 0; k < sys.size(); ++k) idx.push_back(k);
  if (idx.size() < 2) return true;
  const double a0 = sys.alpha(idx.front());
  const double b0 = sys.beta(idx.front());
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const double lhs = sys.alpha(idx[j]) * b0;
    const double rhs = a0 * sys.beta(idx[j]);
    if (std::abs(lhs - rhs) > rel_tol * (std::abs(lhs) + std::abs(rhs))) return false;
  }
  return true;
}

struct SSums {
  double s_a2 = 0.0;
  double s_b2 = 0.0;
  double s_ab = 0.0;
  std::optional<std::size_t> excluded_index;

  double gram() const { return s_a2 * s_b2 - s_ab * s_ab; }
};

/// Sums of alpha^2/Delta, beta^2/Delta and alpha*beta/Delta over all states
/// except `excluded` (when given). Every included detuning must be nonzero.
inline SSums s_sums(const MultiLambdaSystem& sys, std::optional<std::size_t> excluded = {}) {
  if (excluded && *excluded >= sys.size())
    throw Error(ErrorCode::InvalidArgument, "excluded index out of range");
  SSums out;
  out.excluded_index = excluded;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (excluded && k == *excluded) continue;
    const double d = sys.detuning(k);
    if (d == 0.0)
      throw Error(ErrorCode::ZeroDetuningInSum,
                  "detuning of state " + std::to_string(k + 1) + " is exactly zero");
    const double a = sys.alpha(k), b = sys.beta(k);
    out.s_a2 += a * a / d;
    out.s_b2 += b * b / d;
    out.s_ab += a * b / d;
  }
  return out;
}

/// Magnitude scales of the three sums (the same sums with |Delta_k|), used
/// for relative zero tests.
inline SSums s_sum_scales(const MultiLambdaSystem& sys, std::optional<std::size_t> excluded = {}) {
  SSums out;
  out.excluded_index = excluded;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (excluded && k == *excluded) continue;
    const double d = std::abs(sys.detuning(k));
    if (d == 0.0)
      throw Error(ErrorCode::ZeroDetuningInSum,
                  "detuning of state " + std::to_string(k + 1) + " is exactly zero");
    const double a = sys.alpha(k), b = sys.beta(k);
    out.s_a2 += a * a / d;
    out.s_b2 += b * b / d;
    out.s_ab += a * b / d;
  }
  return out;
}

/// Products of detunings with zero, one or two factors left out.
class DetuningProducts {
 public:
  explicit DetuningProducts(const MultiLambdaSystem& sys)
      : detunings_(sys.detunings().begin(), sys.detunings().end()) {}

  double d_full() const { return product_except(detunings_.size(), detunings_.size()); }
  double d_excl_one(std::size_t n) const { return product_except(n, detunings_.size()); }
  double d_excl_two(std::size_t m, std::size_t n) const { return product_except(m, n); }

 private:
  double product_except(std::size_t m, std::size_t n) const {
    double p = 1.0;
    for (std::size_t k = 0; k < detunings_.size(); ++k)
      if (k != m && k != n) p *= detunings_[k];
    return p;
  }

  std::vector<double> detunings_;
};

namespace detail {

inline double cross(const MultiLambdaSystem& sys, std::size_t k, std::size_t l) {
  return sys.alpha(k) * sys.beta(l) - sys.alpha(l) * sys.beta(k);
}

}  // namespace detail

/// det H for an off-resonant system written through the S-sums:
/// P^2 S^2 D (S_a2 S_b2 - S_ab^2).
inline double det_offres_via_sums(const MultiLambdaSystem& sys, double pump, double stokes) {
  const SSums s = s_sums(sys);
  return pump * pump * stokes * stokes * DetuningProducts(sys).d_full() * s.gram();
}

/// det H for an off-resonant system as the pairwise sum over
/// D_kl (alpha_k beta_l - alpha_l beta_k)^2.
inline double det_offres_via_pairs(const MultiLambdaSystem& sys, double pump, double stokes) {
  const DetuningProducts dp(sys);
  double sum = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k)
    for (std::size_t l = k + 1; l < sys.size(); ++l) {
      const double c = detail::cross(sys, k, l);
      sum += dp.d_excl_two(k, l) * c * c;
    }
  return pump * pump * stokes * stokes * sum;
}

/// The bracket alpha_n^2 S_b2^(n) - 2 alpha_n beta_n S_ab^(n) + beta_n^2 S_a2^(n)
/// that governs a single resonant state n.
inline double resonant_bracket(const MultiLambdaSystem& sys, std::size_t n) {
  const SSums s = s_sums(sys, n);
  const double a = sys.alpha(n), b = sys.beta(n);
  return a * a * s.s_b2 - 2.0 * a * b * s.s_ab + b * b * s.s_a2;
}

/// det H with exactly one resonant state n, pairwise form.
inline double det_single_resonant_via_pairs(const MultiLambdaSystem& sys, std::size_t n,
                                            double pump, double stokes) {
  const DetuningProducts dp(sys);
  double sum = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (k == n) continue;
    const double c = detail::cross(sys, k, n);
    sum += dp.d_excl_two(n, k) * c * c;
  }
  return pump * pump * stokes * stokes * sum;
}

/// det H with exactly one resonant state n, bracket form.
inline double det_single_resonant_via_bracket(const MultiLambdaSystem& sys, std::size_t n,
                                              double pump, double stokes) {
  return pump * pump * stokes * stokes * DetuningProducts(sys).d_excl_one(n) *
         resonant_bracket(sys, n);
}

/// Closed-form determinant of the Hamiltonian, chosen by the number of
/// exactly vanishing detunings (three or more force a zero determinant).
inline double det_closed_form(const MultiLambdaSystem& sys, double pump, double stokes) {
  const auto res = resonant_indices(sys);
  switch (res.size()) {
    case 0:
      return det_offres_via_sums(sys, pump, stokes);
    case 1:
      return det_single_resonant_via_pairs(sys, res[0], pump, stokes);
    case 2: {
      const double c = detail::cross(sys, res[0], res[1]);
      return pump * pump * stokes * stokes * DetuningProducts(sys).d_excl_two(res[0], res[1]) *
             c * c;
    }
    default:
      return 0.0;
  }
}

/// Zero-eigenvalue state built from i and f only: (S/W, 0, ..., 0, -P/W),
/// W = sqrt(P^2 + S^2).
inline StateVector dark_state(std::size_t n_intermediate, double pump, double stokes) {
  const double w = std::hypot(pump, stokes);
  if (w == 0.0)
    throw Error(ErrorCode::BothEnvelopesZero, "dark state undefined when both envelopes vanish");
  StateVector s{ComplexVector::Zero(static_cast<Eigen::Index>(n_intermediate + 2))};
  s.amplitudes(0) = stokes / w;
  s.amplitudes(static_cast<Eigen::Index>(n_intermediate + 1)) = -pump / w;
  return s;
}

inline StateVector dark_state(const MultiLambdaSystem& sys, const PulsePair& pulses, double t) {
  const Envelopes e = pulse_values(pulses, t);
  return dark_state(sys.size(), e.pump, e.stokes);
}

/// A nontrivial (a_i, a_f) solving the pair of linear conditions on the
/// initial/final amplitudes of a zero-eigenvalue eigenvector. Meaningful only
/// when the Gram combination S_a2 S_b2 - S_ab^2 vanishes.
inline std::pair<double, double> zero_eigvec_endpoints(const SSums& sums, double pump,
                                                       double stokes) {
  double ai = sums.s_ab * stokes;
  double af = -sums.s_a2 * pump;
  if (ai == 0.0 && af == 0.0) {
    ai = sums.s_b2 * stokes;
    af = -sums.s_ab * pump;
  }
  const double n = std::hypot(ai, af);
  if (n == 0.0) return {stokes, -pump};
  return {ai / n, af / n};
}

/// Zero-eigenvalue eigenvector with intermediate amplitudes
/// a_k = -(alpha_k P a_i + beta_k S a_f) / Delta_k, normalised.
inline StateVector zero_eigvec_amplitudes(const MultiLambdaSystem& sys, double pump, double stokes,
                                          double a_i, double a_f) {
  const std::size_t n = sys.size();
  StateVector s{ComplexVector::Zero(static_cast<Eigen::Index>(n + 2))};
  s.amplitudes(0) = a_i;
  s.amplitudes(static_cast<Eigen::Index>(n + 1)) = a_f;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = sys.detuning(k);
    if (d == 0.0)
      throw Error(ErrorCode::ZeroDetuningInSum,
                  "detuning of state " + std::to_string(k + 1) + " is exactly zero");
    s.amplitudes(static_cast<Eigen::Index>(k + 1)) =
        -(sys.alpha(k) * pump * a_i + sys.beta(k) * stokes * a_f) / d;
  }
  const double norm = s.norm();
  if (norm == 0.0)
    throw Error(ErrorCode::InvalidArgument, "a_i and a_f must not both vanish");
  s.amplitudes /= norm;
  return s;
}

inline StateVector zero_eigvec_amplitudes(const MultiLambdaSystem& sys, const PulsePair& pulses,
                                          double t, double a_i, double a_f) {
  const Envelopes e = pulse_values(pulses, t);
  return zero_eigvec_amplitudes(sys, e.pump, e.stokes, a_i, a_f);
}

}  // namespace mlstirap
