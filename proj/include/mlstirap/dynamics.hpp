#pragma once

// Time propagation of i dc/dt = H(t) c with an adaptive Dormand-Prince 5(4)
// pair, plus the quadrature prediction for transfer through a doubly
// degenerate zero-eigenvalue subspace.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mlstirap/error.hpp"
#include "mlstirap/model.hpp"

namespace mlstirap {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::optional<double> t_start;  // defaults to -(4T + tau)
  std::optional<double> t_end;    // defaults to +(4T + tau)
  std::optional<double> max_step;  // defaults to T/10
  int store_every = 1;
  /// When non-empty, the state is stored exactly at these (increasing) times
  /// instead of every `store_every` accepted steps.
  std::vector<double> output_times;
  long max_steps = 50'000'000;
  double norm_tolerance = 1e-6;

  double resolved_start(const PulsePair& p) const { return t_start.value_or(-p.default_half_window()); }
  double resolved_end(const PulsePair& p) const { return t_end.value_or(p.default_half_window()); }
  double resolved_max_step(const PulsePair& p) const { return max_step.value_or(0.1 * p.width); }

  void validate(const PulsePair& p) const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw Error(ErrorCode::InvalidArgument, "integrator tolerances must be > 0");
    if (!(resolved_start(p) < resolved_end(p)))
      throw Error(ErrorCode::InvalidArgument, "t_start must be < t_end");
    if (!(resolved_max_step(p) > 0.0))
      throw Error(ErrorCode::InvalidArgument, "max_step must be > 0");
    if (store_every < 1) throw Error(ErrorCode::InvalidArgument, "store_every must be >= 1");
    for (std::size_t j = 0; j < output_times.size(); ++j) {
      if (output_times[j] < resolved_start(p) || output_times[j] > resolved_end(p))
        throw Error(ErrorCode::InvalidArgument, "output time outside the integration window");
      if (j > 0 && !(output_times[j] > output_times[j - 1]))
        throw Error(ErrorCode::InvalidArgument, "output times must be strictly increasing");
    }
  }
};

struct PropagationResult {
  std::vector<double> time_grid;
  std::vector<StateVector> trajectory;
  double final_pf = 0.0;
  double final_norm = 1.0;
  double max_norm_drift = 0.0;
  /// Largest total intermediate population over every accepted step.
  double max_intermediate_population = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
  StateVector final_state;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

class SchrodingerRhs {
 public:
  SchrodingerRhs(const MultiLambdaSystem& sys, const PulsePair& pulses)
      : sys_(sys), pulses_(pulses), n_(static_cast<Eigen::Index>(sys.size())) {}

  void operator()(double t, const ComplexVector& c, ComplexVector& dc) const {
    const Envelopes e = pulse_values(pulses_, t);
    const std::complex<double> minus_i(0.0, -1.0);
    std::complex<double> to_i = 0.0, to_f = 0.0;
    for (Eigen::Index k = 0; k < n_; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double p = sys_.alpha(ku) * e.pump;
      const double s = sys_.beta(ku) * e.stokes;
      const std::complex<double> ck = c(k + 1);
      to_i += p * ck;
      to_f += s * ck;
      dc(k + 1) = minus_i * (p * c(0) + sys_.detuning(ku) * ck + s * c(n_ + 1));
    }
    dc(0) = minus_i * to_i;
    dc(n_ + 1) = minus_i * to_f;
  }

 private:
  const MultiLambdaSystem& sys_;
  const PulsePair& pulses_;
  Eigen::Index n_;
};

}  // namespace detail

/// Integrates the Schroedinger equation from cfg's window start to its end.
/// The norm is monitored but never renormalised; exceeding
/// cfg.norm_tolerance raises NormDriftExceeded.
inline PropagationResult propagate(const MultiLambdaSystem& sys, const PulsePair& pulses,
                                   const IntegratorConfig& cfg,
                                   std::optional<StateVector> initial = std::nullopt) {
  pulses.validate();
  cfg.validate(pulses);
  StateVector psi = initial.value_or(StateVector::initial(sys.size()));
  if (psi.size() != sys.dimension())
    throw Error(ErrorCode::InvalidArgument, "initial state has the wrong dimension");
  if (std::abs(psi.norm() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "initial state must be normalised");

  using DP = detail::DormandPrince;
  const detail::SchrodingerRhs rhs(sys, pulses);
  const double t0 = cfg.resolved_start(pulses);
  const double t1 = cfg.resolved_end(pulses);
  const double h_max = cfg.resolved_max_step(pulses);
  const Eigen::Index dim = static_cast<Eigen::Index>(sys.dimension());

  PropagationResult res;
  auto record = [&](double t, const ComplexVector& y) {
    res.time_grid.push_back(t);
    res.trajectory.push_back(StateVector{y});
  };

  ComplexVector y = psi.amplitudes;
  ComplexVector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim),
      y_new(dim);
  double t = t0;
  double h = std::min(h_max, 1e-3 * (t1 - t0));
  double err_prev = 1e-4;
  bool last_rejected = false;
  std::size_t next_output = 0;
  const bool fixed_outputs = !cfg.output_times.empty();

  if (!fixed_outputs || cfg.output_times.front() == t0) {
    record(t, y);
    if (fixed_outputs) ++next_output;
  }
  res.max_intermediate_population = StateVector{y}.intermediate_population();

  rhs(t, y, k1);
  while (t < t1) {
    if (res.accepted_steps + res.rejected_steps >= cfg.max_steps)
      throw Error(ErrorCode::ToleranceNotMet, "step budget exhausted at t=" + std::to_string(t));

    double target = t1;
    if (fixed_outputs && next_output < cfg.output_times.size())
      target = std::min(target, cfg.output_times[next_output]);
    if (target - t <= 1e-13 * std::max(1.0, std::abs(t))) {
      // Within rounding of an output time or the end: snap instead of stepping.
      t = target;
      if (fixed_outputs && next_output < cfg.output_times.size() &&
          target == cfg.output_times[next_output]) {
        record(t, y);
        ++next_output;
      } else if (!fixed_outputs && target == t1) {
        record(t, y);
      }
      continue;
    }
    bool hits_target = false;
    double step = std::min(h, h_max);
    if (t + step >= target) {
      step = target - t;
      hits_target = true;
    }
    if (step < 1e-13 * std::max(1.0, std::abs(t)))
      throw Error(ErrorCode::ToleranceNotMet, "step size underflow at t=" + std::to_string(t));

    tmp = y + step * DP::a21 * k1;
    rhs(t + DP::c[1] * step, tmp, k2);
    tmp = y + step * (DP::a31 * k1 + DP::a32 * k2);
    rhs(t + DP::c[2] * step, tmp, k3);
    tmp = y + step * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
    rhs(t + DP::c[3] * step, tmp, k4);
    tmp = y + step * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
    rhs(t + DP::c[4] * step, tmp, k5);
    tmp = y + step * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
    rhs(t + step, tmp, k6);
    y_new = y + step * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);
    rhs(t + step, y_new, k7);

    double err_sq = 0.0;
    for (Eigen::Index m = 0; m < dim; ++m) {
      const std::complex<double> e =
          step * (DP::e1 * k1(m) + DP::e3 * k3(m) + DP::e4 * k4(m) + DP::e5 * k5(m) +
                  DP::e6 * k6(m) + DP::e7 * k7(m));
      const double sc =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(m)), std::abs(y_new(m)));
      err_sq += std::norm(e) / (sc * sc);
    }
    const double err = std::sqrt(err_sq / static_cast<double>(dim));

    if (err <= 1.0) {
      t = hits_target ? target : t + step;
      y = y_new;
      k1 = k7;
      ++res.accepted_steps;

      const StateVector sv{y};
      res.max_norm_drift = std::max(res.max_norm_drift, std::abs(sv.norm() - 1.0));
      res.max_intermediate_population =
          std::max(res.max_intermediate_population, sv.intermediate_population());

      if (fixed_outputs) {
        if (hits_target && next_output < cfg.output_times.size() &&
            target == cfg.output_times[next_output]) {
          record(t, y);
          ++next_output;
        }
      } else if (res.accepted_steps % cfg.store_every == 0 || t >= t1) {
        record(t, y);
      }

      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      // A step shortened to land on an output time says nothing about the
      // natural step size; keep the previous proposal in that case.
      if (!(hits_target && step < h)) h = step * fac;
      err_prev = std::max(err, 1e-4);
      last_rejected = false;
    } else {
      ++res.rejected_steps;
      h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }

  res.final_state = StateVector{y};
  res.final_norm = res.final_state.norm();
  res.final_pf = res.final_state.final_population();
  if (std::abs(res.final_norm - 1.0) > cfg.norm_tolerance)
    throw Error(ErrorCode::NormDriftExceeded,
                "final norm deviates from 1 by " + std::to_string(std::abs(res.final_norm - 1.0)));
  return res;
}

/// |c_m(t)|^2 for every basis state m (outer index) at every stored time.
inline std::vector<std::vector<double>> populations_timeseries(const PropagationResult& result) {
  if (result.trajectory.empty()) return {};
  const std::size_t dim = result.trajectory.front().size();
  std::vector<std::vector<double>> out(dim, std::vector<double>(result.trajectory.size()));
  for (std::size_t j = 0; j < result.trajectory.size(); ++j)
    for (std::size_t m = 0; m < dim; ++m) out[m][j] = result.trajectory[j].population(m);
  return out;
}

/// Largest total intermediate population among the stored states.
inline double max_intermediate_population(const PropagationResult& result) {
  double best = 0.0;
  for (const auto& s : result.trajectory) best = std::max(best, s.intermediate_population());
  return best;
}

/// Adiabatic-limit P_f for proportional couplings whose three S-sums all
/// vanish, when the zero eigenvalue is doubly degenerate: cos^2 of the
/// integrated mixing-angle rate weighted by nu(t) = [1 + W^2 sum a_k^2/D_k^2]^(-1/2).
inline double pf_degenerate_prediction(const MultiLambdaSystem& sys, const PulsePair& pulses,
                                       std::optional<double> half_window = std::nullopt) {
  pulses.validate();
  if (!resonant_indices(sys).empty())
    throw Error(ErrorCode::PreconditionViolated, "all detunings must be nonzero");
  if (!couplings_proportional(sys))
    throw Error(ErrorCode::PreconditionViolated, "couplings are not proportional");
  const SSums s = s_sums(sys);
  if (std::abs(s.s_a2) > 1e-9 || std::abs(s.s_b2) > 1e-9 || std::abs(s.s_ab) > 1e-9)
    throw Error(ErrorCode::PreconditionViolated, "S-sums do not all vanish");

  double q = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const double r = sys.alpha(k) / sys.detuning(k);
    q += r * r;
  }

  auto integrand = [&](double t) {
    const double p = pulses.pump(t), st = pulses.stokes(t);
    const double w2 = p * p + st * st;
    if (w2 == 0.0) return 0.0;
    const double theta_dot = (pulses.pump_rate(t) * st - p * pulses.stokes_rate(t)) / w2;
    return theta_dot / std::sqrt(1.0 + w2 * q);
  };

  const double half = half_window.value_or(pulses.default_half_window());
  double err = 0.0;
  const double angle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -half, half, 20, 1e-13, &err);
  const double c = std::cos(angle);
  return c * c;
}

}  // namespace mlstirap
