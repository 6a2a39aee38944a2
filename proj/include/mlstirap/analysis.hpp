#pragma once

// Analytic classification of transfer feasibility: zero eigenvalues,
// existence of an adiabatic-transfer (AT) state in the off-resonant, single
// resonant and degenerate resonant regimes, reduction of degenerate resonant
// states, adiabatic elimination and the Landau-Zener adiabaticity estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlstirap/error.hpp"
#include "mlstirap/model.hpp"

namespace mlstirap {

/// Relative tolerance for "this analytic sum vanishes" tests, measured
/// against the sum of the magnitudes of its terms.
inline constexpr double kSumZeroTolerance = 1e-9;

enum class Regime { OffResonant, SingleResonant, DegenerateResonant };
enum class ZeroEigenvalue { None, Simple, Double, Structural };
enum class AtState { ExistsDarkState, ExistsGeneral, NotExists };

enum class Reason {
  AtConditionHolds,           // S_a2 * S_b2 > 0
  AtConditionViolated,        // S_a2 * S_b2 < 0
  VanishingSumA2,             // S_a2 = 0: f is not a single adiabatic state at late times
  VanishingSumB2,             // S_b2 = 0: i is not a single adiabatic state at early times
  DoubleZeroEigenvalue,       // S_a2 = S_b2 = S_ab = 0
  Marginal,                   // |S_a2 * S_b2| within rounding of a window boundary
  SingleResonance,            // exactly one resonant state
  DegenerateProportional,     // resonant states share alpha/beta, reduced to one
  DegenerateNotProportional,  // resonant states with differing alpha/beta
};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::OffResonant: return "off_resonant";
    case Regime::SingleResonant: return "single_resonant";
    case Regime::DegenerateResonant: return "degenerate_resonant";
  }
  return "?";
}

inline std::string_view to_string(ZeroEigenvalue z) {
  switch (z) {
    case ZeroEigenvalue::None: return "none";
    case ZeroEigenvalue::Simple: return "simple";
    case ZeroEigenvalue::Double: return "double";
    case ZeroEigenvalue::Structural: return "structural";
  }
  return "?";
}

inline std::string_view to_string(AtState a) {
  switch (a) {
    case AtState::ExistsDarkState: return "exists_dark";
    case AtState::ExistsGeneral: return "exists_general";
    case AtState::NotExists: return "not_exists";
  }
  return "?";
}

inline std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::AtConditionHolds: return "at_condition_holds";
    case Reason::AtConditionViolated: return "at_condition_violated";
    case Reason::VanishingSumA2: return "vanishing_s_a2";
    case Reason::VanishingSumB2: return "vanishing_s_b2";
    case Reason::DoubleZeroEigenvalue: return "double_zero_eigenvalue";
    case Reason::Marginal: return "marginal";
    case Reason::SingleResonance: return "single_resonance";
    case Reason::DegenerateProportional: return "degenerate_proportional";
    case Reason::DegenerateNotProportional: return "degenerate_not_proportional";
  }
  return "?";
}

struct AtClassification {
  Regime regime = Regime::OffResonant;
  ZeroEigenvalue zero_eigenvalue = ZeroEigenvalue::None;
  AtState at_state = AtState::NotExists;
  Reason reason = Reason::AtConditionViolated;
  /// Full sums (off-resonant) or sums without the resonant state (single
  /// resonance); absent in the degenerate regime.
  std::optional<SSums> sums;
  std::vector<std::size_t> resonant;

  bool at_exists() const { return at_state != AtState::NotExists; }
};

namespace detail {

inline bool negligible(double value, double scale) {
  return std::abs(value) <= kSumZeroTolerance * scale;
}

/// S_a2 S_b2 - S_ab^2 as the pairwise sum, with the sum of term magnitudes.
inline std::pair<double, double> gram_pairwise(const MultiLambdaSystem& sys) {
  double sum = 0.0, mag = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k)
    for (std::size_t l = k + 1; l < sys.size(); ++l) {
      const double c = detail::cross(sys, k, l);
      const double term = c * c / (sys.detuning(k) * sys.detuning(l));
      sum += term;
      mag += std::abs(term);
    }
  return {sum, mag};
}

}  // namespace detail

struct ReducedSystem {
  MultiLambdaSystem system;
  double mu = 1.0;
  /// Position of the effective resonant state in the reduced system.
  std::size_t effective_index = 0;
};

/// Replaces resonant states with proportional couplings by one effective
/// resonant state carrying couplings mu*alpha_1, mu*beta_1, with
/// mu = sqrt(sum alpha_k^2)/alpha_1 over the listed states. The listed
/// states must all be exactly resonant.
inline ReducedSystem reduce_degenerate(const MultiLambdaSystem& sys,
                                       std::span<const std::size_t> resonant) {
  if (resonant.empty())
    throw Error(ErrorCode::InvalidArgument, "at least one resonant index is required");
  std::vector<std::size_t> idx(resonant.begin(), resonant.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  for (const std::size_t k : idx) {
    if (k >= sys.size()) throw Error(ErrorCode::InvalidArgument, "resonant index out of range");
    if (sys.detuning(k) != 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "state " + std::to_string(k + 1) + " is not exactly resonant");
  }
  if (!couplings_proportional(sys, idx))
    throw Error(ErrorCode::NotProportional, "resonant states do not share alpha/beta");

  const std::size_t first = idx.front();
  double sq = 0.0;
  for (const std::size_t k : idx) sq += sys.alpha(k) * sys.alpha(k);
  const double mu = std::sqrt(sq) / sys.alpha(first);

  std::vector<double> alphas, betas, detunings;
  std::size_t effective = 0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (k == first) {
      effective = alphas.size();
      alphas.push_back(mu * sys.alpha(k));
      betas.push_back(mu * sys.beta(k));
      detunings.push_back(0.0);
    } else if (!std::binary_search(idx.begin(), idx.end(), k)) {
      alphas.push_back(sys.alpha(k));
      betas.push_back(sys.beta(k));
      detunings.push_back(sys.detuning(k));
    }
  }
  return {MultiLambdaSystem::create_unnormalized(std::move(alphas), std::move(betas),
                                                 std::move(detunings)),
          mu, effective};
}

/// Classifies the system by its number of exactly resonant states and decides
/// whether an AT state exists, and whether it is the dark state.
inline AtClassification classify(const MultiLambdaSystem& sys) {
  AtClassification out;
  out.resonant = resonant_indices(sys);
  const bool proportional = couplings_proportional(sys);

  if (out.resonant.empty()) {
    out.regime = Regime::OffResonant;
    const SSums s = s_sums(sys);
    const SSums scale = s_sum_scales(sys);
    out.sums = s;
    const bool a_zero = detail::negligible(s.s_a2, scale.s_a2);
    const bool b_zero = detail::negligible(s.s_b2, scale.s_b2);
    const bool ab_zero = detail::negligible(s.s_ab, scale.s_ab);
    const auto [gram, gram_mag] = detail::gram_pairwise(sys);

    if (a_zero && b_zero && ab_zero)
      out.zero_eigenvalue = ZeroEigenvalue::Double;
    else if (detail::negligible(gram, gram_mag))
      out.zero_eigenvalue = ZeroEigenvalue::Simple;

    if (out.zero_eigenvalue == ZeroEigenvalue::Double) {
      out.at_state = AtState::NotExists;
      out.reason = Reason::DoubleZeroEigenvalue;
    } else if (a_zero) {
      out.at_state = AtState::NotExists;
      out.reason = Reason::VanishingSumA2;
    } else if (b_zero) {
      out.at_state = AtState::NotExists;
      out.reason = Reason::VanishingSumB2;
    } else {
      const double product = s.s_a2 * s.s_b2;
      const bool exists = product > 0.0;
      out.at_state = !exists ? AtState::NotExists
                     : proportional ? AtState::ExistsDarkState
                                    : AtState::ExistsGeneral;
      if (std::abs(product) < kSumZeroTolerance * scale.s_a2 * scale.s_b2)
        out.reason = Reason::Marginal;
      else
        out.reason = exists ? Reason::AtConditionHolds : Reason::AtConditionViolated;
    }
    return out;
  }

  if (out.resonant.size() == 1) {
    const std::size_t n = out.resonant.front();
    out.regime = Regime::SingleResonant;
    out.sums = s_sums(sys, n);
    double bracket = 0.0, mag = 0.0;
    for (std::size_t k = 0; k < sys.size(); ++k) {
      if (k == n) continue;
      const double c = detail::cross(sys, k, n);
      bracket += c * c / sys.detuning(k);
      mag += c * c / std::abs(sys.detuning(k));
    }
    out.zero_eigenvalue =
        detail::negligible(bracket, mag) ? ZeroEigenvalue::Simple : ZeroEigenvalue::None;
    out.at_state = proportional ? AtState::ExistsDarkState : AtState::ExistsGeneral;
    out.reason = Reason::SingleResonance;
    return out;
  }

  out.regime = Regime::DegenerateResonant;
  const bool resonant_proportional = couplings_proportional(sys, out.resonant);
  if (out.resonant.size() >= 3)
    out.zero_eigenvalue = ZeroEigenvalue::Structural;
  else
    out.zero_eigenvalue = resonant_proportional ? ZeroEigenvalue::Simple : ZeroEigenvalue::None;

  if (!resonant_proportional) {
    out.at_state = AtState::NotExists;
    out.reason = Reason::DegenerateNotProportional;
    return out;
  }
  const ReducedSystem reduced = reduce_degenerate(sys, out.resonant);
  out.at_state = classify(reduced.system).at_state;
  out.reason = Reason::DegenerateProportional;
  return out;
}

enum class SumKind { A2, B2 };

struct WindowBoundary {
  double shift = 0.0;
  SumKind kind = SumKind::A2;
};

/// S_a2 or S_b2 of the template after a common detuning shift.
inline double shifted_sum(const MultiLambdaSystem& base, SumKind kind, double shift) {
  double s = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double w = kind == SumKind::A2 ? base.alpha(k) : base.beta(k);
    s += w * w / (base.detuning(k) + shift);
  }
  return s;
}

namespace detail {

inline std::vector<double> poles_in(const MultiLambdaSystem& base, double lo, double hi) {
  std::vector<double> poles;
  for (const double d : base.detunings())
    if (-d > lo && -d < hi) poles.push_back(-d);
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end()), poles.end());
  return poles;
}

// Root of a strictly decreasing function on (a, b) whose left end is either
// a pole (f -> +inf) or a point with f > 0, and whose right end is either a
// pole (f -> -inf) or a point with f < 0.
template <class F>
double bisect_decreasing(const F& f, double a, bool a_pole, double b, bool b_pole) {
  double xa = a, xb = b;
  if (a_pole) {
    double step = 0.5 * (b - a);
    xa = a + step;
    while (!(f(xa) > 0.0) && step > 0.0) {
      step *= 0.5;
      xa = a + step;
    }
  }
  if (b_pole) {
    double step = 0.5 * (b - xa);
    xb = b - step;
    while (!(f(xb) < 0.0) && step > 0.0) {
      step *= 0.5;
      xb = b - step;
    }
  }
  double fa = f(xa), fb = f(xb);
  if (fa == 0.0) return xa;
  if (fb == 0.0) return xb;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (xa + xb);
    if (mid <= xa || mid >= xb) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (fm > 0.0) {
      xa = mid;
      fa = fm;
    } else {
      xb = mid;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? xa : xb;
}

}  // namespace detail

/// Common detuning shifts in [lo, hi] at which S_a2 or S_b2 of the shifted
/// template vanishes. Both sums decrease strictly between consecutive poles
/// (at shift = -detuning_k), so each inter-pole interval holds at most one
/// root of each; roots are bracketed per interval and bisected.
inline std::vector<WindowBoundary> at_window_boundaries(const MultiLambdaSystem& base, double lo,
                                                        double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "empty detuning range");
  const std::vector<double> poles = detail::poles_in(base, lo, hi);
  std::vector<double> breaks;
  breaks.push_back(lo);
  breaks.insert(breaks.end(), poles.begin(), poles.end());
  breaks.push_back(hi);

  auto is_pole = [&](double x) {
    return std::any_of(base.detunings().begin(), base.detunings().end(),
                       [&](double d) { return d + x == 0.0; });
  };

  std::vector<WindowBoundary> out;
  for (const SumKind kind : {SumKind::A2, SumKind::B2}) {
    auto f = [&](double x) { return shifted_sum(base, kind, x); };
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
      const double a = breaks[j], b = breaks[j + 1];
      const bool a_pole = is_pole(a), b_pole = is_pole(b);
      const double fa = a_pole ? 1.0 : f(a);
      const double fb = b_pole ? -1.0 : f(b);
      if (!a_pole && fa == 0.0) {
        if (j == 0) out.push_back({a, kind});
        continue;
      }
      if (!b_pole && fb == 0.0) {
        out.push_back({b, kind});
        continue;
      }
      if (fa > 0.0 && fb < 0.0)
        out.push_back({detail::bisect_decreasing(f, a, a_pole, b, b_pole), kind});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const WindowBoundary& x, const WindowBoundary& y) { return x.shift < y.shift; });
  return out;
}

/// Maximal sub-intervals of [lo, hi] on which S_a2 S_b2 < 0 after the common
/// shift, i.e. where no AT state exists.
inline std::vector<std::pair<double, double>> no_at_windows(const MultiLambdaSystem& base,
                                                            double lo, double hi) {
  std::vector<double> cuts{lo, hi};
  for (const auto& b : at_window_boundaries(base, lo, hi)) cuts.push_back(b.shift);
  for (const double p : detail::poles_in(base, lo, hi)) cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
    const double prod = shifted_sum(base, SumKind::A2, mid) * shifted_sum(base, SumKind::B2, mid);
    if (!(prod < 0.0)) continue;
    if (!out.empty() && out.back().second == cuts[j])
      out.back().second = cuts[j + 1];
    else
      out.emplace_back(cuts[j], cuts[j + 1]);
  }
  return out;
}

/// Effective i/f problem after eliminating every (off-resonant) intermediate
/// state.
struct EffectiveTwoState {
  SSums sums;

  double detuning(double pump, double stokes) const {
    return sums.s_b2 * stokes * stokes - sums.s_a2 * pump * pump;
  }
  double coupling(double pump, double stokes) const { return sums.s_ab * pump * stokes; }

  RealMatrix matrix(double pump, double stokes) const {
    RealMatrix m(2, 2);
    m << pump * pump * sums.s_a2, pump * stokes * sums.s_ab, pump * stokes * sums.s_ab,
        stokes * stokes * sums.s_b2;
    return m;
  }
};

inline EffectiveTwoState effective_two_state(const MultiLambdaSystem& sys) {
  if (!resonant_indices(sys).empty())
    throw Error(ErrorCode::WrongResonanceCount,
                "two-state elimination needs every detuning nonzero");
  return {s_sums(sys)};
}

/// Effective (i, n, f) matrix when state n alone is resonant.
inline RealMatrix effective_three_state(const MultiLambdaSystem& sys, double pump, double stokes) {
  const auto res = resonant_indices(sys);
  if (res.size() != 1)
    throw Error(ErrorCode::WrongResonanceCount,
                "three-state elimination needs exactly one resonant state");
  const std::size_t n = res.front();
  const SSums s = s_sums(sys, n);
  RealMatrix m = RealMatrix::Zero(3, 3);
  m(0, 0) = pump * pump * s.s_a2;
  m(2, 2) = stokes * stokes * s.s_b2;
  m(0, 2) = m(2, 0) = pump * stokes * s.s_ab;
  m(0, 1) = m(1, 0) = sys.alpha(n) * pump;
  m(1, 2) = m(2, 1) = sys.beta(n) * stokes;
  return m;
}

/// Adiabatically eliminated Hamiltonian: 2x2 when nothing is resonant,
/// 3x3 when exactly one state is.
inline RealMatrix adiabatic_eliminate(const MultiLambdaSystem& sys, double pump, double stokes) {
  switch (resonant_indices(sys).size()) {
    case 0: return effective_two_state(sys).matrix(pump, stokes);
    case 1: return effective_three_state(sys, pump, stokes);
    default:
      throw Error(ErrorCode::WrongResonanceCount,
                  "adiabatic elimination needs at most one resonant state");
  }
}

inline RealMatrix adiabatic_eliminate(const MultiLambdaSystem& sys, const PulsePair& pulses,
                                      double t) {
  const Envelopes e = pulse_values(pulses, t);
  return adiabatic_eliminate(sys, e.pump, e.stokes);
}

struct LzEstimate {
  double t_c = 0.0;
  double xi = 0.0;
  double pf_estimate = 0.0;
};

/// Landau-Zener estimate for the effective level crossing of the eliminated
/// two-state problem with Gaussian pulses. A mixed sum S_ab that vanishes to
/// within rounding is treated as exactly zero.
inline LzEstimate lz_estimate(const MultiLambdaSystem& sys, const PulsePair& pulses) {
  pulses.validate();
  if (!resonant_indices(sys).empty())
    throw Error(ErrorCode::PreconditionViolated, "the LZ estimate needs every detuning nonzero");
  const SSums s = s_sums(sys);
  if (!(s.s_a2 * s.s_b2 > 0.0))
    throw Error(ErrorCode::NoCrossing, "S_a2 * S_b2 <= 0: the effective levels do not cross");
  const double s_ab = detail::negligible(s.s_ab, s_sum_scales(sys).s_ab) ? 0.0 : s.s_ab;

  const double w = pulses.width, tau = pulses.delay;
  const double log_ratio = std::log(s.s_b2 / s.s_a2);
  LzEstimate out;
  out.t_c = w * w / (8.0 * tau) * log_ratio;
  out.xi = w / (4.0 * tau) * s_ab * s_ab / std::sqrt(s.s_a2 * s.s_b2) *
           std::exp(-2.0 * tau * tau / (w * w) - w * w / (32.0 * tau * tau) * log_ratio * log_ratio);
  const double area = pulses.omega0 * w;
  out.pf_estimate = 1.0 - std::exp(-std::numbers::pi * area * area * out.xi);
  return out;
}

}  // namespace mlstirap
