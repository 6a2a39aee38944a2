#pragma once

// Plain-text analysis report: regime, sums, zero-eigenvalue and AT verdicts,
// no-AT windows over a detuning scan, LZ summary.

#include <cstdio>
#include <sstream>
#include <string>

#include "mlstirap/analysis.hpp"
#include "mlstirap/cli/config.hpp"

namespace mlstirap::cli {

namespace detail {

inline std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string sums_line(const SSums& s) {
  return "S_a2=" + fmt4(s.s_a2) + ", S_b2=" + fmt4(s.s_b2);
}

}  // namespace detail

/// One-line AT verdict with the condition that decided it.
inline std::string at_verdict_line(const MultiLambdaSystem& sys, const AtClassification& c) {
  using detail::sums_line;
  switch (c.reason) {
    case Reason::AtConditionHolds:
      return "AT exists (condition S_a2*S_b2 > 0): " + sums_line(*c.sums);
    case Reason::AtConditionViolated:
      return "AT does not exist (condition S_a2*S_b2 > 0 violated): " + sums_line(*c.sums);
    case Reason::Marginal:
      return std::string(c.at_exists() ? "AT exists" : "AT does not exist") +
             " (marginal: S_a2*S_b2 within rounding of zero): " + sums_line(*c.sums);
    case Reason::VanishingSumA2:
      return "AT does not exist (S_a2 = 0: final state not a single adiabatic state): " +
             sums_line(*c.sums);
    case Reason::VanishingSumB2:
      return "AT does not exist (S_b2 = 0: initial state not a single adiabatic state): " +
             sums_line(*c.sums);
    case Reason::DoubleZeroEigenvalue:
      return "AT does not exist (double zero eigenvalue: S_a2 = S_b2 = S_ab = 0)";
    case Reason::SingleResonance:
      return "AT exists (single-photon resonance with state " +
             std::to_string(c.resonant.front() + 1) + ": always exists)";
    case Reason::DegenerateProportional:
      return std::string(c.at_exists() ? "AT exists" : "AT does not exist") + " (" +
             std::to_string(c.resonant.size()) +
             " resonant states with proportional couplings, reduced with mu=" +
             detail::fmt4(reduce_degenerate(sys, c.resonant).mu) + ")";
    case Reason::DegenerateNotProportional:
      return "AT does not exist (" + std::to_string(c.resonant.size()) +
             " resonant states, proportionality among them violated)";
  }
  return {};
}

inline std::string report(const RunConfig& cfg) {
  using detail::fmt4;
  const MultiLambdaSystem sys = cfg.system();
  const PulsePair pulses = cfg.pulses();
  const AtClassification c = classify(sys);
  std::ostringstream out;

  out << "system: N=" << sys.size() << "\n";
  for (std::size_t k = 0; k < sys.size(); ++k)
    out << "  state " << k + 1 << ": alpha=" << fmt4(sys.alpha(k)) << " beta=" << fmt4(sys.beta(k))
        << " detuning=" << fmt4(sys.detuning(k)) << "\n";
  out << "pulses: omega0=" << fmt4(pulses.omega0) << " T=" << fmt4(pulses.width)
      << " tau=" << fmt4(pulses.delay) << "\n";
  out << "regime: " << to_string(c.regime) << "\n";
  if (c.sums) {
    out << (c.regime == Regime::SingleResonant ? "sums without the resonant state: " : "sums: ")
        << "S_a2=" << fmt4(c.sums->s_a2) << " S_b2=" << fmt4(c.sums->s_b2)
        << " S_ab=" << fmt4(c.sums->s_ab) << " S_a2*S_b2-S_ab^2=" << fmt4(c.sums->gram()) << "\n";
  }
  out << "couplings proportional: " << (couplings_proportional(sys) ? "yes" : "no") << "\n";
  out << "zero eigenvalue: " << to_string(c.zero_eigenvalue) << "\n";
  out << at_verdict_line(sys, c) << "\n";
  out << "AT state: " << to_string(c.at_state) << "\n";

  if (cfg.scan && cfg.scan->axis == ScanAxis::CommonDetuning) {
    const double lo = std::min(cfg.scan->start, cfg.scan->stop);
    const double hi = std::max(cfg.scan->start, cfg.scan->stop);
    const auto bounds = at_window_boundaries(sys, lo, hi);
    out << "sum roots in [" << fmt4(lo) << ", " << fmt4(hi) << "]:";
    if (bounds.empty()) out << " none";
    for (const auto& b : bounds)
      out << " " << (b.kind == SumKind::A2 ? "S_a2" : "S_b2") << "@" << fmt4(b.shift);
    out << "\n";
    const auto windows = no_at_windows(sys, lo, hi);
    out << "no-AT windows:";
    if (windows.empty()) out << " none";
    for (const auto& [a, b] : windows) out << " [" << fmt4(a) << ", " << fmt4(b) << "]";
    out << "\n";
  }

  if (c.regime == Regime::OffResonant && c.sums && c.sums->s_a2 * c.sums->s_b2 > 0.0) {
    const LzEstimate lz = lz_estimate(sys, pulses);
    out << "LZ estimate: t_c=" << fmt4(lz.t_c) << " (" << fmt4(lz.t_c / pulses.width)
        << " T) xi=" << fmt4(lz.xi) << " pf_estimate=" << fmt4(lz.pf_estimate) << "\n";
  } else {
    out << "LZ estimate: not defined (no effective level crossing)\n";
  }
  return out.str();
}

}  // namespace mlstirap::cli
