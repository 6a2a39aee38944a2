#pragma once

// Scan orchestration and CSV emission. Scan points are independent and run on
// a small worker pool; rows are assembled in input order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mlstirap/analysis.hpp"
#include "mlstirap/cli/config.hpp"
#include "mlstirap/dynamics.hpp"
#include "mlstirap/spectral.hpp"

namespace mlstirap::cli {

struct ScanRow {
  double scan_value = 0.0;
  double pf = 0.0;
  double max_intermediate_pop = 0.0;
  AtState at_verdict = AtState::NotExists;
  double xi = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  double final_norm = 1.0;
};

/// The system and pulses a scan point stands for.
struct ScanPoint {
  MultiLambdaSystem system;
  PulsePair pulses;
};

inline ScanPoint scan_point(const RunConfig& cfg, std::optional<double> value) {
  if (!value || !cfg.scan) return {cfg.system(), cfg.pulses()};
  if (cfg.scan->axis == ScanAxis::PulseWidth)
    return {cfg.system(), cfg.pulses_with_width(*value)};
  return {cfg.system().with_common_shift(*value), cfg.pulses()};
}

/// LZ parameter when the estimate is defined, NaN otherwise.
inline double xi_or_nan(const MultiLambdaSystem& sys, const PulsePair& pulses) {
  const AtClassification c = classify(sys);
  if (c.regime != Regime::OffResonant || !c.sums || !(c.sums->s_a2 * c.sums->s_b2 > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  return lz_estimate(sys, pulses).xi;
}

inline ScanRow evaluate_point(const RunConfig& cfg, std::optional<double> value) {
  const auto begin = std::chrono::steady_clock::now();
  const ScanPoint p = scan_point(cfg, value);
  IntegratorConfig ic = cfg.integrator;
  ic.store_every = std::numeric_limits<int>::max();  // only the scalars are needed
  const PropagationResult r = propagate(p.system, p.pulses, ic);
  ScanRow row;
  row.scan_value = value ? *value : cfg.width;
  row.pf = r.final_pf;
  row.max_intermediate_pop = r.max_intermediate_population;
  row.at_verdict = classify(p.system).at_state;
  row.xi = xi_or_nan(p.system, p.pulses);
  row.final_norm = r.final_norm;
  if (cfg.output.timing)
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return row;
}

/// Runs f(0..count-1) on up to `threads` workers. The first failure (in index
/// order) is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t count, unsigned threads, const F& f) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// One row per scan value, or a single row at the configured point when the
/// config has no scan. Failures carry the offending scan value.
inline std::vector<ScanRow> run_scan(const RunConfig& cfg, unsigned threads = 1) {
  if (!cfg.scan) return {evaluate_point(cfg, std::nullopt)};
  const std::vector<double> values = cfg.scan->values();
  std::vector<ScanRow> rows(values.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    try {
      rows[i] = evaluate_point(cfg, values[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "scan_value=" + detail::fmt_double(values[i]) + ": " + e.what());
    }
  });
  return rows;
}

inline std::string fmt_g9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "scan_value,pf,max_intermediate_pop,at_verdict,xi,seconds\n";
  for (const auto& r : rows)
    out << fmt_g9(r.scan_value) << ',' << fmt_g9(r.pf) << ',' << fmt_g9(r.max_intermediate_pop)
        << ',' << to_string(r.at_verdict) << ',' << fmt_g9(r.xi) << ',' << fmt_g9(r.seconds)
        << '\n';
}

/// Population time series at the configured point: t, P_i, P_1..P_N, P_f, norm.
inline PropagationResult simulate(const RunConfig& cfg, std::size_t samples = 801) {
  const ScanPoint p = scan_point(cfg, std::nullopt);
  IntegratorConfig ic = cfg.integrator;
  const double t0 = ic.resolved_start(p.pulses), t1 = ic.resolved_end(p.pulses);
  ic.output_times.resize(samples);
  for (std::size_t j = 0; j < samples; ++j)
    ic.output_times[j] = t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(samples - 1);
  ic.output_times.back() = t1;
  return propagate(p.system, p.pulses, ic);
}

inline void write_timeseries_csv(std::ostream& out, const PropagationResult& r) {
  if (r.trajectory.empty()) return;
  const std::size_t dim = r.trajectory.front().size();
  out << "t,p_i";
  for (std::size_t k = 1; k + 1 < dim; ++k) out << ",p_" << k;
  out << ",p_f,norm\n";
  for (std::size_t j = 0; j < r.trajectory.size(); ++j) {
    const StateVector& s = r.trajectory[j];
    out << fmt_g9(r.time_grid[j]);
    for (std::size_t m = 0; m < dim; ++m) out << ',' << fmt_g9(s.population(m));
    out << ',' << fmt_g9(s.norm()) << '\n';
  }
}

/// Tracked instantaneous eigenvalues over the integration window.
inline std::vector<SpectralSnapshot> spectrum(const RunConfig& cfg, std::size_t samples = 801) {
  const ScanPoint p = scan_point(cfg, std::nullopt);
  const double t0 = cfg.integrator.resolved_start(p.pulses);
  const double t1 = cfg.integrator.resolved_end(p.pulses);
  std::vector<double> grid(samples);
  for (std::size_t j = 0; j < samples; ++j)
    grid[j] = t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(samples - 1);
  return track_spectrum(p.system, p.pulses, grid);
}

inline void write_spectrum_csv(std::ostream& out, const std::vector<SpectralSnapshot>& snaps) {
  if (snaps.empty()) return;
  const std::size_t dim = snaps.front().track_ids.size();
  out << 't';
  for (std::size_t k = 0; k < dim; ++k) out << ",lambda_" << k;
  out << '\n';
  for (const auto& s : snaps) {
    out << fmt_g9(s.t);
    for (std::size_t k = 0; k < dim; ++k) out << ',' << fmt_g9(s.eigenvalue_of(static_cast<int>(k)));
    out << '\n';
  }
}

}  // namespace mlstirap::cli
