#pragma once

// Shipped parameter sets for the standard figures. Presets with a [scan]
// section produce a scan CSV; the others produce a population time series and
// a tracked spectrum at one pulse width.

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mlstirap/cli/config.hpp"
#include "mlstirap/error.hpp"

namespace mlstirap::cli {

namespace detail {

inline RunConfig make(std::string name, std::vector<double> a, std::vector<double> b,
                      std::vector<double> d, double width) {
  RunConfig c;
  c.name = std::move(name);
  c.alphas = std::move(a);
  c.betas = std::move(b);
  c.detunings = std::move(d);
  c.width = width;
  return c;
}

inline RunConfig with_scan(RunConfig c, ScanAxis axis, double start, double stop, int points) {
  c.scan = ScanSpec{axis, start, stop, points, false};
  return c;
}

inline RunConfig width_scan(RunConfig c, double stop, int points) {
  return with_scan(std::move(c), ScanAxis::PulseWidth, 1.0, stop, points);
}

/// Couplings for the five-state comb: uniform on [0.2, 2] from a seeded
/// mt19937_64, rounded to 4 decimals. The mapping avoids
/// std::uniform_real_distribution so the values do not depend on the
/// standard library.
inline std::vector<double> seeded_couplings(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::vector<double> out{1.0};
  for (std::size_t k = 1; k < n; ++k) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", 0.2 + 1.8 * u);
    out.push_back(std::stod(buf));
  }
  return out;
}

// Shared parameter sets.
inline RunConfig fig2_solid(double w) { return make("solid", {1, 0.8, 1.2}, {1, 0.8, 1.2}, {1, 2, 3}, w); }
inline RunConfig fig2_dotted(double w) {
  return make("dotted", {1, 1.2, 0.8}, {1, 0.8, 1.2}, {-1.0 / 3.0, 1.0 / 6.0, 7.0 / 6.0}, w);
}
inline RunConfig fig2_dashed(double w) { return make("dashed", {1, 1, 1}, {1, 1, 1}, {-0.5, 1, 1}, w); }
inline RunConfig fig2_dashdot(double w) { return make("dashdot", {1, 1.5, 2}, {1, 1, 1}, {1, -0.5, 1}, w); }
inline RunConfig fig5_solid(double w) { return make("solid", {1, 2}, {1, 0.5}, {0.5, 1.5}, w); }
inline RunConfig fig5_dashed(double w) { return make("dashed", {1, 2}, {1, 0.5}, {-0.5, 0.5}, w); }
inline RunConfig fig9_proportional(double w) { return make("proportional", {1, 0.5}, {1, 0.5}, {0, 1}, w); }
inline RunConfig fig9_general(double w) { return make("general", {1, 2}, {1, 0.5}, {0, 1}, w); }
inline RunConfig fig11(const char* name, std::vector<double> d, double w) {
  return make(name, {1, 0.6, 1.2}, {1, 1, 0.6}, std::move(d), w);
}

inline std::vector<RunConfig> prefixed(const std::string& prefix, std::vector<RunConfig> cs) {
  for (auto& c : cs) c.name = prefix + "_" + c.name;
  return cs;
}

}  // namespace detail

inline constexpr std::uint64_t kFig8Seed = 20260815;

inline std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"};
}

/// All run configurations of a preset; names are unique within it.
inline std::vector<RunConfig> preset(const std::string& name) {
  using namespace detail;
  if (name == "fig2")
    return prefixed(name, {width_scan(fig2_solid(30), 100, 100), width_scan(fig2_dotted(30), 100, 100),
                           width_scan(fig2_dashed(30), 100, 100), width_scan(fig2_dashdot(30), 100, 100)});
  if (name == "fig3")
    return prefixed(name, {fig2_solid(30), fig2_dotted(30), fig2_dashed(30), fig2_dashdot(30)});
  if (name == "fig5") return prefixed(name, {fig5_solid(20), fig5_dashed(20)});
  if (name == "fig6")
    return prefixed(name, {width_scan(fig5_solid(20), 100, 100), width_scan(fig5_dashed(20), 100, 100)});
  if (name == "fig7") {
    RunConfig thin = with_scan(make("T20", {1, 2}, {1, 0.5}, {0, 1}, 20), ScanAxis::CommonDetuning, -2, 1, 301);
    RunConfig thick = thin;
    thick.name = "T80";
    thick.width = 80;
    return prefixed(name, {thin, thick});
  }
  if (name == "fig8") {
    RunConfig c = make("comb", seeded_couplings(kFig8Seed, 5), seeded_couplings(kFig8Seed + 1, 5),
                       {0, 1, 2, 3, 4}, 80);
    return prefixed(name, {with_scan(c, ScanAxis::CommonDetuning, -7, 3, 401)});
  }
  if (name == "fig9") return prefixed(name, {fig9_proportional(20), fig9_general(20)});
  if (name == "fig10")
    return prefixed(name, {width_scan(fig9_proportional(20), 100, 100), width_scan(fig9_general(20), 100, 100)});
  if (name == "fig11")
    return prefixed(name, {width_scan(fig11("xi_zero", {-1, 1, 1.8}, 20), 40, 79),
                           width_scan(fig11("xi_small", {-1, -1.5, 2}, 20), 40, 79),
                           width_scan(fig11("xi_large", {-0.5, -2, -0.25}, 20), 40, 79)});
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

}  // namespace mlstirap::cli
