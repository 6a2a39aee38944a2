#pragma once

// Run configuration: a sectioned key = value text format.
//
//   [system]      n, alphas, betas, detunings     (lists are comma separated)
//   [pulses]      omega0, width, delay | delay_ratio, shape
//   [integrator]  rel_tol, abs_tol, max_step, t_start, t_end, norm_tolerance
//   [scan]        axis (pulse_width | common_detuning), start, stop, points, log_scale
//   [output]      csv, report, spectrum, timing
//
// '#' starts a comment. Relative output paths resolve against the directory
// of the config file.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mlstirap/dynamics.hpp"
#include "mlstirap/error.hpp"
#include "mlstirap/model.hpp"

namespace mlstirap::cli {

enum class ScanAxis { PulseWidth, CommonDetuning };

inline std::string_view to_string(ScanAxis a) {
  return a == ScanAxis::PulseWidth ? "pulse_width" : "common_detuning";
}

struct ScanSpec {
  ScanAxis axis = ScanAxis::PulseWidth;
  double start = 1.0;
  double stop = 80.0;
  int points = 2;
  bool log_scale = false;

  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double f = static_cast<double>(i) / (points - 1);
      v[static_cast<std::size_t>(i)] =
          log_scale ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start)))
                    : start + (stop - start) * static_cast<double>(i) / (points - 1);
    }
    v.front() = start;
    v.back() = stop;
    return v;
  }
};

struct OutputSpec {
  std::string csv_path;
  std::string report_path;
  std::string spectrum_path;
  bool timing = false;
};

struct RunConfig {
  std::string name;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> detunings;
  double omega0 = 1.0;
  double width = 20.0;
  std::optional<double> delay;  // absolute; overrides delay_ratio
  double delay_ratio = 0.5;
  IntegratorConfig integrator;
  std::optional<ScanSpec> scan;
  OutputSpec output;

  MultiLambdaSystem system() const { return MultiLambdaSystem::create(alphas, betas, detunings); }

  PulsePair pulses() const { return pulses_with_width(width); }

  PulsePair pulses_with_width(double w) const {
    return PulsePair::gaussian(omega0, w, delay ? *delay : delay_ratio * w);
  }

  /// Checks every invariant; throws ValidationError naming the first one violated.
  void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view text, int line, std::string_view key) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc{} || ptr != last)
    throw ParseError(line, "key '" + std::string(key) + "': '" + t + "' is not a number");
  return v;
}

inline std::vector<double> parse_list(std::string_view text, int line, std::string_view key) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    out.push_back(parse_double(text.substr(pos, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - pos),
                               line, key));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline int parse_int(std::string_view text, int line, std::string_view key) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(line, "key '" + std::string(key) + "': '" + t + "' is not an integer");
  return v;
}

inline bool parse_bool(std::string_view text, int line, std::string_view key) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ParseError(line, "key '" + std::string(key) + "': '" + t + "' is not a boolean");
}

inline void invalid(const std::string& what) { throw Error(ErrorCode::ValidationError, what); }

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += fmt_double(v[k]);
  }
  return out;
}

}  // namespace detail

inline void RunConfig::validate() const {
  using detail::invalid;
  if (alphas.empty()) invalid("[system] n must be >= 1");
  if (alphas.size() != betas.size() || alphas.size() != detunings.size())
    invalid("[system] alphas, betas and detunings must each have n entries");
  try {
    (void)system();
    (void)pulses();
    integrator.validate(pulses());
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (delay_ratio <= 0.0 || !std::isfinite(delay_ratio)) invalid("[pulses] delay_ratio must be > 0");
  if (scan) {
    if (scan->points < 2) invalid("[scan] points must be >= 2");
    if (!std::isfinite(scan->start) || !std::isfinite(scan->stop) || scan->start == scan->stop)
      invalid("[scan] start and stop must be finite and distinct");
    if (scan->log_scale && (scan->start <= 0.0 || scan->stop <= 0.0))
      invalid("[scan] log_scale needs start > 0 and stop > 0");
    if (scan->axis == ScanAxis::PulseWidth && (scan->start <= 0.0 || scan->stop <= 0.0))
      invalid("[scan] pulse widths must be > 0");
  }
}

/// Parses configuration text. `base_dir` anchors relative output paths.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  static const std::map<std::string, std::set<std::string>> kKeys{
      {"system", {"n", "alphas", "betas", "detunings"}},
      {"pulses", {"omega0", "width", "delay", "delay_ratio", "shape"}},
      {"integrator", {"rel_tol", "abs_tol", "max_step", "t_start", "t_end", "norm_tolerance"}},
      {"scan", {"axis", "start", "stop", "points", "log_scale"}},
      {"output", {"csv", "report", "spectrum", "timing"}},
  };

  RunConfig cfg;
  std::optional<int> n;
  std::string section;
  std::set<std::string> seen;
  bool scan_section = false;
  ScanSpec scan;
  std::set<std::string> scan_keys;

  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base_dir / path).string();
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                         : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!kKeys.contains(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      if (section == "scan") scan_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, "key '" + key + "' outside any section");
    if (!kKeys.at(section).contains(key))
      throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second)
      throw ParseError(line_no, "duplicate key '" + key + "' in [" + section + "]");

    if (section == "system") {
      if (key == "n") n = parse_int(value, line_no, key);
      else if (key == "alphas") cfg.alphas = parse_list(value, line_no, key);
      else if (key == "betas") cfg.betas = parse_list(value, line_no, key);
      else cfg.detunings = parse_list(value, line_no, key);
    } else if (section == "pulses") {
      if (key == "omega0") cfg.omega0 = parse_double(value, line_no, key);
      else if (key == "width") cfg.width = parse_double(value, line_no, key);
      else if (key == "delay") cfg.delay = parse_double(value, line_no, key);
      else if (key == "delay_ratio") cfg.delay_ratio = parse_double(value, line_no, key);
      else if (value != "gaussian")
        throw ParseError(line_no, "unsupported pulse shape '" + value + "'");
    } else if (section == "integrator") {
      auto& ic = cfg.integrator;
      const double v = parse_double(value, line_no, key);
      if (key == "rel_tol") ic.rel_tol = v;
      else if (key == "abs_tol") ic.abs_tol = v;
      else if (key == "max_step") ic.max_step = v;
      else if (key == "t_start") ic.t_start = v;
      else if (key == "t_end") ic.t_end = v;
      else ic.norm_tolerance = v;
    } else if (section == "scan") {
      scan_keys.insert(key);
      if (key == "axis") {
        if (value == "pulse_width") scan.axis = ScanAxis::PulseWidth;
        else if (value == "common_detuning") scan.axis = ScanAxis::CommonDetuning;
        else throw ParseError(line_no, "unknown scan axis '" + value + "'");
      } else if (key == "start") scan.start = parse_double(value, line_no, key);
      else if (key == "stop") scan.stop = parse_double(value, line_no, key);
      else if (key == "points") scan.points = parse_int(value, line_no, key);
      else scan.log_scale = parse_bool(value, line_no, key);
    } else {
      if (key == "csv") cfg.output.csv_path = resolve(value);
      else if (key == "report") cfg.output.report_path = resolve(value);
      else if (key == "spectrum") cfg.output.spectrum_path = resolve(value);
      else cfg.output.timing = parse_bool(value, line_no, key);
    }
  }

  if (scan_section) {
    for (const char* required : {"axis", "start", "stop", "points"})
      if (!scan_keys.contains(required))
        invalid(std::string("[scan] missing required key '") + required + "'");
    cfg.scan = scan;
  }
  if (!n) invalid("[system] n is required");
  if (*n < 1) invalid("[system] n must be >= 1");
  const auto size = static_cast<std::size_t>(*n);
  if (cfg.alphas.empty()) cfg.alphas.assign(size, 1.0);
  if (cfg.betas.empty()) cfg.betas.assign(size, 1.0);
  if (cfg.detunings.empty()) cfg.detunings.assign(size, 0.0);
  if (cfg.alphas.size() != size) invalid("[system] alphas has " + std::to_string(cfg.alphas.size()) + " entries, n = " + std::to_string(size));
  if (cfg.betas.size() != size) invalid("[system] betas has " + std::to_string(cfg.betas.size()) + " entries, n = " + std::to_string(size));
  if (cfg.detunings.size() != size) invalid("[system] detunings has " + std::to_string(cfg.detunings.size()) + " entries, n = " + std::to_string(size));
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::invalid("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str(), path.parent_path());
  cfg.name = path.stem().string();
  return cfg;
}

/// Serialises a configuration back to the text format (round-trips through
/// parse_config). Output paths are written as stored.
inline std::string to_config_text(const RunConfig& cfg) {
  using detail::fmt_double;
  using detail::fmt_list;
  std::ostringstream out;
  out << "[system]\n"
      << "n = " << cfg.alphas.size() << "\n"
      << "alphas = " << fmt_list(cfg.alphas) << "\n"
      << "betas = " << fmt_list(cfg.betas) << "\n"
      << "detunings = " << fmt_list(cfg.detunings) << "\n\n"
      << "[pulses]\n"
      << "omega0 = " << fmt_double(cfg.omega0) << "\n"
      << "width = " << fmt_double(cfg.width) << "\n";
  if (cfg.delay) out << "delay = " << fmt_double(*cfg.delay) << "\n";
  else out << "delay_ratio = " << fmt_double(cfg.delay_ratio) << "\n";
  out << "shape = gaussian\n\n";

  const IntegratorConfig defaults;
  const auto& ic = cfg.integrator;
  out << "[integrator]\n"
      << "rel_tol = " << fmt_double(ic.rel_tol) << "\n"
      << "abs_tol = " << fmt_double(ic.abs_tol) << "\n";
  if (ic.max_step) out << "max_step = " << fmt_double(*ic.max_step) << "\n";
  if (ic.t_start) out << "t_start = " << fmt_double(*ic.t_start) << "\n";
  if (ic.t_end) out << "t_end = " << fmt_double(*ic.t_end) << "\n";
  if (ic.norm_tolerance != defaults.norm_tolerance)
    out << "norm_tolerance = " << fmt_double(ic.norm_tolerance) << "\n";

  if (cfg.scan) {
    out << "\n[scan]\n"
        << "axis = " << to_string(cfg.scan->axis) << "\n"
        << "start = " << fmt_double(cfg.scan->start) << "\n"
        << "stop = " << fmt_double(cfg.scan->stop) << "\n"
        << "points = " << cfg.scan->points << "\n"
        << "log_scale = " << (cfg.scan->log_scale ? "true" : "false") << "\n";
  }
  const auto& o = cfg.output;
  if (!o.csv_path.empty() || !o.report_path.empty() || !o.spectrum_path.empty() || o.timing) {
    out << "\n[output]\n";
    if (!o.csv_path.empty()) out << "csv = " << o.csv_path << "\n";
    if (!o.report_path.empty()) out << "report = " << o.report_path << "\n";
    if (!o.spectrum_path.empty()) out << "spectrum = " << o.spectrum_path << "\n";
    if (o.timing) out << "timing = true\n";
  }
  return out.str();
}

}  // namespace mlstirap::cli
