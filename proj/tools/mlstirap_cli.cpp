// Batch front end: simulate, scan, analyze, preset.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
// Failures print one line to stderr:
//   mlstirap: error code=<ErrorCode> [line=<n>] message="<text>"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mlstirap/cli/config.hpp"
#include "mlstirap/cli/presets.hpp"
#include "mlstirap/cli/report.hpp"
#include "mlstirap/cli/runner.hpp"

namespace fs = std::filesystem;
using namespace mlstirap;
using namespace mlstirap::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidArgument:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

std::string escape(std::string s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

void diagnose(ErrorCode code, const std::string& message, int line = 0) {
  std::cerr << "mlstirap: error code=" << to_string(code);
  if (line > 0) std::cerr << " line=" << line;
  std::cerr << " message=\"" << escape(message) << "\"\n";
}

// Writes through `emit` to `path`, or to stdout when the path is empty.
template <class F>
void write_to(const std::string& path, const F& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot write '" + path + "'");
  emit(out);
  if (!out) throw Error(ErrorCode::ValidationError, "write failed for '" + path + "'");
}

void note(bool quiet, const std::string& text) {
  if (!quiet) std::cerr << text << "\n";
}

void run_simulate(const RunConfig& cfg, bool quiet) {
  const PropagationResult r = simulate(cfg);
  write_to(cfg.output.csv_path, [&](std::ostream& os) { write_timeseries_csv(os, r); });
  if (!cfg.output.spectrum_path.empty()) {
    const auto snaps = spectrum(cfg);
    write_to(cfg.output.spectrum_path, [&](std::ostream& os) { write_spectrum_csv(os, snaps); });
  }
  note(quiet, "simulate: pf=" + fmt_g9(r.final_pf) +
                  " max_intermediate_pop=" + fmt_g9(r.max_intermediate_population) +
                  " norm_drift=" + fmt_g9(r.final_norm - 1.0) +
                  " steps=" + std::to_string(r.accepted_steps));
}

void run_scan_cmd(const RunConfig& cfg, unsigned threads, bool quiet) {
  const auto rows = run_scan(cfg, threads);
  write_to(cfg.output.csv_path, [&](std::ostream& os) { write_scan_csv(os, rows); });
  note(quiet, "scan: " + std::to_string(rows.size()) + " rows");
}

void run_analyze(const RunConfig& cfg) {
  const std::string text = report(cfg);
  write_to(cfg.output.report_path, [&](std::ostream& os) { os << text; });
}

void run_preset(const std::string& name, const fs::path& dir, unsigned threads, bool quiet) {
  std::vector<RunConfig> configs = preset(name);
  fs::create_directories(dir);
  for (RunConfig& cfg : configs) {
    cfg.output.csv_path = cfg.name + ".csv";
    cfg.output.report_path = cfg.name + "_report.txt";
    if (!cfg.scan) cfg.output.spectrum_path = cfg.name + "_spectrum.csv";
    write_to((dir / (cfg.name + ".cfg")).string(),
             [&](std::ostream& os) { os << to_config_text(cfg); });

    RunConfig resolved = cfg;
    resolved.output.csv_path = (dir / cfg.output.csv_path).string();
    resolved.output.report_path = (dir / cfg.output.report_path).string();
    if (!cfg.output.spectrum_path.empty())
      resolved.output.spectrum_path = (dir / cfg.output.spectrum_path).string();
    run_analyze(resolved);
    if (resolved.scan)
      run_scan_cmd(resolved, threads, quiet);
    else
      run_simulate(resolved, quiet);
    note(quiet, "preset " + name + ": wrote " + (dir / cfg.output.csv_path).string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population transfer through multiple intermediate states"};
  app.require_subcommand(1);
  unsigned threads = default_threads();
  bool quiet = false;
  app.add_option("--threads", threads, "worker threads for scans")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress notes on stderr");

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "population time series at the configured point");
  sim->add_option("config", config_path, "config file")->required();
  auto* scan = app.add_subcommand("scan", "final populations over the [scan] axis");
  scan->add_option("config", config_path, "config file")->required();
  auto* analyze = app.add_subcommand("analyze", "analytic classification report");
  analyze->add_option("config", config_path, "config file")->required();

  std::string preset_name;
  std::string out_dir = ".";
  bool list = false;
  auto* pre = app.add_subcommand("preset", "run a shipped figure preset");
  pre->add_option("name", preset_name, "preset name");
  pre->add_option("--out", out_dir, "output directory");
  pre->add_flag("--list", list, "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*pre) {
      if (list) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
        return 0;
      }
      if (preset_name.empty()) {
        diagnose(ErrorCode::InvalidArgument, "preset name required (see preset --list)");
        return kExitConfig;
      }
      run_preset(preset_name, out_dir, threads, quiet);
      return 0;
    }
    const RunConfig cfg = load_config(config_path);
    if (*sim) run_simulate(cfg, quiet);
    else if (*scan) run_scan_cmd(cfg, threads, quiet);
    else run_analyze(cfg);
    return 0;
  } catch (const ParseError& e) {
    diagnose(e.code(), e.what(), e.line());
    return kExitConfig;
  } catch (const Error& e) {
    diagnose(e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    diagnose(ErrorCode::ValidationError, e.what());
    return kExitConfig;
  }
}
