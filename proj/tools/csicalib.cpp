#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "csicalib/autocontrol.hpp"
#include "csicalib/chipsim.hpp"
#include "csicalib/config.hpp"
#include "csicalib/error.hpp"
#include "csicalib/ingest.hpp"
#include "csicalib/powercalib.hpp"
#include "csicalib/quality.hpp"
#include "csicalib/report.hpp"

namespace fs = std::filesystem;
using namespace csicalib;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;
constexpr int kExitConfig = 4;
constexpr std::size_t kFewRecords = 10;

struct Options {
  double consts_c = 44.0;
  int agc_min = 26;
  int agc_max = 63;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::string out = ".";
  std::string config_path;
  double tx_power = -3.0;
  std::string input;
  bool consts_c_set = false, agc_min_set = false, agc_max_set = false;
};

/// Raised for I/O problems with user-supplied paths.
struct IoError : std::runtime_error {
  int exit_code;
  IoError(const std::string& m, int code) : std::runtime_error(m), exit_code(code) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'", kExitInput);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'", kExitConfig);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'", kExitConfig);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto '" + path.string() + "': " + ec.message(), kExitConfig);
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + o.out + "'", kExitConfig);
  return dir;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CalibrationConstants constants(const Options& o) {
  CalibrationConstants c{o.consts_c, o.agc_min, o.agc_max};
  c.validate();
  return c;
}

std::string detect_format(const Options& o, const std::string& path) {
  if (!o.format.empty()) return o.format;
  const auto ext = fs::path(path).extension().string();
  return (ext == ".jsonl" || ext == ".json" || ext == ".txt") ? "text" : "binary";
}

std::vector<RawCsiRecord> load_trace(const Options& o) {
  const auto bytes = read_file(o.input);
  if (detect_format(o, o.input) == "text") return parse_text_trace(bytes);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
  return parse_binary_trace(std::span<const std::uint8_t>(p, bytes.size()));
}

std::uint64_t resolve_seed(const Options& o, std::uint64_t from_config, bool config_has_seed) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("CSI_CALIB_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') fail(ErrorCode::ConfigError, "CSI_CALIB_SEED is not an unsigned integer");
    return v;
  }
  return config_has_seed ? from_config : 1;
}

RunConfig load_run_config(const Options& o) {
  RunConfig cfg;
  bool has_seed = false;
  if (!o.config_path.empty()) {
    const auto text = read_file(o.config_path);
    cfg = parse_run_config(text);
    try {
      const auto j = nlohmann::json::parse(text);
      has_seed = j.contains("sim") && j["sim"].contains("seed");
    } catch (const nlohmann::json::exception&) {
    }
  }
  cfg.sim.seed = resolve_seed(o, cfg.sim.seed, has_seed);
  if (o.consts_c_set) cfg.sim.c_fixed_db = o.consts_c;
  if (o.agc_min_set) cfg.sim.agc_min_db = o.agc_min;
  if (o.agc_max_set) cfg.sim.agc_max_db = o.agc_max;
  cfg.sim.validate();
  cfg.sim.constants().validate();
  return cfg;
}

void write_manifest(const fs::path& dir, const std::string& command, const Options& o,
                    const std::optional<RunConfig>& run, const std::vector<std::string>& outputs) {
  ordered_json m;
  m["command"] = command;
  m["version"] = CSICALIB_VERSION;
  m["inputs"] = o.input.empty() ? ordered_json::array() : ordered_json::array({o.input});
  m["config_path"] = o.config_path.empty() ? ordered_json(nullptr) : ordered_json(o.config_path);
  m["constants"] = {{"c_fixed_db", o.consts_c}, {"agc_min", o.agc_min}, {"agc_max", o.agc_max}};
  if (run) {
    m["seed"] = run->sim.seed;
    m["config"] = ordered_json::parse(run_config_to_json(*run));
  } else {
    m["seed"] = o.seed ? ordered_json(*o.seed) : ordered_json(nullptr);
    m["tx_power_dbm"] = o.tx_power;
  }
  m["format"] = o.format.empty() ? ordered_json(nullptr) : ordered_json(o.format);
  m["out"] = o.out;
  m["outputs"] = outputs;
  m["timestamp"] = utc_timestamp();
  write_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_parse(const Options& o) {
  const auto records = load_trace(o);
  const auto dir = out_dir(o);
  const bool from_text = detect_format(o, o.input) == "text";
  const auto stem = fs::path(o.input).stem().string();
  std::string name;
  if (from_text) {
    name = stem + ".dat";
    const auto bytes = encode_binary_trace(records);
    write_atomic(dir / name, std::string(bytes.begin(), bytes.end()));
  } else {
    name = stem + ".jsonl";
    write_atomic(dir / name, write_text_trace(records));
  }
  write_manifest(dir, "parse", o, std::nullopt, {name});
  std::cout << records.size() << " records -> " << (dir / name).string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o) {
  const auto consts = constants(o);
  const auto records = load_trace(o);
  std::vector<CalibratedFrame> frames;
  frames.reserve(records.size());
  for (const auto& r : records) frames.push_back(calibrate(r, consts));
  const auto dir = out_dir(o);
  write_atomic(dir / "amplitude.csv", amplitude_csv(frames));
  write_atomic(dir / "frames.jsonl", frames_jsonl(frames));
  write_atomic(dir / "phase.csv", phase_csv(records));
  write_manifest(dir, "calibrate", o, std::nullopt, {"amplitude.csv", "frames.jsonl", "phase.csv"});
  std::cout << frames.size() << " frames calibrated -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_analyze(const Options& o) {
  const auto consts = constants(o);
  const auto records = load_trace(o);
  const auto stats = variation_stats(records, consts);
  const auto losses = estimate_port_loss(records, o.tx_power, consts);
  const auto verdict = classify(stats, losses, consts);
  std::vector<std::string> warnings;
  if (records.size() < kFewRecords) {
    warnings.push_back("only " + std::to_string(records.size()) +
                       " records; standard deviations have wide sampling variance");
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const auto dir = out_dir(o);
  write_atomic(dir / "stats.csv", stats_csv(stats));
  write_atomic(dir / "stats_summary.csv", stats_summary_csv(stats, losses));
  write_atomic(dir / "verdict.json", verdict_json(verdict, stats, losses, warnings));
  write_manifest(dir, "analyze", o, std::nullopt, {"stats.csv", "stats_summary.csv", "verdict.json"});
  std::cout << to_string(verdict.cls) << "\n";
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  const auto run = load_run_config(o);
  const auto cap = simulate_capture(run.sim, run.distortion);
  const auto consts = run.sim.constants();
  const auto stats = variation_stats(cap.records, consts);
  const auto losses = estimate_port_loss(cap.records, run.sim.tx_power_dbm, consts);
  const auto verdict = classify(stats, losses, consts, run.thresholds);
  const auto dir = out_dir(o);
  std::string trace;
  if (o.format == "text") {
    trace = "capture.jsonl";
    write_atomic(dir / trace, write_text_trace(cap.records));
  } else {
    trace = "capture.dat";
    const auto bytes = encode_binary_trace(cap.records);
    write_atomic(dir / trace, std::string(bytes.begin(), bytes.end()));
  }
  write_atomic(dir / "stats_summary.csv", stats_summary_csv(stats, losses));
  write_atomic(dir / "verdict.json", verdict_json(verdict, stats, losses, {}));
  write_manifest(dir, "simulate", o, run, {trace, "stats_summary.csv", "verdict.json"});
  std::cout << cap.records.size() << " packets, " << to_string(verdict.cls) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const auto run = load_run_config(o);
  const auto configs = run.sweep();
  const auto rows = run_sweep(configs, run.distortion, run.thresholds);
  const auto dir = out_dir(o);
  const auto row_dir = dir / "rows";
  std::error_code ec;
  fs::create_directories(row_dir, ec);
  if (ec) throw IoError("cannot create '" + row_dir.string() + "'", kExitConfig);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "row_%02zu.csv", i);
    write_atomic(row_dir / name, stats_csv(rows[i].stats));
    outputs.push_back(std::string("rows/") + name);
  }
  write_atomic(dir / "sweep.csv", sweep_csv(rows));
  write_atomic(dir / "std_vs_attenuation.svg", std_chart_svg(rows));
  write_atomic(dir / "rssi_deviation.svg", rssi_deviation_chart_svg(rows));
  outputs.insert(outputs.begin(), {"sweep.csv", "std_vs_attenuation.svg", "rssi_deviation.svg"});
  write_manifest(dir, "sweep", o, run, outputs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i].config.attenuation_db;
    std::cout << i << ": " << fmt_num(a[0], 0) << "/" << fmt_num(a[1], 0) << "/" << fmt_num(a[2], 0) << " "
              << to_string(rows[i].verdict.cls) << "\n";
  }
  return kExitOk;
}

int cmd_control(const Options& o) {
  const auto run = load_run_config(o);
  const auto trajectory = closed_loop(run.sim, run.distortion, run.control, run.thresholds, run.max_iters);
  std::string lines;
  for (const auto& step : trajectory) lines += trajectory_line(step) + "\n";
  const auto dir = out_dir(o);
  write_atomic(dir / "trajectory.jsonl", lines);
  write_manifest(dir, "control", o, run, {"trajectory.jsonl"});
  const auto& last = trajectory.back();
  std::cout << trajectory.size() << " iterations, final " << to_string(last.verdict.cls)
            << (last.action.feasible ? "" : " (infeasible)") << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Input: return kExitInput;
    case ErrorCategory::Domain: return kExitDomain;
    case ErrorCategory::Config: return kExitConfig;
  }
  return kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI calibration and measurement-quality toolkit"};
  app.set_version_flag("--version", std::string(CSICALIB_VERSION));
  app.require_subcommand(1);
  Options o;

  auto* c_opt = app.add_option("--consts-c", o.consts_c, "Fixed chip offset C in dB")->capture_default_str();
  auto* min_opt = app.add_option("--agc-min", o.agc_min, "Lowest AGC readout")->capture_default_str();
  auto* max_opt = app.add_option("--agc-max", o.agc_max, "Highest AGC readout")->capture_default_str();
  app.add_option("--seed", o.seed, "RNG seed (overrides CSI_CALIB_SEED and the config)");
  app.add_option("--format", o.format, "Trace format of inputs / simulated output")
      ->check(CLI::IsMember({"binary", "text"}));
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--tx-power", o.tx_power, "Transmit power per port in dBm for loss estimates")->capture_default_str();

  auto add_trace_cmd = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("trace", o.input, "Input trace file")->required();
    sub->fallthrough();
    return sub;
  };
  auto* parse = add_trace_cmd("parse", "Convert a trace between the binary and text formats");
  auto* calib = add_trace_cmd("calibrate", "Absolute amplitude and differential phase per packet");
  auto* analyze = add_trace_cmd("analyze", "Variation statistics and quality verdict for a capture");
  auto* simulate = app.add_subcommand("simulate", "Simulate one capture")->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "Run an attenuation sweep")->fallthrough();
  auto* control = app.add_subcommand("control", "Closed-loop attenuation balancing on the simulator")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  o.consts_c_set = c_opt->count() > 0;
  o.agc_min_set = min_opt->count() > 0;
  o.agc_max_set = max_opt->count() > 0;

  try {
    if (*parse) return cmd_parse(o);
    if (*calib) return cmd_calibrate(o);
    if (*analyze) return cmd_analyze(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*control) return cmd_control(o);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what();
    if (e.line) std::cerr << " (line " << *e.line << ")";
    if (e.offset) std::cerr << " (byte offset " << *e.offset << ")";
    std::cerr << "\n";
    return exit_code_for(e);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitConfig;
}
