#include "csicalib/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

#include "csicalib/error.hpp"

namespace csicalib {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail(ErrorCode::ConfigError, where_ + " must be an object");
  }

  /// Rejects keys that no accessor asked for.
  void done() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where_);
    }
  }

  void number(const char* key, double& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number()) fail(ErrorCode::ConfigError, where_ + "." + key + " must be a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) fail(ErrorCode::ConfigError, where_ + "." + key + " must be an integer");
    out = v.get<int>();
  }

  void seed(const char* key, std::uint64_t& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_unsigned()) fail(ErrorCode::ConfigError, where_ + "." + key + " must be a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void triple(const char* key, std::array<double, 3>& out) {
    if (!take(key)) return;
    out = parse_triple(obj_.at(key), where_ + "." + key);
  }

  /// null maps to -infinity.
  void optional_number(const char* key, double& out) {
    if (!take(key)) return;
    const auto& v = obj_.at(key);
    if (v.is_null()) {
      out = -std::numeric_limits<double>::infinity();
      return;
    }
    if (!v.is_number()) fail(ErrorCode::ConfigError, where_ + "." + key + " must be a number or null");
    out = v.get<double>();
  }

  const json* child(const char* key) {
    if (!take(key)) return nullptr;
    return &obj_.at(key);
  }

  static std::array<double, 3> parse_triple(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) fail(ErrorCode::ConfigError, where + " must be a 3-element array");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(ErrorCode::ConfigError, where + " must hold numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_sim(const json& j, SimConfig& s) {
  Reader r(j, "sim");
  r.number("tx_power_dbm", s.tx_power_dbm);
  r.triple("attenuation_db", s.attenuation_db);
  r.triple("port_gain_offset_db", s.port_gain_offset_db);
  r.optional_number("noise_floor_dbm", s.noise_floor_dbm);
  r.number("adc_target_dbm", s.adc_target_dbm);
  r.number("adc_ref_amplitude", s.adc_ref_amplitude);
  r.integer("agc_min_db", s.agc_min_db);
  r.integer("agc_max_db", s.agc_max_db);
  r.number("c_fixed_db", s.c_fixed_db);
  r.integer("n_packets", s.n_packets);
  r.seed("seed", s.seed);
  if (const auto* taps = r.child("multipath")) {
    if (!taps->is_array()) fail(ErrorCode::ConfigError, "sim.multipath must be an array");
    s.multipath.clear();
    for (const auto& t : *taps) {
      Tap tap;
      Reader tr(t, "sim.multipath[]");
      tr.number("gain", tap.gain);
      tr.number("phase_deg", tap.phase_deg);
      tr.number("delay_deg_per_subcarrier", tap.delay_deg_per_subcarrier);
      tr.done();
      s.multipath.push_back(tap);
    }
  }
  r.done();
}

void read_distortion(const json& j, PhaseDistortion& d) {
  Reader r(j, "distortion");
  r.number("cfo_rate_deg", d.cfo_rate_deg);
  r.number("sfo_slope_deg", d.sfo_slope_deg);
  r.number("pdd_jitter_deg", d.pdd_jitter_deg);
  r.triple("delta_deg", d.delta_deg);
  r.done();
}

void read_thresholds(const json& j, Thresholds& t) {
  Reader r(j, "thresholds");
  r.number("max_loss_db", t.max_loss_db);
  r.number("max_spread_db", t.max_spread_db);
  r.number("phase_spread_db", t.phase_spread_db);
  r.number("min_loss_db", t.min_loss_db);
  r.number("max_zero_fraction", t.max_zero_fraction);
  r.done();
}

void read_control(const json& j, ControlThresholds& c, int& max_iters) {
  Reader r(j, "control");
  r.number("max_loss_db", c.max_loss_db);
  r.number("max_spread_db", c.max_spread_db);
  r.number("balance_target_db", c.balance_target_db);
  r.number("min_loss_db", c.min_loss_db);
  r.number("agc_floor_step_db", c.agc_floor_step_db);
  r.integer("max_iters", max_iters);
  r.done();
}

ordered_json sim_json(const SimConfig& s) {
  ordered_json j;
  j["tx_power_dbm"] = s.tx_power_dbm;
  j["attenuation_db"] = s.attenuation_db;
  j["port_gain_offset_db"] = s.port_gain_offset_db;
  if (std::isfinite(s.noise_floor_dbm)) {
    j["noise_floor_dbm"] = s.noise_floor_dbm;
  } else {
    j["noise_floor_dbm"] = nullptr;
  }
  j["adc_target_dbm"] = s.adc_target_dbm;
  j["adc_ref_amplitude"] = s.adc_ref_amplitude;
  j["agc_min_db"] = s.agc_min_db;
  j["agc_max_db"] = s.agc_max_db;
  j["c_fixed_db"] = s.c_fixed_db;
  j["n_packets"] = s.n_packets;
  j["seed"] = s.seed;
  auto taps = ordered_json::array();
  for (const auto& t : s.multipath) {
    taps.push_back({{"gain", t.gain}, {"phase_deg", t.phase_deg}, {"delay_deg_per_subcarrier", t.delay_deg_per_subcarrier}});
  }
  j["multipath"] = taps;
  return j;
}

}  // namespace

std::vector<SimConfig> RunConfig::sweep() const {
  if (sweep_preset == "group_one" || (sweep_preset.empty() && sweep_rows.empty())) return group_one_sweep(sim);
  if (sweep_preset == "group_two") return group_two_sweep(sim);
  std::vector<SimConfig> out;
  std::uint64_t i = 0;
  for (const auto& row : sweep_rows) {
    SimConfig c = sim;
    c.attenuation_db = row;
    c.seed = sim.seed + i++;
    out.push_back(c);
  }
  return out;
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    Reader r(j, "config");
    if (const auto* s = r.child("sim")) read_sim(*s, cfg.sim);
    if (const auto* d = r.child("distortion")) read_distortion(*d, cfg.distortion);
    if (const auto* t = r.child("thresholds")) read_thresholds(*t, cfg.thresholds);
    if (const auto* c = r.child("control")) read_control(*c, cfg.control, cfg.max_iters);
    if (const auto* sw = r.child("sweep")) {
      if (sw->is_string()) {
        cfg.sweep_preset = sw->get<std::string>();
        if (cfg.sweep_preset != "group_one" && cfg.sweep_preset != "group_two") {
          fail(ErrorCode::ConfigError, "unknown sweep preset '" + cfg.sweep_preset + "'");
        }
      } else if (sw->is_array()) {
        for (const auto& row : *sw) cfg.sweep_rows.push_back(Reader::parse_triple(row, "sweep[]"));
      } else {
        fail(ErrorCode::ConfigError, "sweep must be a preset name or a list of attenuation triples");
      }
    }
    r.done();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  cfg.sim.validate();
  cfg.sim.constants().validate();
  return cfg;
}

std::string sim_config_to_json(const SimConfig& config) { return sim_json(config).dump(); }

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["sim"] = sim_json(c.sim);
  j["distortion"] = {{"cfo_rate_deg", c.distortion.cfo_rate_deg},
                     {"sfo_slope_deg", c.distortion.sfo_slope_deg},
                     {"pdd_jitter_deg", c.distortion.pdd_jitter_deg},
                     {"delta_deg", c.distortion.delta_deg}};
  j["thresholds"] = {{"max_loss_db", c.thresholds.max_loss_db},
                     {"max_spread_db", c.thresholds.max_spread_db},
                     {"phase_spread_db", c.thresholds.phase_spread_db},
                     {"min_loss_db", c.thresholds.min_loss_db},
                     {"max_zero_fraction", c.thresholds.max_zero_fraction}};
  j["control"] = {{"max_loss_db", c.control.max_loss_db},
                  {"max_spread_db", c.control.max_spread_db},
                  {"balance_target_db", c.control.balance_target_db},
                  {"min_loss_db", c.control.min_loss_db},
                  {"agc_floor_step_db", c.control.agc_floor_step_db},
                  {"max_iters", c.max_iters}};
  if (!c.sweep_preset.empty()) {
    j["sweep"] = c.sweep_preset;
  } else if (!c.sweep_rows.empty()) {
    j["sweep"] = c.sweep_rows;
  }
  return j.dump(2);
}

}  // namespace csicalib
