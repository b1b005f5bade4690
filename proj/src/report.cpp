#include "csicalib/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "csicalib/config.hpp"
#include "csicalib/phase.hpp"

namespace csicalib {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string opt_num(const std::optional<double>& v, int precision = 6) {
  return v ? fmt_num(*v, precision) : std::string("NA");
}

ordered_json opt_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

ordered_json losses_json(const PortLosses& l) {
  auto arr = ordered_json::array();
  for (const auto& x : l) arr.push_back(opt_json(x));
  return arr;
}

ordered_json verdict_obj(const QualityVerdict& v) {
  ordered_json j;
  j["class"] = std::string(to_string(v.cls));
  auto reasons = ordered_json::array();
  for (const auto& r : v.reasons) {
    reasons.push_back({{"criterion", r.criterion},
                       {"threshold", r.threshold},
                       {"observed", r.observed},
                       {"effect", std::string(to_string(r.effect))}});
  }
  j["reasons"] = reasons;
  return j;
}

ordered_json action_obj(const ControlAction& a) {
  return {{"added_attenuation_db", a.added_attenuation_db},
          {"feasible", a.feasible},
          {"predicted_verdict", std::string(to_string(a.predicted_verdict))}};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string fmt_num(double value, int precision) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string amplitude_csv(std::span<const CalibratedFrame> frames) {
  std::ostringstream out;
  out << "# packets: " << frames.size() << "\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    out << "# packet " << i << ": port_power_dbm=";
    for (int p = 0; p < f.n_rx; ++p) {
      if (p) out << ',';
      out << opt_num(f.port_power_dbm[p], 3);
    }
    out << " total_power_dbm=" << fmt_num(f.total_power_dbm, 6) << " rho=";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9e", f.rho);
    out << buf << "\n";
  }
  out << "packet,port,subcarrier,tx,amplitude_dbm\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    for (int p = 0; p < f.n_rx; ++p) {
      for (int k = 0; k < kSubcarriers; ++k) {
        for (int tx = 0; tx < f.n_tx; ++tx) {
          out << i << ',' << (p + 1) << ',' << k << ',' << tx << ',' << opt_num(f.amplitude(k, p, tx)) << "\n";
        }
      }
    }
  }
  return out.str();
}

std::string frames_jsonl(std::span<const CalibratedFrame> frames) {
  std::string out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    ordered_json j;
    j["packet"] = i;
    j["n_rx"] = f.n_rx;
    j["n_tx"] = f.n_tx;
    j["port_power_dbm"] = losses_json(f.port_power_dbm);
    j["total_power_dbm"] = f.total_power_dbm;
    j["rho"] = f.rho;
    auto amp = ordered_json::array();
    for (const auto& a : f.amplitude_dbm) amp.push_back(opt_json(a));
    j["amplitude_dbm"] = amp;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string phase_csv(std::span<const RawCsiRecord> records) {
  std::ostringstream out;
  out << "packet,subcarrier,pair,phase_deg,unmeasurable\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    for (const auto& pair : default_pairs(r.present_ports())) {
      const auto row = differential_phase(r, pair);
      for (int k = 0; k < kSubcarriers; ++k) {
        const auto& ph = row[static_cast<std::size_t>(k)];
        out << i << ',' << k << ',' << pair.label() << ',' << opt_num(ph) << ',' << (ph ? 0 : 1) << "\n";
      }
    }
  }
  return out.str();
}

std::string stats_csv(const VariationStats& st) {
  std::ostringstream out;
  out << "subcarrier";
  for (const auto& p : st.ports) out << ",amp_mean_dbm_p" << p.port + 1 << ",amp_std_db_p" << p.port + 1;
  for (const auto& p : st.pairs) out << ",phase_mean_deg_" << p.pair.label() << ",phase_std_deg_" << p.pair.label();
  out << "\n";
  for (int k = 0; k < kSubcarriers; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    out << k;
    for (const auto& p : st.ports) out << ',' << opt_num(p.amp_mean_dbm[kk]) << ',' << opt_num(p.amp_std_db[kk]);
    for (const auto& p : st.pairs) out << ',' << opt_num(p.phase_mean_deg[kk]) << ',' << opt_num(p.phase_std_deg[kk]);
    out << "\n";
  }
  out << "# zero_fraction";
  for (const auto& p : st.ports) out << " p" << p.port + 1 << '=' << fmt_num(p.zero_fraction, 4);
  out << "\n";
  return out.str();
}

std::string stats_summary_csv(const VariationStats& st, const PortLosses& loss) {
  std::ostringstream out;
  out << "loss_db_p1,loss_db_p2,loss_db_p3,amp_std_db_p1,amp_std_db_p2,amp_std_db_p3,"
         "phase_std_deg_2/1,phase_std_deg_3/2,phase_std_deg_1/3\n";
  for (int p = 0; p < 3; ++p) out << opt_num(loss[p], 2) << ',';
  for (int p = 0; p < 3; ++p) {
    const auto* pv = st.port(p);
    out << (pv ? opt_num(pv->mean_amp_std(), 3) : "NA") << ',';
  }
  const PortPair cycle[] = {{1, 0}, {2, 1}, {0, 2}};
  for (int i = 0; i < 3; ++i) {
    const auto* pv = st.pair(cycle[i]);
    out << (pv ? opt_num(pv->mean_phase_std(), 3) : "NA") << (i < 2 ? "," : "\n");
  }
  return out.str();
}

std::string verdict_json(const QualityVerdict& verdict, const VariationStats& st, const PortLosses& loss,
                         const std::vector<std::string>& warnings) {
  ordered_json j;
  j["verdict"] = verdict_obj(verdict);
  j["n_packets"] = st.n_packets;
  j["agc_median"] = st.agc_median;
  j["est_loss_db"] = losses_json(loss);
  auto ports = ordered_json::array();
  for (const auto& p : st.ports) {
    ports.push_back({{"port", p.port + 1}, {"mean_amp_std_db", opt_json(p.mean_amp_std())}, {"zero_fraction", p.zero_fraction}});
  }
  j["ports"] = ports;
  auto pairs = ordered_json::array();
  for (const auto& p : st.pairs) {
    pairs.push_back({{"pair", p.pair.label()}, {"mean_phase_std_deg", opt_json(p.mean_phase_std())}});
  }
  j["pairs"] = pairs;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "row,att_p1,att_p2,att_p3,agc_median,est_loss_p1,est_loss_p2,est_loss_p3,"
         "rssi_dev_p1,rssi_dev_p2,rssi_dev_p3,amp_std_p1,amp_std_p2,amp_std_p3,"
         "phase_std_2/1,phase_std_3/2,phase_std_1/3,zero_frac_p1,zero_frac_p2,zero_frac_p3,"
         "ratio_disc_2/1,ratio_disc_3/2,ratio_disc_1/3,max_abs_disc,verdict\n";
  const PortPair cycle[] = {{1, 0}, {2, 1}, {0, 2}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i;
    for (double a : r.config.attenuation_db) out << ',' << fmt_num(a, 1);
    out << ',' << r.stats.agc_median;
    for (const auto& l : r.est_loss_db) out << ',' << opt_num(l, 2);
    for (const auto& d : r.rssi_deviation_db) out << ',' << opt_num(d, 2);
    for (int p = 0; p < 3; ++p) {
      const auto* pv = r.stats.port(p);
      out << ',' << (pv ? opt_num(pv->mean_amp_std(), 4) : "NA");
    }
    for (const auto& pair : cycle) {
      const auto* pv = r.stats.pair(pair);
      out << ',' << (pv ? opt_num(pv->mean_phase_std(), 4) : "NA");
    }
    for (int p = 0; p < 3; ++p) {
      const auto* pv = r.stats.port(p);
      out << ',' << (pv ? fmt_num(pv->zero_fraction, 4) : "NA");
    }
    for (const auto& pair : cycle) {
      auto it = std::find_if(r.mean_ratio.begin(), r.mean_ratio.end(), [&](const RatioCheck& c) { return c.pair == pair; });
      out << ',' << (it != r.mean_ratio.end() ? fmt_num(it->discrepancy_db, 4) : "NA");
    }
    out << ',' << fmt_num(r.max_abs_discrepancy_db, 4) << ',' << to_string(r.verdict.cls) << "\n";
  }
  return out.str();
}

std::string trajectory_line(const TrajectoryStep& s) {
  ordered_json j;
  j["iteration"] = s.iteration;
  j["config"] = ordered_json::parse(sim_config_to_json(s.config));
  j["est_loss_db"] = losses_json(s.est_loss_db);
  j["verdict"] = verdict_obj(s.verdict);
  j["action"] = action_obj(s.action);
  return j.dump();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const ChartSeries> series) {
  constexpr double kW = 760, kH = 420, kL = 70, kR = 210, kT = 40, kB = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 = (y0 >= 0.0 && y0 - pad < 0.0) ? 0.0 : y0 - pad;
  y1 += pad;
  const auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  const auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    out << "<text x=\"" << fmt_num(px(xv), 1) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
        << fmt_num(xv, 1) << "</text>\n";
    out << "<text x=\"" << kL - 6 << "\" y=\"" << fmt_num(py(yv) + 4, 1) << "\" text-anchor=\"end\">"
        << fmt_num(yv, 2) << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text transform=\"translate(18," << (kT + kH - kB) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::ostringstream pts;
    auto sorted = series[i].points;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [x, y] : sorted) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      pts << fmt_num(px(x), 1) << ',' << fmt_num(py(y), 1) << ' ';
      out << "<circle cx=\"" << fmt_num(px(x), 1) << "\" cy=\"" << fmt_num(py(y), 1) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts.str() << "\"/>\n";
    const double ly = kT + 18.0 * static_cast<double>(i);
    out << "<rect x=\"" << kW - kR + 12 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << color
        << "\"/>\n";
    out << "<text x=\"" << kW - kR + 28 << "\" y=\"" << ly + 9 << "\">" << xml_escape(series[i].name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string std_chart_svg(std::span<const SweepRow> rows) {
  std::vector<ChartSeries> series;
  for (int p = 0; p < 3; ++p) series.push_back({"amp STD p" + std::to_string(p + 1) + " (dB)", {}});
  const PortPair cycle[] = {{1, 0}, {2, 1}, {0, 2}};
  for (const auto& pair : cycle) series.push_back({"phase STD " + pair.label() + " (deg)", {}});
  for (const auto& r : rows) {
    const double x = r.config.max_attenuation();
    for (int p = 0; p < 3; ++p) {
      const auto* pv = r.stats.port(p);
      const auto v = pv ? pv->mean_amp_std() : std::nullopt;
      series[static_cast<std::size_t>(p)].points.emplace_back(x, v.value_or(std::nan("")));
    }
    for (int i = 0; i < 3; ++i) {
      const auto* pv = r.stats.pair(cycle[i]);
      const auto v = pv ? pv->mean_phase_std() : std::nullopt;
      series[static_cast<std::size_t>(3 + i)].points.emplace_back(x, v.value_or(std::nan("")));
    }
  }
  return line_chart_svg("CSI variation vs attenuation", "attenuation (dB)", "STD", series);
}

std::string rssi_deviation_chart_svg(std::span<const SweepRow> rows) {
  std::vector<ChartSeries> series;
  for (int p = 0; p < 3; ++p) series.push_back({"port " + std::to_string(p + 1), {}});
  for (const auto& r : rows) {
    for (int p = 0; p < 3; ++p) {
      series[static_cast<std::size_t>(p)].points.emplace_back(
          r.config.attenuation_db[p], r.rssi_deviation_db[p].value_or(std::nan("")));
    }
  }
  return line_chart_svg("RSSI deviation from theoretical power", "attenuation (dB)", "deviation (dB)", series);
}

}  // namespace csicalib
