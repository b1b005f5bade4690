#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csicalib/autocontrol.hpp"
#include "csicalib/chipsim.hpp"
#include "csicalib/powercalib.hpp"
#include "csicalib/quality.hpp"

namespace csicalib {

/// Per-entry amplitude table. A `#` header block lists each packet's port
/// powers, total power and scale factor. Unmeasurable entries read "NA".
std::string amplitude_csv(std::span<const CalibratedFrame> frames);

/// One line per calibrated frame, sibling of the text trace format.
std::string frames_jsonl(std::span<const CalibratedFrame> frames);

/// packet,subcarrier,pair,phase_deg,unmeasurable for the default pair cycle.
std::string phase_csv(std::span<const RawCsiRecord> records);

/// Per-subcarrier means and STDs.
std::string stats_csv(const VariationStats& stats);

/// One row: loss per port, amplitude STD per port, phase STD per pair
/// (subcarrier-averaged).
std::string stats_summary_csv(const VariationStats& stats, const PortLosses& loss_db);

std::string verdict_json(const QualityVerdict& verdict, const VariationStats& stats, const PortLosses& loss_db,
                         const std::vector<std::string>& warnings);

/// One row per sweep configuration.
std::string sweep_csv(std::span<const SweepRow> rows);

/// Single-line JSON of one control iteration.
std::string trajectory_line(const TrajectoryStep& step);

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Minimal line chart with markers; non-finite points are skipped.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const ChartSeries> series);

/// Attenuation vs mean amplitude STD and phase STD.
std::string std_chart_svg(std::span<const SweepRow> rows);
/// Attenuation vs RSSI deviation from the theoretical power line.
std::string rssi_deviation_chart_svg(std::span<const SweepRow> rows);

/// Fixed-precision rendering used by every CSV writer.
std::string fmt_num(double value, int precision = 6);

}  // namespace csicalib
