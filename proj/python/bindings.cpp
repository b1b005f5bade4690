#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <string>

#include "csicalib/autocontrol.hpp"
#include "csicalib/chipsim.hpp"
#include "csicalib/error.hpp"
#include "csicalib/ingest.hpp"
#include "csicalib/phase.hpp"
#include "csicalib/powercalib.hpp"
#include "csicalib/quality.hpp"

namespace py = pybind11;
using namespace csicalib;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

py::object loss_list(const PortLosses& l) {
  py::list out;
  for (const auto& x : l) out.append(x ? py::cast(*x) : py::none());
  return out;
}

PortLosses losses_from(const std::vector<std::optional<double>>& v) {
  if (v.size() > 3) throw py::value_error("at most three port losses");
  PortLosses l{};
  for (std::size_t i = 0; i < v.size(); ++i) l[i] = v[i];
  return l;
}

py::array_t<std::int8_t> csi_array(const RawCsiRecord& r) {
  py::array_t<std::int8_t> a({kSubcarriers, r.n_rx, r.n_tx, 2});
  auto m = a.mutable_unchecked<4>();
  for (int k = 0; k < kSubcarriers; ++k)
    for (int rx = 0; rx < r.n_rx; ++rx)
      for (int tx = 0; tx < r.n_tx; ++tx) {
        m(k, rx, tx, 0) = r.at(k, rx, tx).re;
        m(k, rx, tx, 1) = r.at(k, rx, tx).im;
      }
  return a;
}

void set_csi(RawCsiRecord& r, const py::array_t<std::int16_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 4 || a.shape(0) != kSubcarriers || a.shape(3) != 2 || a.shape(1) < 1 || a.shape(1) > 3 ||
      a.shape(2) < 1 || a.shape(2) > 3) {
    throw py::value_error("csi must have shape (30, n_rx, n_tx, 2)");
  }
  const int n_rx = static_cast<int>(a.shape(1));
  const int n_tx = static_cast<int>(a.shape(2));
  auto v = a.unchecked<4>();
  std::vector<CsiSample> csi(static_cast<std::size_t>(kSubcarriers * n_rx * n_tx));
  for (int k = 0; k < kSubcarriers; ++k)
    for (int rx = 0; rx < n_rx; ++rx)
      for (int tx = 0; tx < n_tx; ++tx) {
        const int re = v(k, rx, tx, 0), im = v(k, rx, tx, 1);
        if (re < -128 || re > 127 || im < -128 || im > 127) throw py::value_error("csi component outside [-128, 127]");
        csi[static_cast<std::size_t>((k * n_rx + rx) * n_tx + tx)] = {static_cast<std::int8_t>(re),
                                                                     static_cast<std::int8_t>(im)};
      }
  r.n_rx = n_rx;
  r.n_tx = n_tx;
  r.csi = std::move(csi);
}

py::dict verdict_dict(const QualityVerdict& v) {
  py::list reasons;
  for (const auto& r : v.reasons) {
    reasons.append(py::dict(py::arg("criterion") = r.criterion, py::arg("threshold") = r.threshold,
                            py::arg("observed") = r.observed, py::arg("effect") = std::string(to_string(r.effect))));
  }
  return py::dict(py::arg("class") = std::string(to_string(v.cls)), py::arg("reasons") = reasons);
}

py::dict stats_dict(const VariationStats& st) {
  py::dict amp, phase, zeros;
  for (const auto& p : st.ports) {
    const auto key = std::to_string(p.port + 1);
    amp[key.c_str()] = p.mean_amp_std() ? py::cast(*p.mean_amp_std()) : py::none();
    zeros[key.c_str()] = p.zero_fraction;
  }
  for (const auto& p : st.pairs) {
    phase[p.pair.label().c_str()] = p.mean_phase_std() ? py::cast(*p.mean_phase_std()) : py::none();
  }
  return py::dict(py::arg("n_packets") = st.n_packets, py::arg("agc_median") = st.agc_median,
                  py::arg("amp_std_db") = amp, py::arg("phase_std_deg") = phase, py::arg("zero_fraction") = zeros);
}

py::dict action_dict(const ControlAction& a) {
  return py::dict(py::arg("added_attenuation_db") = a.added_attenuation_db, py::arg("feasible") = a.feasible,
                  py::arg("predicted_verdict") = std::string(to_string(a.predicted_verdict)));
}

}  // namespace

PYBIND11_MODULE(_csicalib, m) {
  m.doc() = "CSI calibration, phase extraction, quality classification and receiver simulation";

  static py::exception<csicalib::Error> exc(m, "CsiCalibError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const csicalib::Error& e) {
      PyObject* type = exc.ptr();
      py::object inst = py::reinterpret_borrow<py::object>(type)(std::string(e.what()));
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("line") = e.line ? py::cast(*e.line) : py::none();
      inst.attr("offset") = e.offset ? py::cast(*e.offset) : py::none();
      PyErr_SetObject(type, inst.ptr());
    }
  });

  m.attr("SUBCARRIERS") = kSubcarriers;

  py::class_<CalibrationConstants>(m, "CalibrationConstants")
      .def(py::init([](double c, int lo, int hi) {
             CalibrationConstants k{c, lo, hi};
             k.validate();
             return k;
           }),
           py::arg("c_fixed") = 44.0, py::arg("agc_min") = 26, py::arg("agc_max") = 63)
      .def_readwrite("c_fixed", &CalibrationConstants::c_fixed)
      .def_readwrite("agc_min", &CalibrationConstants::agc_min)
      .def_readwrite("agc_max", &CalibrationConstants::agc_max);

  py::class_<RawCsiRecord>(m, "RawCsiRecord")
      .def(py::init([](int n_rx, int n_tx) { return make_record(n_rx, n_tx); }), py::arg("n_rx") = 3,
           py::arg("n_tx") = 1)
      .def_readwrite("timestamp_low", &RawCsiRecord::timestamp_low)
      .def_readwrite("bfee_count", &RawCsiRecord::bfee_count)
      .def_readonly("n_rx", &RawCsiRecord::n_rx)
      .def_readonly("n_tx", &RawCsiRecord::n_tx)
      .def_readwrite("rssi", &RawCsiRecord::rssi)
      .def_readwrite("noise", &RawCsiRecord::noise)
      .def_readwrite("agc", &RawCsiRecord::agc)
      .def_readwrite("antenna_perm", &RawCsiRecord::antenna_perm)
      .def_readwrite("rate_flags", &RawCsiRecord::rate_flags)
      .def_property("csi", &csi_array, &set_csi, "int8 array of shape (30, n_rx, n_tx, 2)")
      .def("present_ports", &RawCsiRecord::present_ports)
      .def("validate", [](const RawCsiRecord& r) { validate(r); })
      .def("__eq__", [](const RawCsiRecord& a, const RawCsiRecord& b) { return a == b; })
      .def("__repr__", [](const RawCsiRecord& r) {
        return "<RawCsiRecord " + std::to_string(r.n_rx) + "x" + std::to_string(r.n_tx) + " agc=" +
               std::to_string(r.agc) + ">";
      });

  m.def("parse_binary_trace", [](py::bytes data) {
    const std::string s = data;
    return parse_binary_trace(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });
  m.def("encode_binary_trace", [](const std::vector<RawCsiRecord>& recs) {
    const auto b = encode_binary_trace(recs);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  });
  m.def("parse_text_trace", [](const std::string& s) { return parse_text_trace(s); });
  m.def("write_text_trace", [](const std::vector<RawCsiRecord>& recs) { return write_text_trace(recs); });
  m.def("packed_csi_length", &packed_csi_length, py::arg("n_rx"), py::arg("n_tx"));

  m.def("rssi_to_dbm", &rssi_to_dbm, py::arg("rssi"), py::arg("agc"), py::arg("consts") = CalibrationConstants{});
  m.def("total_power", [](const std::vector<double>& p) { return total_power(p); });
  m.def(
      "calibrate",
      [](const RawCsiRecord& r, const CalibrationConstants& c) {
        const auto f = calibrate(r, c);
        py::array_t<double> amp({kSubcarriers, f.n_rx, f.n_tx});
        auto a = amp.mutable_unchecked<3>();
        for (int k = 0; k < kSubcarriers; ++k)
          for (int rx = 0; rx < f.n_rx; ++rx)
            for (int tx = 0; tx < f.n_tx; ++tx) a(k, rx, tx) = f.amplitude(k, rx, tx).value_or(kNaN);
        return py::dict(py::arg("port_power_dbm") = loss_list(f.port_power_dbm),
                        py::arg("total_power_dbm") = f.total_power_dbm, py::arg("rho") = f.rho,
                        py::arg("amplitude_dbm") = amp);
      },
      py::arg("record"), py::arg("consts") = CalibrationConstants{},
      "Absolute per-entry amplitude; NaN marks unmeasurable entries.");
  m.def(
      "ratio_discrepancy",
      [](const RawCsiRecord& r, const CalibrationConstants& c) {
        py::dict out;
        for (const auto& rc : check_ratio_consistency(r, c)) out[rc.pair.label().c_str()] = rc.discrepancy_db;
        return out;
      },
      py::arg("record"), py::arg("consts") = CalibrationConstants{});

  m.def(
      "differential_phase",
      [](const RawCsiRecord& r, int num, int ref, int tx) {
        const auto row = differential_phase(r, PortPair{num, ref}, tx);
        py::array_t<double> out(kSubcarriers);
        auto o = out.mutable_unchecked<1>();
        for (int k = 0; k < kSubcarriers; ++k) o(k) = row[static_cast<std::size_t>(k)].value_or(kNaN);
        return out;
      },
      py::arg("record"), py::arg("num"), py::arg("ref"), py::arg("tx") = 0,
      "Per-subcarrier phase(num) - phase(ref) in degrees, 0-based ports; NaN where unmeasurable.");
  m.def("wrap_deg", &wrap_deg);
  m.def("circular_stats", [](const std::vector<double>& a) {
    const auto s = circular_stats(a);
    return py::make_tuple(s.mean_deg, s.std_deg);
  });

  m.def(
      "analyze",
      [](const std::vector<RawCsiRecord>& recs, double tx_power, const CalibrationConstants& c) {
        const auto st = variation_stats(recs, c);
        const auto l = estimate_port_loss(recs, tx_power, c);
        return py::dict(py::arg("stats") = stats_dict(st), py::arg("est_loss_db") = loss_list(l),
                        py::arg("verdict") = verdict_dict(classify(st, l, c)));
      },
      py::arg("records"), py::arg("tx_power_dbm") = -3.0, py::arg("consts") = CalibrationConstants{});
  m.def(
      "recommend",
      [](const std::vector<std::optional<double>>& l) { return action_dict(recommend(losses_from(l))); },
      py::arg("est_port_loss_db"));

  py::class_<PhaseDistortion>(m, "PhaseDistortion")
      .def(py::init<>())
      .def_readwrite("cfo_rate_deg", &PhaseDistortion::cfo_rate_deg)
      .def_readwrite("sfo_slope_deg", &PhaseDistortion::sfo_slope_deg)
      .def_readwrite("pdd_jitter_deg", &PhaseDistortion::pdd_jitter_deg)
      .def_readwrite("delta_deg", &PhaseDistortion::delta_deg);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("tx_power_dbm", &SimConfig::tx_power_dbm)
      .def_readwrite("attenuation_db", &SimConfig::attenuation_db)
      .def_readwrite("port_gain_offset_db", &SimConfig::port_gain_offset_db)
      .def_readwrite("noise_floor_dbm", &SimConfig::noise_floor_dbm, "-inf disables noise")
      .def_readwrite("adc_target_dbm", &SimConfig::adc_target_dbm)
      .def_readwrite("adc_ref_amplitude", &SimConfig::adc_ref_amplitude)
      .def_readwrite("agc_min_db", &SimConfig::agc_min_db)
      .def_readwrite("agc_max_db", &SimConfig::agc_max_db)
      .def_readwrite("c_fixed_db", &SimConfig::c_fixed_db)
      .def_readwrite("n_packets", &SimConfig::n_packets)
      .def_readwrite("seed", &SimConfig::seed)
      .def("constants", &SimConfig::constants);

  m.def(
      "simulate",
      [](const SimConfig& c, const PhaseDistortion& d) {
        py::gil_scoped_release release;
        return simulate_capture(c, d).records;
      },
      py::arg("config") = SimConfig{}, py::arg("distortion") = PhaseDistortion{});
  m.def(
      "run_sweep",
      [](const std::vector<SimConfig>& cfgs, const PhaseDistortion& d) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(cfgs, d);
        }
        py::list out;
        for (const auto& r : rows) {
          out.append(py::dict(py::arg("attenuation_db") = r.config.attenuation_db,
                              py::arg("stats") = stats_dict(r.stats), py::arg("est_loss_db") = loss_list(r.est_loss_db),
                              py::arg("verdict") = verdict_dict(r.verdict),
                              py::arg("max_abs_discrepancy_db") = r.max_abs_discrepancy_db));
        }
        return out;
      },
      py::arg("configs"), py::arg("distortion") = PhaseDistortion{});
  m.def("group_one_sweep", &group_one_sweep, py::arg("base") = SimConfig{});
  m.def("group_two_sweep", &group_two_sweep, py::arg("base") = SimConfig{});
  m.def(
      "closed_loop",
      [](const SimConfig& c, const PhaseDistortion& d, int max_iters) {
        std::vector<TrajectoryStep> tr;
        {
          py::gil_scoped_release release;
          tr = closed_loop(c, d, ControlThresholds{}, Thresholds{}, max_iters);
        }
        py::list out;
        for (const auto& s : tr) {
          out.append(py::dict(py::arg("iteration") = s.iteration, py::arg("attenuation_db") = s.config.attenuation_db,
                              py::arg("est_loss_db") = loss_list(s.est_loss_db),
                              py::arg("verdict") = verdict_dict(s.verdict), py::arg("action") = action_dict(s.action)));
        }
        return out;
      },
      py::arg("config"), py::arg("distortion") = PhaseDistortion{}, py::arg("max_iters") = 5);
}
