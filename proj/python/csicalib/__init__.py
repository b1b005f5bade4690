"""CSI calibration, phase extraction, quality classification and receiver simulation."""

from ._csicalib import (
    SUBCARRIERS,
    CalibrationConstants,
    CsiCalibError,
    PhaseDistortion,
    RawCsiRecord,
    SimConfig,
    analyze,
    calibrate,
    circular_stats,
    closed_loop,
    differential_phase,
    encode_binary_trace,
    group_one_sweep,
    group_two_sweep,
    packed_csi_length,
    parse_binary_trace,
    parse_text_trace,
    ratio_discrepancy,
    recommend,
    rssi_to_dbm,
    run_sweep,
    simulate,
    total_power,
    wrap_deg,
    write_text_trace,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
