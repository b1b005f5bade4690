#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csicalib/record.hpp"

namespace csicalib {

/// Frame code of a beamforming (CSI) record.
inline constexpr std::uint8_t kBfeeCode = 0xBB;
/// Fixed header bytes between the frame code and the packed CSI payload.
inline constexpr std::size_t kBfeeHeaderBytes = 20;

/// Declared payload length for a given antenna configuration:
/// floor((30 * (n_rx * n_tx * 16 + 3) + 7) / 8).
std::size_t packed_csi_length(int n_rx, int n_tx);

/// Parses a framed trace. Frames whose code is not 0xBB are skipped.
std::vector<RawCsiRecord> parse_binary_trace(std::span<const std::uint8_t> bytes);

/// Exact inverse of parse_binary_trace.
std::vector<std::uint8_t> encode_binary_trace(std::span<const RawCsiRecord> records);

/// One flat JSON object per line; see docs/trace_format.md.
std::vector<RawCsiRecord> parse_text_trace(std::string_view text);
std::string write_text_trace(std::span<const RawCsiRecord> records);

std::string record_to_text_line(const RawCsiRecord& record);

}  // namespace csicalib
