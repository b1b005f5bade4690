#include "csicalib/ingest.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string>

#include "json.hpp"

#include "csicalib/error.hpp"

namespace csicalib {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSkipBits = 3;

std::uint16_t read_le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

// Reads 8 bits starting at an arbitrary bit offset (LSB-first stream).
// Only touches the bytes that hold those bits.
std::int8_t read_bits8(std::span<const std::uint8_t> payload, std::size_t bit) {
  const std::size_t byte = bit / 8;
  const unsigned shift = bit % 8;
  unsigned v = payload[byte] >> shift;
  if (shift != 0) v |= static_cast<unsigned>(payload[byte + 1]) << (8 - shift);
  return static_cast<std::int8_t>(static_cast<std::uint8_t>(v & 0xFF));
}

void write_bits8(std::vector<std::uint8_t>& payload, std::size_t bit, std::int8_t value) {
  const auto v = static_cast<unsigned>(static_cast<std::uint8_t>(value));
  const std::size_t byte = bit / 8;
  const unsigned shift = bit % 8;
  payload[byte] |= static_cast<std::uint8_t>((v << shift) & 0xFF);
  if (shift != 0) payload[byte + 1] |= static_cast<std::uint8_t>(v >> (8 - shift));
}

void check_permutation(const std::array<std::uint8_t, 3>& perm, int n_rx) {
  std::array<bool, 3> seen{};
  for (int i = 0; i < n_rx; ++i) {
    if (perm[i] >= n_rx || seen[perm[i]]) {
      fail(ErrorCode::BadPermutation, "antenna_sel does not decode to a permutation");
    }
    seen[perm[i]] = true;
  }
}

RawCsiRecord decode_bfee(std::span<const std::uint8_t> body) {
  if (body.size() < kBfeeHeaderBytes) fail(ErrorCode::TruncatedRecord, "CSI header shorter than 20 bytes");
  const std::uint8_t* h = body.data();
  RawCsiRecord r;
  r.timestamp_low = read_le32(h);
  r.bfee_count = read_le16(h + 4);
  r.n_rx = h[8];
  r.n_tx = h[9];
  r.rssi = {h[10], h[11], h[12]};
  r.noise = static_cast<std::int8_t>(h[13]);
  r.agc = h[14];
  const std::uint8_t antenna_sel = h[15];
  const std::uint16_t len = read_le16(h + 16);
  r.rate_flags = read_le16(h + 18);

  if (r.n_rx < 1 || r.n_rx > kMaxPorts || r.n_tx < 1 || r.n_tx > kMaxPorts) {
    fail(ErrorCode::InvariantViolation, "antenna counts out of range");
  }
  const std::size_t expected = packed_csi_length(r.n_rx, r.n_tx);
  if (len != expected) {
    fail(ErrorCode::LengthMismatch,
         "declared len " + std::to_string(len) + " != " + std::to_string(expected));
  }
  if (body.size() != kBfeeHeaderBytes + len) {
    fail(ErrorCode::LengthMismatch, "frame length disagrees with declared CSI length");
  }
  for (int i = 0; i < kMaxPorts; ++i) r.antenna_perm[i] = (antenna_sel >> (2 * i)) & 0x3;
  check_permutation(r.antenna_perm, r.n_rx);
  for (int p = r.n_rx; p < kMaxPorts; ++p) {
    if (r.rssi[p] != 0) fail(ErrorCode::InvariantViolation, "rssi set for absent port");
  }

  const auto payload = body.subspan(kBfeeHeaderBytes, len);
  r.csi.assign(static_cast<std::size_t>(kSubcarriers * r.n_rx * r.n_tx), CsiSample{});
  std::size_t bit = 0;
  for (int k = 0; k < kSubcarriers; ++k) {
    bit += kSkipBits;
    for (int rx = 0; rx < r.n_rx; ++rx) {
      for (int tx = 0; tx < r.n_tx; ++tx) {
        CsiSample s;
        s.re = read_bits8(payload, bit);
        s.im = read_bits8(payload, bit + 8);
        bit += 16;
        r.at(k, r.antenna_perm[rx], tx) = s;
      }
    }
  }
  return r;
}

std::vector<std::uint8_t> encode_bfee(const RawCsiRecord& r) {
  validate(r);
  const std::size_t len = packed_csi_length(r.n_rx, r.n_tx);
  std::vector<std::uint8_t> out;
  out.reserve(kBfeeHeaderBytes + len);
  put_le32(out, r.timestamp_low);
  put_le16(out, r.bfee_count);
  out.push_back(0);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(r.n_rx));
  out.push_back(static_cast<std::uint8_t>(r.n_tx));
  out.insert(out.end(), r.rssi.begin(), r.rssi.end());
  out.push_back(static_cast<std::uint8_t>(r.noise));
  out.push_back(r.agc);
  std::uint8_t antenna_sel = 0;
  for (int i = 0; i < kMaxPorts; ++i) antenna_sel |= static_cast<std::uint8_t>(r.antenna_perm[i] << (2 * i));
  out.push_back(antenna_sel);
  put_le16(out, static_cast<std::uint16_t>(len));
  put_le16(out, r.rate_flags);

  std::vector<std::uint8_t> payload(len, 0);
  std::size_t bit = 0;
  for (int k = 0; k < kSubcarriers; ++k) {
    bit += kSkipBits;
    for (int rx = 0; rx < r.n_rx; ++rx) {
      for (int tx = 0; tx < r.n_tx; ++tx) {
        const CsiSample& s = r.at(k, r.antenna_perm[rx], tx);
        write_bits8(payload, bit, s.re);
        write_bits8(payload, bit + 8, s.im);
        bit += 16;
      }
    }
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

// ---- text format ----

const std::set<std::string>& text_fields() {
  static const std::set<std::string> fields = {
      "timestamp_low", "bfee_count", "n_rx",       "n_tx", "rssi", "noise",
      "agc",           "antenna_perm", "rate_flags", "csi"};
  return fields;
}

template <typename T>
T int_field(const nlohmann::json& obj, const char* name, long long lo, long long hi) {
  if (!obj.contains(name)) throw std::invalid_argument(std::string("missing field '") + name + "'");
  const auto& v = obj.at(name);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("field '") + name + "' is not an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi) throw std::invalid_argument(std::string("field '") + name + "' out of range");
  return static_cast<T>(x);
}

std::array<std::uint8_t, 3> triple_field(const nlohmann::json& obj, const char* name, int hi) {
  if (!obj.contains(name)) throw std::invalid_argument(std::string("missing field '") + name + "'");
  const auto& v = obj.at(name);
  if (!v.is_array() || v.size() != 3) {
    throw std::invalid_argument(std::string("field '") + name + "' must be a 3-element array");
  }
  std::array<std::uint8_t, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer()) throw std::invalid_argument(std::string("field '") + name + "' must hold integers");
    const auto x = v[i].get<long long>();
    if (x < 0 || x > hi) throw std::invalid_argument(std::string("field '") + name + "' out of range");
    out[i] = static_cast<std::uint8_t>(x);
  }
  return out;
}

RawCsiRecord record_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!text_fields().count(key)) throw std::invalid_argument("unknown field '" + key + "'");
  }
  RawCsiRecord r;
  r.timestamp_low = int_field<std::uint32_t>(obj, "timestamp_low", 0, 0xFFFFFFFFLL);
  r.bfee_count = int_field<std::uint16_t>(obj, "bfee_count", 0, 0xFFFF);
  r.n_rx = int_field<int>(obj, "n_rx", 1, 3);
  r.n_tx = int_field<int>(obj, "n_tx", 1, 3);
  r.rssi = triple_field(obj, "rssi", 255);
  r.noise = int_field<std::int8_t>(obj, "noise", -128, 127);
  r.agc = int_field<std::uint8_t>(obj, "agc", 0, 255);
  r.antenna_perm = triple_field(obj, "antenna_perm", 3);
  r.rate_flags = int_field<std::uint16_t>(obj, "rate_flags", 0, 0xFFFF);

  if (!obj.contains("csi") || !obj.at("csi").is_array()) throw std::invalid_argument("field 'csi' must be an array");
  const auto& csi = obj.at("csi");
  const auto expected = static_cast<std::size_t>(kSubcarriers * r.n_rx * r.n_tx);
  if (csi.size() != expected) {
    throw std::invalid_argument("csi has " + std::to_string(csi.size()) + " pairs, expected " +
                                std::to_string(expected));
  }
  r.csi.reserve(expected);
  for (const auto& pair : csi) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw std::invalid_argument("csi entries must be [real, imag] integer pairs");
    }
    const auto re = pair[0].get<long long>();
    const auto im = pair[1].get<long long>();
    if (re < -128 || re > 127 || im < -128 || im > 127) throw std::invalid_argument("csi component outside [-128, 127]");
    r.csi.push_back({static_cast<std::int8_t>(re), static_cast<std::int8_t>(im)});
  }
  return r;
}

}  // namespace

std::size_t packed_csi_length(int n_rx, int n_tx) {
  return static_cast<std::size_t>((kSubcarriers * (n_rx * n_tx * 16 + kSkipBits) + 7) / 8);
}

std::vector<RawCsiRecord> parse_binary_trace(std::span<const std::uint8_t> bytes) {
  std::vector<RawCsiRecord> records;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t frame_start = pos;
    try {
      if (bytes.size() - pos < 3) fail(ErrorCode::TruncatedRecord, "incomplete frame header");
      // The length field counts the code byte plus the body.
      const std::size_t field_len = (static_cast<std::size_t>(bytes[pos]) << 8) | bytes[pos + 1];
      if (field_len == 0) fail(ErrorCode::TruncatedRecord, "zero-length frame");
      if (field_len > bytes.size() - pos - 2) {
        fail(ErrorCode::TruncatedRecord, "frame length " + std::to_string(field_len) + " exceeds remaining bytes");
      }
      const std::uint8_t code = bytes[pos + 2];
      const auto body = bytes.subspan(pos + 3, field_len - 1);
      pos += 2 + field_len;
      if (code == kBfeeCode) records.push_back(decode_bfee(body));
    } catch (Error& e) {
      e.offset = frame_start;
      throw;
    }
  }
  return records;
}

std::vector<std::uint8_t> encode_binary_trace(std::span<const RawCsiRecord> records) {
  std::vector<std::uint8_t> out;
  for (const auto& r : records) {
    const auto body = encode_bfee(r);
    const std::size_t field_len = body.size() + 1;
    out.push_back(static_cast<std::uint8_t>(field_len >> 8));
    out.push_back(static_cast<std::uint8_t>(field_len & 0xFF));
    out.push_back(kBfeeCode);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

std::string record_to_text_line(const RawCsiRecord& r) {
  validate(r);
  ordered_json obj;
  obj["timestamp_low"] = r.timestamp_low;
  obj["bfee_count"] = r.bfee_count;
  obj["n_rx"] = r.n_rx;
  obj["n_tx"] = r.n_tx;
  obj["rssi"] = {r.rssi[0], r.rssi[1], r.rssi[2]};
  obj["noise"] = r.noise;
  obj["agc"] = r.agc;
  obj["antenna_perm"] = {r.antenna_perm[0], r.antenna_perm[1], r.antenna_perm[2]};
  obj["rate_flags"] = r.rate_flags;
  auto csi = ordered_json::array();
  for (const auto& s : r.csi) csi.push_back({s.re, s.im});
  obj["csi"] = std::move(csi);
  return obj.dump();
}

std::string write_text_trace(std::span<const RawCsiRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_text_line(r);
    out += '\n';
  }
  return out;
}

std::vector<RawCsiRecord> parse_text_trace(std::string_view text) {
  std::vector<RawCsiRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      auto record = record_from_json(nlohmann::json::parse(line));
      validate(record);
      records.push_back(std::move(record));
    } catch (const std::exception& ex) {
      Error err(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + ex.what());
      err.line = line_no;
      throw err;
    }
  }
  return records;
}

}  // namespace csicalib
