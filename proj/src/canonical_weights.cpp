#include "aiid/canonical_weights.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>

namespace aiid::weights {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'I', 'W', '1'};

// Structural UTF-8 check: lead/continuation pattern, no overlongs, no surrogates.
bool valid_utf8(std::string_view s) {
  auto u = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = u(i);
    std::size_t n;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      n = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      n = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      n = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + n >= s.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((u(i + k) & 0xc0) != 0x80) return false;
      cp = cp << 6 | (u(i + k) & 0x3f);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[n] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += n + 1;
  }
  return true;
}

// Expected payload size; false on overflow.
bool byte_length(DType t, const std::vector<std::uint64_t>& shape, std::uint64_t& out) {
  std::uint64_t n = element_size(t);
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) return false;
    n *= d;
  }
  out = n;
  return true;
}

}  // namespace

std::size_t element_size(DType t) {
  switch (t) {
    case DType::i8:
    case DType::u8:
      return 1;
    case DType::f16:
    case DType::bf16:
      return 2;
    case DType::f32:
    case DType::i32:
      return 4;
    case DType::f64:
    case DType::i64:
      return 8;
  }
  throw std::invalid_argument("unknown dtype");
}

bool is_valid_dtype(std::uint8_t code) { return code >= 1 && code <= 8; }

const char* dtype_name(DType t) {
  switch (t) {
    case DType::f16: return "f16";
    case DType::f32: return "f32";
    case DType::f64: return "f64";
    case DType::i8: return "i8";
    case DType::i32: return "i32";
    case DType::i64: return "i64";
    case DType::u8: return "u8";
    case DType::bf16: return "bf16";
  }
  return "?";
}

FormatError::FormatError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what), kind_(kind), offset_(offset) {}

void sort_records(WeightManifest& m) {
  std::sort(m.records.begin(), m.records.end(),
            [](const TensorRecord& a, const TensorRecord& b) { return a.name < b.name; });
}

Bytes serialize(const WeightManifest& m) {
  using K = FormatError::Kind;
  if (m.format_version != kFormatVersion) {
    throw FormatError(K::unsupported_version, 0, "unsupported format version");
  }
  if (m.records.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(K::length_mismatch, 0, "too many records");
  }

  ByteWriter w;
  w.raw(ByteView(kMagic));
  w.u16(m.format_version);
  w.u32(static_cast<std::uint32_t>(m.records.size()));

  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    if (r.name.empty() || r.name.size() > 0xffff) {
      throw FormatError(K::bad_name, i, "record name length must be 1..65535: '" + r.name + "'");
    }
    if (!valid_utf8(r.name)) throw FormatError(K::bad_name, i, "record name is not valid UTF-8");
    // std::string compares as unsigned char, which is bytewise order.
    if (i > 0 && !(m.records[i - 1].name < r.name)) {
      throw FormatError(K::name_order, i, "record names not strictly increasing at '" + r.name + "'");
    }
    if (!is_valid_dtype(static_cast<std::uint8_t>(r.dtype))) {
      throw FormatError(K::bad_dtype, i, "invalid dtype");
    }
    if (r.shape.size() > 255) throw FormatError(K::bad_rank, i, "rank exceeds 255");
    std::uint64_t expect = 0;
    if (!byte_length(r.dtype, r.shape, expect) || expect != r.data.size()) {
      throw FormatError(K::length_mismatch, i, "data length does not match dtype and shape for '" + r.name + "'");
    }

    w.var16(r.name);
    w.u8(static_cast<std::uint8_t>(r.dtype));
    w.u8(static_cast<std::uint8_t>(r.shape.size()));
    for (auto d : r.shape) w.u64(d);
    w.u64(r.data.size());
    w.raw(r.data);
  }
  return std::move(w).take();
}

WeightManifest parse(ByteView stream) {
  using K = FormatError::Kind;
  ByteReader in(stream);
  // Re-tag reader truncation as a format error with the same offset.
  auto guarded = [&](auto&& fn) {
    try {
      return fn();
    } catch (const DecodeError& e) {
      throw FormatError(K::truncated, e.offset(), "truncated stream");
    }
  };

  WeightManifest m;
  guarded([&] {
    auto magic = in.raw(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
      throw FormatError(K::bad_magic, 0, "bad magic (expected AIW1)");
    }
    return 0;
  });
  std::size_t at = in.offset();
  m.format_version = guarded([&] { return in.u16(); });
  if (m.format_version != kFormatVersion) {
    throw FormatError(K::unsupported_version, at, "unsupported format version " + std::to_string(m.format_version));
  }
  std::uint32_t count = guarded([&] { return in.u32(); });

  // Each record is at least 13 bytes; reject absurd counts before reserving.
  if (static_cast<std::uint64_t>(count) * 13 > in.remaining()) {
    throw FormatError(K::truncated, in.offset(), "record count exceeds stream size");
  }
  m.records.reserve(count);

  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord r;
    std::size_t name_at = in.offset();
    auto name = guarded([&] { return in.var16(); });
    r.name.assign(name.begin(), name.end());
    if (r.name.empty() || !valid_utf8(r.name)) {
      throw FormatError(K::bad_name, name_at, "empty or non-UTF-8 record name");
    }
    if (!m.records.empty() && !(m.records.back().name < r.name)) {
      throw FormatError(K::name_order, name_at, "record names not strictly increasing at '" + r.name + "'");
    }
    at = in.offset();
    std::uint8_t code = guarded([&] { return in.u8(); });
    if (!is_valid_dtype(code)) {
      throw FormatError(K::bad_dtype, at, "dtype code " + std::to_string(code) + " outside enum");
    }
    r.dtype = static_cast<DType>(code);
    std::uint8_t rank = guarded([&] { return in.u8(); });
    r.shape.resize(rank);
    for (auto& d : r.shape) d = guarded([&] { return in.u64(); });
    at = in.offset();
    std::uint64_t len = guarded([&] { return in.u64(); });
    std::uint64_t expect = 0;
    if (!byte_length(r.dtype, r.shape, expect) || expect != len) {
      throw FormatError(K::length_mismatch, at, "data length does not match dtype and shape for '" + r.name + "'");
    }
    if (len > in.remaining()) throw FormatError(K::truncated, in.offset(), "truncated tensor data");
    auto data = in.raw(static_cast<std::size_t>(len));
    r.data.assign(data.begin(), data.end());
    m.records.push_back(std::move(r));
  }
  if (!in.done()) throw FormatError(K::trailing_bytes, in.offset(), "trailing bytes after last record");
  return m;
}

Bytes read_stream_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  parse(data);
  return data;
}

void write_stream_file(const std::filesystem::path& path, ByteView stream) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(stream.data()), static_cast<std::streamsize>(stream.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<DataRange> data_ranges(ByteView stream) {
  ByteReader in(stream);
  in.raw(4);
  in.u16();
  std::uint32_t count = in.u32();
  std::vector<DataRange> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    in.var16();
    in.u8();
    std::uint8_t rank = in.u8();
    in.raw(8u * rank);
    auto len = static_cast<std::size_t>(in.u64());
    out.push_back({in.offset(), len});
    in.raw(len);
  }
  return out;
}

}  // namespace aiid::weights
