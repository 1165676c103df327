#include "aiid/bytes.hpp"

#include <sodium.h>

namespace aiid {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view text) {
  if (text.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(text[2 * i]);
    int lo = hex_value(text[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::string to_base64(ByteView bytes) {
  constexpr int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(out.size() - 1);  // drop terminator
  return out;
}

Bytes from_base64(std::string_view text) {
  Bytes out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size()) {
    throw std::invalid_argument("invalid base64");
  }
  out.resize(len);
  return out;
}

void ByteWriter::var16(ByteView b) {
  if (b.size() > 0xffff) throw std::length_error("field longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(b.size()));
  raw(b);
}

ByteView ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw DecodeError(pos_, "truncated: need " + std::to_string(n) + " bytes");
  auto v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint64_t ByteReader::get_le(int n) {
  auto v = raw(static_cast<std::size_t>(n));
  std::uint64_t out = 0;
  for (int i = 0; i < n; ++i) out |= static_cast<std::uint64_t>(v[i]) << (8 * i);
  return out;
}

}  // namespace aiid
