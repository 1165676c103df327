#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aiid/bytes.hpp"

// AIW1: the deterministic byte encoding of a model's learned parameters.
//
//   magic "AIW1" | format_version u16 | record_count u32 |
//   per record, in bytewise name order:
//     name_len u16 | name | dtype u8 | rank u8 | dims u64 x rank | data_len u64 | data
//
// All integers little-endian. Tensor data is carried verbatim: NaN payloads
// and signed zeros survive, so two streams are equal iff every bit is.
namespace aiid::weights {

enum class DType : std::uint8_t {
  f16 = 1,
  f32 = 2,
  f64 = 3,
  i8 = 4,
  i32 = 5,
  i64 = 6,
  u8 = 7,
  bf16 = 8,
};

std::size_t element_size(DType t);
bool is_valid_dtype(std::uint8_t code);
const char* dtype_name(DType t);

struct TensorRecord {
  std::string name;
  DType dtype = DType::f32;
  std::vector<std::uint64_t> shape;
  Bytes data;

  bool operator==(const TensorRecord&) const = default;
};

inline constexpr std::uint16_t kFormatVersion = 1;

struct WeightManifest {
  std::vector<TensorRecord> records;
  std::uint16_t format_version = kFormatVersion;

  bool operator==(const WeightManifest&) const = default;
};

class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    bad_magic,
    unsupported_version,
    truncated,
    trailing_bytes,
    bad_dtype,
    name_order,
    bad_name,
    bad_rank,
    length_mismatch,
  };

  FormatError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const noexcept { return kind_; }
  // Byte offset into the stream for parse errors; record index for serialize errors.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

// Sorts records by name; convenience for callers that build manifests out of order.
void sort_records(WeightManifest& m);

Bytes serialize(const WeightManifest& m);
WeightManifest parse(ByteView stream);

// Reads and validates a .aiw file, returning its raw bytes.
Bytes read_stream_file(const std::filesystem::path& path);
void write_stream_file(const std::filesystem::path& path, ByteView stream);

// Byte ranges of the tensor payloads inside a serialized stream; used by
// drift fixtures that perturb data while leaving headers intact.
struct DataRange {
  std::size_t offset;
  std::size_t length;
};
std::vector<DataRange> data_ranges(ByteView stream);

}  // namespace aiid::weights
