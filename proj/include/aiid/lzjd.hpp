#pragma once

#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "aiid/bytes.hpp"
#include "aiid/identity.hpp"

// Lempel-Ziv Jaccard distance: structural divergence between byte streams,
// measured on the sets of phrases produced by a single LZ78-style pass.
namespace aiid::lzjd {

struct PhraseSet {
  std::unordered_set<std::string> phrases;

  std::size_t size() const { return phrases.size(); }
  bool empty() const { return phrases.empty(); }
};

// Single left-to-right pass; the trailing partial phrase (already in the
// set) is dropped.
PhraseSet lz_phrases(ByteView bytes);

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// 1 - |a n b| / |a u b|. Throws DegenerateInput if both sets are empty.
double jaccard_distance(const PhraseSet& a, const PhraseSet& b);

inline constexpr std::uint8_t kHashFnv1a64 = 1;
inline constexpr std::uint32_t kDefaultSketchSize = 1024;

std::uint64_t fnv1a64(ByteView bytes);

// Bottom-k sketch of the phrase hashes.
struct DigestSketch {
  std::uint32_t k = kDefaultSketchSize;
  std::vector<std::uint64_t> values;  // ascending, distinct, at most k
  std::uint8_t hash_algorithm_id = kHashFnv1a64;

  bool operator==(const DigestSketch&) const = default;
};

DigestSketch sketch(ByteView bytes, std::uint32_t k = kDefaultSketchSize);
DigestSketch sketch_of(const PhraseSet& set, std::uint32_t k = kDefaultSketchSize);

// Bottom-k estimate of the Jaccard distance. Throws std::invalid_argument on
// mismatched k or hash algorithm, DegenerateInput if both are empty.
double sketch_distance(const DigestSketch& a, const DigestSketch& b);

// "LZJ1" | k u32 | count u32 | values u64 x count | hash_algorithm_id u8
Bytes serialize_sketch(const DigestSketch& s);
DigestSketch parse_sketch(ByteView bytes);

// Governance threshold; there is deliberately no default.
struct DriftPolicy {
  double threshold;
  std::string policy_id;

  DriftPolicy(double tau, std::string id);
};

enum class Outcome { within, drifted };
enum class Mode { exact, sketch };

const char* to_string(Outcome o);
const char* to_string(Mode m);
Mode mode_from_string(std::string_view s);

struct DriftVerdict {
  double score = 0;
  Outcome outcome = Outcome::within;
  PrimaryIdentifier anchor_ai_id;
  Mode mode = Mode::exact;
};

Outcome classify(double score, const DriftPolicy& policy);

// The anchor is either the registered stream itself (exact mode) or its
// sketch (sketch mode, candidate is sketched with the anchor's k).
using Anchor = std::variant<ByteView, DigestSketch>;

DriftVerdict screen_drift(const Anchor& anchor, ByteView candidate, const DriftPolicy& policy,
                          const PrimaryIdentifier& anchor_ai_id = {});

}  // namespace aiid::lzjd
