#include "aiid/lzjd.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

namespace aiid::lzjd {

PhraseSet lz_phrases(ByteView bytes) {
  // Phrases are contiguous slices of the input, so the working set borrows
  // views and only the final result owns copies.
  std::unordered_set<std::string_view> seen;
  seen.reserve(bytes.size() / 4 + 16);
  const char* base = reinterpret_cast<const char*>(bytes.data());
  std::size_t start = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::string_view p(base + start, i - start + 1);
    if (seen.insert(p).second) start = i + 1;
  }
  PhraseSet out;
  out.phrases.reserve(seen.size());
  for (auto p : seen) out.phrases.emplace(p);
  return out;
}

double jaccard_distance(const PhraseSet& a, const PhraseSet& b) {
  if (a.empty() && b.empty()) throw DegenerateInput("jaccard distance of two empty sets is undefined");
  const PhraseSet& small = a.size() <= b.size() ? a : b;
  const PhraseSet& large = a.size() <= b.size() ? b : a;
  std::size_t common = 0;
  for (const auto& p : small.phrases) common += large.phrases.count(p);
  std::size_t uni = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

std::uint64_t fnv1a64(ByteView bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DigestSketch sketch_of(const PhraseSet& set, std::uint32_t k) {
  if (k == 0) throw std::invalid_argument("sketch size must be at least 1");
  std::vector<std::uint64_t> hashes;
  hashes.reserve(set.size());
  for (const auto& p : set.phrases) hashes.push_back(fnv1a64(as_bytes(p)));
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  if (hashes.size() > k) hashes.resize(k);
  return {k, std::move(hashes), kHashFnv1a64};
}

DigestSketch sketch(ByteView bytes, std::uint32_t k) { return sketch_of(lz_phrases(bytes), k); }

double sketch_distance(const DigestSketch& a, const DigestSketch& b) {
  if (a.k != b.k) throw std::invalid_argument("sketch sizes differ");
  if (a.hash_algorithm_id != b.hash_algorithm_id) throw std::invalid_argument("sketch hash algorithms differ");
  if (a.values.empty() && b.values.empty()) {
    throw DegenerateInput("sketch distance of two empty sketches is undefined");
  }
  // Merge the two ascending lists, stopping after k union elements.
  std::size_t i = 0, j = 0, taken = 0, both = 0;
  while (taken < a.k && (i < a.values.size() || j < b.values.size())) {
    if (j == b.values.size() || (i < a.values.size() && a.values[i] < b.values[j])) {
      ++i;
    } else if (i == a.values.size() || b.values[j] < a.values[i]) {
      ++j;
    } else {
      ++both;
      ++i;
      ++j;
    }
    ++taken;
  }
  return 1.0 - static_cast<double>(both) / static_cast<double>(taken);
}

Bytes serialize_sketch(const DigestSketch& s) {
  ByteWriter w;
  w.raw(std::string_view("LZJ1"));
  w.u32(s.k);
  w.u32(static_cast<std::uint32_t>(s.values.size()));
  for (auto v : s.values) w.u64(v);
  w.u8(s.hash_algorithm_id);
  return std::move(w).take();
}

DigestSketch parse_sketch(ByteView bytes) {
  ByteReader in(bytes);
  auto magic = in.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "LZJ1") {
    throw DecodeError(0, "bad sketch magic (expected LZJ1)");
  }
  DigestSketch s;
  s.k = in.u32();
  if (s.k == 0) throw DecodeError(4, "sketch size must be at least 1");
  std::size_t count_at = in.offset();
  std::uint32_t count = in.u32();
  if (count > s.k) throw DecodeError(count_at, "sketch holds more than k values");
  if (static_cast<std::uint64_t>(count) * 8 > in.remaining()) throw DecodeError(in.offset(), "truncated sketch");
  s.values.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::size_t at = in.offset();
    std::uint64_t v = in.u64();
    if (!s.values.empty() && v <= s.values.back()) throw DecodeError(at, "sketch values not strictly increasing");
    s.values.push_back(v);
  }
  std::size_t alg_at = in.offset();
  s.hash_algorithm_id = in.u8();
  if (s.hash_algorithm_id != kHashFnv1a64) throw DecodeError(alg_at, "unknown sketch hash algorithm");
  if (!in.done()) throw DecodeError(in.offset(), "trailing bytes after sketch");
  return s;
}

DriftPolicy::DriftPolicy(double tau, std::string id) : threshold(tau), policy_id(std::move(id)) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("drift threshold must lie in [0,1]");
}

const char* to_string(Outcome o) { return o == Outcome::drifted ? "DRIFTED" : "WITHIN"; }
const char* to_string(Mode m) { return m == Mode::sketch ? "SKETCH" : "EXACT"; }

Mode mode_from_string(std::string_view s) {
  if (s == "EXACT") return Mode::exact;
  if (s == "SKETCH") return Mode::sketch;
  throw std::invalid_argument("mode must be EXACT or SKETCH");
}

Outcome classify(double score, const DriftPolicy& policy) {
  return score > policy.threshold ? Outcome::drifted : Outcome::within;
}

DriftVerdict screen_drift(const Anchor& anchor, ByteView candidate, const DriftPolicy& policy,
                          const PrimaryIdentifier& anchor_ai_id) {
  DriftVerdict v;
  v.anchor_ai_id = anchor_ai_id;
  if (const auto* stream = std::get_if<ByteView>(&anchor)) {
    v.mode = Mode::exact;
    v.score = jaccard_distance(lz_phrases(*stream), lz_phrases(candidate));
  } else {
    const auto& s = std::get<DigestSketch>(anchor);
    v.mode = Mode::sketch;
    v.score = sketch_distance(s, sketch(candidate, s.k));
  }
  v.outcome = classify(v.score, policy);
  return v;
}

}  // namespace aiid::lzjd
