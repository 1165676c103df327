// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>

#include "aiid/canonical_weights.hpp"
#include "aiid/http_api.hpp"
#include "aiid/identity.hpp"
#include "aiid/ledger.hpp"
#include "aiid/lzjd.hpp"
#include "aiid/possession.hpp"
#include "aiid/registry_service.hpp"
#include "support/oracles.hpp"

using namespace aiid;
namespace ts = testing_support;

namespace {

struct Result {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Result()> run;
};

constexpr std::size_t kMiB = 1024 * 1024;

// Deterministic, cryptographic-quality randomness: SHA-256(label || seed || counter).
zk::RandomFill sha_fill(std::uint64_t seed) {
  struct State {
    std::uint64_t seed, counter = 0;
    Digest block{};
    std::size_t used = 32;
  };
  auto st = std::make_shared<State>(State{seed});
  return [st](std::span<std::uint8_t> out) {
    for (auto& b : out) {
      if (st->used == 32) {
        ByteWriter w;
        w.raw(std::string_view("acceptance-rng"));
        w.u64(st->seed);
        w.u64(st->counter++);
        st->block = crypto::sha256(w.bytes());
        st->used = 0;
      }
      b = st->block[st->used++];
    }
  };
}

// Replaces `fraction` of the tensor payload bytes (chosen without replacement)
// with different values.
Bytes perturb(ByteView stream, double fraction, std::mt19937_64& rng) {
  Bytes out(stream.begin(), stream.end());
  std::vector<std::size_t> positions;
  for (const auto& r : weights::data_ranges(stream)) {
    for (std::size_t i = 0; i < r.length; ++i) positions.push_back(r.offset + i);
  }
  auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(positions.size())));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + rng() % (positions.size() - i);
    std::swap(positions[i], positions[j]);
    out[positions[i]] ^= static_cast<std::uint8_t>(1 + rng() % 255);
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Result identity_determinism() {
  std::mt19937_64 rng(100);
  IssuerNamespace ns("TESTOWN1");
  for (int i = 0; i < 100; ++i) {
    auto m = ts::random_manifest(rng, 8, 256);
    Bytes a = weights::serialize(m);
    Bytes b = weights::serialize(weights::parse(a));
    auto id_a = derive_ai_id(compute_commitment(a), ns);
    auto id_b = derive_ai_id(compute_commitment(b), ns);
    // Second, independent hash implementation stands in for the second platform.
    Bytes pre(ns.text().begin(), ns.text().end());
    auto h = ts::openssl_sha256(b);
    pre.insert(pre.end(), h.begin(), h.end());
    if (a != b || id_a != id_b || id_a.digest != ts::openssl_sha256(pre)) {
      return {false, "manifest " + std::to_string(i) + " diverged"};
    }
  }
  // Pinned cross-platform vector.
  bool golden = to_hex(compute_commitment(weights::serialize({})).digest) ==
                "524c6f33709d0a0db6adae5d68b672831734a89c4d081abf052d54906a54a433";
  return {golden, golden ? "100/100 identical; golden empty-stream commitment matches" : "golden vector mismatch"};
}

Result avalanche() {
  std::mt19937_64 rng(200);
  weights::WeightManifest m;
  m.records.push_back({"w", weights::DType::u8, {kMiB}, ts::random_bytes(rng, kMiB)});
  Bytes s = weights::serialize(m);
  const auto base = compute_commitment(s).digest;
  std::set<Digest> seen{base};
  std::set<std::size_t> bits;
  while (bits.size() < 1000) bits.insert(rng() % (s.size() * 8));
  for (auto bit : bits) {
    s[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    seen.insert(compute_commitment(s).digest);
    s[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  }
  std::size_t distinct = seen.size() - 1;
  return {distinct == 1000, std::to_string(distinct) + "/1000 distinct commitments, all differ from the original"};
}

Result checksum_detection() {
  std::mt19937_64 rng(300);
  const std::string upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  const std::string alnum = "0123456789" + upper;
  const std::string digits = "0123456789";
  std::uint64_t tried = 0, caught = 0;
  for (int n = 0; n < 120; ++n) {
    auto pick = [&](const std::string& alphabet, int len) {
      std::string s;
      for (int i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
      return s;
    };
    char date[9];
    std::snprintf(date, sizeof date, "%04d%02d%02d", 2000 + static_cast<int>(rng() % 30),
                  1 + static_cast<int>(rng() % 12), 1 + static_cast<int>(rng() % 28));
    SecondaryFields f{pick(upper, 2), pick(alnum, 8), pick(alnum, 3), pick(alnum, 2), date};
    Commitment h{ts::openssl_sha256(ts::random_bytes(rng, 32))};
    std::string good = build_secondary_id(f, h).render();
    for (std::size_t i = 0; i < good.size(); ++i) {
      if (good[i] == '-') continue;
      const std::string& alphabet = i < 2 ? upper : (i >= 18 && i < 26) ? digits : alnum;
      for (char c : alphabet) {
        if (c == good[i]) continue;
        std::string t = good;
        t[i] = c;
        ++tried;
        try {
          parse_secondary_id(t, true);
        } catch (const IdentifierError&) {
          ++caught;
        }
      }
    }
  }
  double rate = static_cast<double>(caught) / static_cast<double>(tried);
  return {rate >= 0.995, "120 IDs, " + std::to_string(caught) + "/" + std::to_string(tried) +
                             " substitutions rejected, rate " + fmt("%.5f", rate) + " (expected 1295/1296 = 0.99923)"};
}

Result lzjd_oracle() {
  std::mt19937_64 rng(400);
  int exact_ok = 0;
  for (int i = 0; i < 500; ++i) {
    int alphabet = 1 + static_cast<int>(rng() % 16);
    Bytes a(rng() % 4097);
    for (auto& x : a) x = static_cast<std::uint8_t>(rng() % alphabet);
    Bytes b = a;
    if (!b.empty()) {
      for (int k = 0, n = static_cast<int>(rng() % 64); k < n; ++k) b[rng() % b.size()] = static_cast<std::uint8_t>(rng() % alphabet);
    }
    b.push_back(static_cast<std::uint8_t>(rng()));
    auto pa = lzjd::lz_phrases(a);
    auto pb = lzjd::lz_phrases(b);
    auto na = ts::naive_phrases(a);
    auto nb = ts::naive_phrases(b);
    bool same_sets = std::set<std::string>(pa.phrases.begin(), pa.phrases.end()) == na &&
                     std::set<std::string>(pb.phrases.begin(), pb.phrases.end()) == nb;
    if (same_sets && lzjd::jaccard_distance(pa, pb) == ts::naive_jaccard(na, nb)) ++exact_ok;
  }

  int within = 0;
  double worst = 0, sum = 0;
  for (int i = 0; i < 50; ++i) {
    weights::WeightManifest m;
    m.records.push_back({"w", weights::DType::u8, {kMiB}, ts::random_bytes(rng, kMiB)});
    Bytes a = weights::serialize(m);
    Bytes b = perturb(a, 0.01 + 0.98 * static_cast<double>(i) / 49.0, rng);
    auto pa = lzjd::lz_phrases(a);
    auto pb = lzjd::lz_phrases(b);
    double exact = lzjd::jaccard_distance(pa, pb);
    double est = lzjd::sketch_distance(lzjd::sketch_of(pa), lzjd::sketch_of(pb));
    double d = std::abs(exact - est);
    worst = std::max(worst, d);
    sum += d;
    within += d <= 0.05;
  }
  bool pass = exact_ok == 500 && within == 50;
  return {pass, "exact vs naive " + std::to_string(exact_ok) + "/500 bit-exact; sketch k=1024 within 0.05 on " +
                    std::to_string(within) + "/50 1 MiB pairs (max |d| " + fmt("%.4f", worst) + ", mean " +
                    fmt("%.4f", sum / 50) + ")"};
}

Result drift_monotonicity() {
  const double fractions[] = {0.01, 0.10, 0.50, 1.00};
  double mean[4] = {};
  for (int t = 0; t < 20; ++t) {
    std::mt19937_64 rng(500 + static_cast<std::uint64_t>(t));
    weights::WeightManifest m;
    m.records.push_back({"w", weights::DType::u8, {kMiB}, ts::random_bytes(rng, kMiB)});
    Bytes anchor = weights::serialize(m);
    auto pa = lzjd::lz_phrases(anchor);
    for (int f = 0; f < 4; ++f) {
      mean[f] += lzjd::jaccard_distance(pa, lzjd::lz_phrases(perturb(anchor, fractions[f], rng))) / 20.0;
    }
  }
  bool pass = mean[0] < mean[1] && mean[1] < mean[2] && mean[2] < mean[3];
  return {pass, "mean distance 1%: " + fmt("%.4f", mean[0]) + ", 10%: " + fmt("%.4f", mean[1]) + ", 50%: " +
                    fmt("%.4f", mean[2]) + ", 100%: " + fmt("%.4f", mean[3])};
}

Result ledger_tamper() {
  ts::Developer dev;
  auto authority = crypto::generate_keypair();
  ledger::Ledger l({.path = {}, .authorities = {authority.public_key}});
  std::vector<PrimaryIdentifier> ids;
  for (int i = 0; i < 6; ++i) {
    auto e = service::entry_from_bundle(ts::make_bundle(dev, as_bytes("model-" + std::to_string(i)), 1'750'000'000));
    l.append_register(e);
    ids.push_back(e.ai_id);
  }
  l.append_status(ts::make_status(authority, ids[0], ledger::TestingStatus::P, 1'750'000'100));
  l.append_status(ts::make_status(authority, ids[1], ledger::TestingStatus::F, 1'750'000'200));
  l.append_status(ts::make_status(authority, ids[0], ledger::TestingStatus::X, 1'750'000'300));
  if (l.height() != 10) return {false, "fixture has " + std::to_string(l.height()) + " blocks"};
  Bytes file;
  for (const auto& b : l.block_bytes(0)) file.insert(file.end(), b.begin(), b.end());
  if (!ledger::verify_chain_bytes(file).ok) return {false, "pristine fixture rejected"};

  std::uint64_t mutations = 0, caught = 0;
  for (std::size_t i = 0; i < file.size(); ++i) {
    const std::uint8_t orig = file[i];
    for (int v = 0; v < 256; ++v) {
      if (v == orig) continue;
      file[i] = static_cast<std::uint8_t>(v);
      ++mutations;
      caught += !ledger::verify_chain_bytes(file).ok;
    }
    file[i] = orig;
  }
  return {caught == mutations, "10 blocks, " + std::to_string(file.size()) + " bytes, " + std::to_string(caught) + "/" +
                                   std::to_string(mutations) + " single-byte mutations detected (all 255 values per byte)"};
}

Result status_machine() {
  using S = ledger::TestingStatus;
  ts::Developer dev;
  auto authority = crypto::generate_keypair();
  ledger::Ledger l({.path = {}, .authorities = {authority.public_key}});
  const S all[] = {S::U, S::P, S::F, S::X};
  const std::map<S, std::vector<S>> reach{{S::U, {}}, {S::P, {S::P}}, {S::F, {S::F}}, {S::X, {S::P, S::X}}};
  std::string accepted;
  int n = 0;
  for (S from : all) {
    for (S to : all) {
      auto e = service::entry_from_bundle(ts::make_bundle(dev, as_bytes("m" + std::to_string(n++)), 1'750'000'000));
      l.append_register(e);
      std::uint64_t ts_ = 1'750'000'000;
      for (S s : reach.at(from)) l.append_status(ts::make_status(authority, e.ai_id, s, ++ts_));
      try {
        l.append_status(ts::make_status(authority, e.ai_id, to, ++ts_));
        accepted += std::string(accepted.empty() ? "" : " ") + ledger::to_char(from) + "->" + ledger::to_char(to);
      } catch (const ledger::LedgerError& ex) {
        if (ex.kind() != ledger::LedgerError::Kind::illegal_transition) return {false, ex.what()};
      }
    }
  }
  return {accepted == "U->P U->F P->F P->X F->X", "accepted: " + accepted + " (16 pairs tried)"};
}

struct ZkFixture {
  IssuerNamespace ns{"TESTOWN1"};
  Commitment h = compute_commitment(as_bytes("acceptance weights"));
  zk::PossessionStatement statement(std::uint64_t i) const {
    zk::PossessionStatement st{derive_ai_id(h, ns), ns, zk::kDefaultRounds, {}};
    sha_fill(0xC0FFEE + i)(st.challenge_nonce);
    return st;
  }
};

Result zk_completeness() {
  ZkFixture f;
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    auto st = f.statement(static_cast<std::uint64_t>(i));
    ok += zk::verify_bytes(st, zk::serialize_proof(zk::prove(st, {f.h}))).accepted();
  }
  return {ok == 100, std::to_string(ok) + "/100 honest proofs at r=69 accepted"};
}

Result zk_soundness() {
  ZkFixture f;
  std::mt19937_64 rng(900);
  int rejected = 0;
  for (int p = 0; p < 10; ++p) {
    auto st = f.statement(1000 + static_cast<std::uint64_t>(p));
    Bytes proof = zk::serialize_proof(zk::prove(st, {f.h}));
    if (!zk::verify_bytes(st, proof).accepted()) return {false, "honest proof rejected"};
    for (int m = 0; m < 100; ++m) {
      Bytes bad = proof;
      bad[rng() % bad.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      rejected += !zk::verify_bytes(st, bad).accepted();
    }
  }
  double bound = std::pow(2.0 / 3.0, zk::kDefaultRounds);
  double target = std::ldexp(1.0, -40);
  return {rejected == 1000 && bound <= target,
          std::to_string(rejected) + "/1000 mutated proofs rejected; soundness error (2/3)^69 = " + fmt("%.3e", bound) +
              " <= 2^-40 = " + fmt("%.3e", target)};
}

Result zk_hiding() {
  ZkFixture f;
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;
  for (int i = 0; i < 1000; ++i) {
    auto st = f.statement(5000 + static_cast<std::uint64_t>(i));
    auto proof = zk::prove(st, {f.h}, sha_fill(77'000 + static_cast<std::uint64_t>(i)));
    for (const auto& r : proof.rounds) {
      for (const auto& v : r.opened) {
        for (auto b : v.input_share) ++counts[b];
        total += v.input_share.size();
      }
    }
  }
  double expected = static_cast<double>(total) / 256.0;
  double chi2 = 0;
  for (auto c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  constexpr double kCritical = 310.45738821990585;  // chi-square, 255 df, upper 1%
  return {chi2 < kCritical, std::to_string(total) + " opened share bytes from 1000 proofs, chi2 = " + fmt("%.2f", chi2) +
                                " (critical " + fmt("%.3f", kCritical) + " at alpha 0.01, 255 df)"};
}

Result end_to_end() {
  auto authority = crypto::generate_keypair();
  auto reporter = crypto::generate_keypair();
  ts::Developer dev;
  service::ServiceConfig cfg;
  cfg.authorities = {authority.public_key};
  cfg.drift_policies = {{"default", 0.25}};
  service::RegistryService svc(cfg);
  httplib::Server srv;
  http::install_routes(srv, svc);
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  struct Stop {
    httplib::Server& s;
    std::thread& t;
    ~Stop() {
      s.stop();
      t.join();
    }
  } stop{srv, th};

  http::Client client("http://127.0.0.1:" + std::to_string(port));
  std::mt19937_64 rng(1100);
  weights::WeightManifest m;
  m.records.push_back({"decoder.weight", weights::DType::f16, {256, 512}, ts::random_bytes(rng, 256 * 512 * 2)});
  m.records.push_back({"encoder.weight", weights::DType::f32, {128, 256}, ts::random_bytes(rng, 128 * 256 * 4)});
  Bytes stream = weights::serialize(m);
  auto now = ledger::system_clock_seconds();

  auto bundle = ts::make_bundle(dev, stream, now);
  auto reg = client.register_model(bundle);
  if (reg.at("status") != "U") return {false, "registration status " + reg.at("status").dump()};
  client.update_status(ts::make_status(authority, bundle.ai_id, ledger::TestingStatus::P, now));

  auto challenge = client.request_challenge(bundle.ai_id);
  zk::PossessionStatement st{bundle.ai_id, IssuerNamespace(dev.ns), zk::kDefaultRounds, challenge.nonce};
  auto verdict = client.submit_proof(challenge.challenge_id, zk::serialize_proof(zk::prove(st, {compute_commitment(stream)})));
  if (verdict.outcome != service::Outcome::verified) return {false, std::string("verdict ") + service::to_string(verdict.outcome)};

  Bytes changed = perturb(stream, 0.10, rng);
  auto new_id = derive_ai_id(compute_commitment(changed), IssuerNamespace(dev.ns));
  std::string unregistered;
  try {
    client.request_challenge(new_id);
  } catch (const http::RemoteError& e) {
    unregistered = e.error();
  }
  if (unregistered != "UNREGISTERED") return {false, "perturbed identity not reported UNREGISTERED"};

  auto screen = lzjd::screen_drift(lzjd::sketch(stream), changed, lzjd::DriftPolicy(0.25, "default"), bundle.ai_id);
  service::DriftAttestation a;
  a.ai_id = bundle.ai_id;
  a.score = screen.score;
  a.mode = screen.mode;
  a.candidate_sketch_digest = crypto::sha256(lzjd::serialize_sketch(lzjd::sketch(changed)));
  a.reported_at = now;
  service::sign_drift(a, reporter.secret_key);
  client.submit_drift(a);
  bool flagged = client.get_entry(bundle.ai_id).at("drift_flagged").get<bool>();
  return {flagged, std::string("VERIFIED; perturbed AI-ID UNREGISTERED; drift score ") + fmt("%.6f", screen.score) +
                       " -> original entry drift_flagged=" + (flagged ? "true" : "false")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"identity determinism", 60, identity_determinism},
      {"avalanche sensitivity", 60, avalanche},
      {"secondary-id checksum detection", 60, checksum_detection},
      {"lzjd oracle equivalence", 300, lzjd_oracle},
      {"drift monotonicity", 300, drift_monotonicity},
      {"ledger tamper evidence", 300, ledger_tamper},
      {"status machine", 1, status_machine},
      {"zkp completeness", 600, zk_completeness},
      {"zkp soundness", 600, zk_soundness},
      {"zkp hiding", 600, zk_hiding},
      {"end-to-end checkpoint flow", 120, end_to_end},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.limit_seconds;
    bool pass = r.pass && in_time;
    failed += !pass;
    std::printf("%s  %-32s %s [%.2fs, limit %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs,
                c.limit_seconds, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
