#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "aiid/canonical_weights.hpp"
#include "aiid/http_api.hpp"
#include "support/oracles.hpp"

using namespace aiid;
using namespace aiid::service;
using testing_support::Developer;
using testing_support::make_bundle;
using testing_support::make_status;
using wire::json;

namespace {

struct Server {
  testing_support::ManualClock clock;
  crypto::KeyPair authority = crypto::generate_keypair();
  std::unique_ptr<RegistryService> svc;
  httplib::Server srv;
  std::thread th;
  int port = 0;

  Server() {
    ServiceConfig cfg;
    cfg.authorities = {authority.public_key};
    cfg.drift_policies = {{"default", 0.3}};
    cfg.clock = clock.fn();
    svc = std::make_unique<RegistryService>(cfg);
    http::install_routes(srv, *svc);
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Server() {
    srv.stop();
    th.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
  std::uint64_t now() const { return *clock.now; }
};

int remote_status(const std::function<void()>& fn, std::string* error = nullptr) {
  try {
    fn();
  } catch (const http::RemoteError& e) {
    if (error) *error = e.error();
    return e.status();
  }
  FAIL("request succeeded");
  return 0;
}

}  // namespace

TEST_CASE("full flow over HTTP") {
  Server s;
  http::Client client(s.url());
  Developer dev;
  Bytes stream = weights::serialize({});
  auto bundle = make_bundle(dev, stream, s.now());

  auto reg = client.register_model(bundle);
  CHECK(reg["block_index"] == 1);
  CHECK(reg["status"] == "U");
  CHECK(reg["ai_id"] == bundle.ai_id.hex());

  auto entry = client.get_entry(bundle.ai_id);
  CHECK(entry["status"] == "U");
  CHECK(entry["entry"]["secondary_id"].get<std::string>().size() == 34);

  client.update_status(make_status(s.authority, bundle.ai_id, ledger::TestingStatus::P, s.now()));
  CHECK(client.get_entry(bundle.ai_id)["status"] == "P");
  auto hist = client.history(bundle.ai_id)["history"];
  REQUIRE(hist.size() == 2);
  CHECK(hist[1]["status"] == "P");

  auto c = client.request_challenge(bundle.ai_id);
  zk::PossessionStatement st{bundle.ai_id, IssuerNamespace(dev.ns), zk::kDefaultRounds, c.nonce};
  auto proof = zk::serialize_proof(zk::prove(st, {compute_commitment(stream)}));
  auto v = client.submit_proof(c.challenge_id, proof);
  CHECK(v.outcome == Outcome::verified);
  CHECK(v.status == ledger::TestingStatus::P);

  std::string err;
  CHECK(remote_status([&] { client.submit_proof(c.challenge_id, proof); }, &err) == 404);
  CHECK(err == "UNKNOWN_CHALLENGE");
}

TEST_CASE("error mapping") {
  Server s;
  http::Client client(s.url());
  Developer dev;
  auto bundle = make_bundle(dev, as_bytes("m"), s.now());
  client.register_model(bundle);
  std::string err;

  CHECK(remote_status([&] { client.register_model(bundle); }, &err) == 409);
  CHECK(err == "DUPLICATE");

  auto forged = make_bundle(dev, as_bytes("n"), s.now());
  forged.developer_signature[0] ^= 1;
  CHECK(remote_status([&] { client.register_model(forged); }, &err) == 401);
  CHECK(err == "BAD_SIGNATURE");

  PrimaryIdentifier unknown{};
  CHECK(remote_status([&] { client.get_entry(unknown); }, &err) == 404);
  CHECK(err == "UNREGISTERED");
  CHECK(remote_status([&] { client.request_challenge(unknown); }) == 404);

  auto stranger = crypto::generate_keypair();
  CHECK(remote_status([&] { client.update_status(make_status(stranger, bundle.ai_id, ledger::TestingStatus::P, 1)); },
                      &err) == 403);
  CHECK(remote_status([&] { client.update_status(make_status(s.authority, bundle.ai_id, ledger::TestingStatus::X, 1)); },
                      &err) == 409);
  CHECK(err == "ILLEGAL_TRANSITION");

  CHECK(remote_status([&] { client.ledger_blocks(99); }, &err) == 416);
  CHECK(err == "BEYOND_HEAD");
}

TEST_CASE("request schemas are strict") {
  Server s;
  httplib::Client raw(s.url());
  Developer dev;
  auto body = wire::to_json(make_bundle(dev, as_bytes("m"), s.now()));

  auto extra = body;
  extra["h_w"] = std::string(64, '0');
  auto res = raw.Post("/v1/entries", extra.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"] == "MALFORMED");

  res = raw.Post("/v1/entries", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = raw.Post("/v1/challenges", json{{"ai_id", std::string(64, 'a')}, {"weights", "x"}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = raw.Post("/v1/proofs", json{{"challenge_id", "zz"}, {"proof", ""}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = raw.Get("/v1/ledger/blocks?from=-1");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = raw.Get("/v1/entries/ABCDEF");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("expired challenge is a verdict, not an error") {
  Server s;
  http::Client client(s.url());
  Developer dev;
  auto bundle = make_bundle(dev, as_bytes("m"), s.now());
  client.register_model(bundle);
  auto c = client.request_challenge(bundle.ai_id);
  *s.clock.now += 1000;
  auto v = client.submit_proof(c.challenge_id, Bytes{0});
  CHECK(v.outcome == Outcome::expired);
}

TEST_CASE("drift attestation over HTTP flags the entry") {
  Server s;
  http::Client client(s.url());
  Developer dev;
  auto bundle = make_bundle(dev, as_bytes("m"), s.now());
  client.register_model(bundle);
  DriftAttestation a;
  a.ai_id = bundle.ai_id;
  a.score = 0.75;
  a.mode = lzjd::Mode::exact;
  a.reported_at = s.now();
  sign_drift(a, crypto::generate_keypair().secret_key);
  auto r = client.submit_drift(a);
  CHECK(r["drift_flagged"] == true);
  CHECK(r["record"]["outcome"] == "DRIFTED");
  CHECK(client.get_entry(bundle.ai_id)["drift_flagged"] == true);
}

TEST_CASE("independent auditor re-verifies the chain incrementally") {
  Server s;
  http::Client client(s.url());
  Developer dev;
  std::vector<Bytes> mirror;
  auto sync = [&] {
    auto fresh = client.ledger_blocks(mirror.size());
    mirror.insert(mirror.end(), fresh.begin(), fresh.end());
    Bytes all;
    for (const auto& b : mirror) all.insert(all.end(), b.begin(), b.end());
    return ledger::verify_chain_bytes(all);
  };
  CHECK(sync().ok);
  CHECK(mirror.size() == 1);
  for (int i = 0; i < 5; ++i) client.register_model(make_bundle(dev, as_bytes("model" + std::to_string(i)), s.now()));
  CHECK(sync().ok);
  CHECK(mirror.size() == 6);
  CHECK(client.ledger_blocks(6).empty());
  CHECK(sync().ok);

  mirror[3][50] ^= 1;
  Bytes all;
  for (const auto& b : mirror) all.insert(all.end(), b.begin(), b.end());
  auto r = ledger::verify_chain_bytes(all);
  CHECK_FALSE(r.ok);
  CHECK(r.first_invalid == 3);
}

TEST_CASE("transport errors are distinct from remote errors") {
  int port = testing_support::closed_port();
  http::Client client("http://127.0.0.1:" + std::to_string(port));
  CHECK_THROWS_AS(client.get_entry(PrimaryIdentifier{}), http::TransportError);
}
