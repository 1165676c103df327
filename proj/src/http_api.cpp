#include "aiid/http_api.hpp"

#include <httplib.h>

#include <charconv>

namespace aiid::http {

using service::ServiceError;
using wire::json;

int status_code(ServiceError::Kind k) {
  using K = ServiceError::Kind;
  switch (k) {
    case K::malformed: return 400;
    case K::bad_signature: return 401;
    case K::unauthorized: return 403;
    case K::unregistered:
    case K::unknown_challenge: return 404;
    case K::duplicate:
    case K::illegal_transition:
    case K::no_policy: return 409;
    case K::beyond_head: return 416;
  }
  return 500;
}

namespace {

void reply(httplib::Response& res, int code, const json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int code, const std::string& kind, const std::string& detail) {
  reply(res, code, json{{"error", kind}, {"detail", detail}});
}

// Runs a handler, converting exceptions into error responses.
template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ServiceError& e) {
      reply_error(res, status_code(e.kind()), service::to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, "MALFORMED", e.what());
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, "MALFORMED", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "INTERNAL", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(ServiceError::Kind::malformed, std::string("invalid JSON: ") + e.what());
  }
}

PrimaryIdentifier path_id(const httplib::Request& req) { return PrimaryIdentifier::from_hex(req.matches[1].str()); }

}  // namespace

void install_routes(httplib::Server& srv, service::RegistryService& svc) {
  constexpr const char* kId = "([0-9a-f]{64})";

  srv.Post("/v1/entries", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             auto reg = svc.register_model(wire::bundle_from_json(body_of(req)));
             reply(res, 201,
                   json{{"ai_id", reg.entry.ai_id.hex()},
                        {"secondary_id", reg.entry.secondary_id.render()},
                        {"status", std::string(1, ledger::to_char(reg.status))},
                        {"block_index", reg.block_index},
                        {"entry", wire::to_json(reg.entry)}});
           }));

  srv.Post(std::string("/v1/entries/") + kId + "/status",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             auto reg = svc.update_status(wire::status_update_from_json(path_id(req), body_of(req)));
             reply(res, 200,
                   json{{"ai_id", reg.entry.ai_id.hex()},
                        {"status", std::string(1, ledger::to_char(reg.status))},
                        {"block_index", reg.block_index}});
           }));

  srv.Get(std::string("/v1/entries/") + kId, guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, wire::to_json(svc.lookup(path_id(req))));
          }));

  srv.Get(std::string("/v1/entries/") + kId + "/history",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            auto id = path_id(req);
            json items = json::array();
            for (const auto& h : svc.history(id)) items.push_back(wire::to_json(h));
            reply(res, 200, json{{"ai_id", id.hex()}, {"history", items}});
          }));

  srv.Post("/v1/challenges", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             auto body = body_of(req);
             wire::check_fields(body, {"ai_id"});
             if (!body["ai_id"].is_string()) throw ServiceError(ServiceError::Kind::malformed, "ai_id must be a string");
             auto c = svc.issue_challenge(PrimaryIdentifier::from_hex(body["ai_id"].get<std::string>()));
             reply(res, 201, wire::to_json(c));
           }));

  srv.Post("/v1/proofs", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             auto body = body_of(req);
             wire::check_fields(body, {"challenge_id", "proof"});
             auto id = fixed_from_hex<16>(body.at("challenge_id").get<std::string>());
             Bytes proof = from_base64(body.at("proof").get<std::string>());
             reply(res, 200, wire::to_json(svc.submit_proof(id, proof)));
           }));

  srv.Post("/v1/drift-attestations", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             auto a = wire::drift_attestation_from_json(body_of(req));
             auto rec = svc.record_drift_attestation(a);
             bool flagged = svc.lookup(a.ai_id).drift_flagged;
             reply(res, 201, json{{"record", wire::to_json(rec)}, {"drift_flagged", flagged}});
           }));

  srv.Get("/v1/ledger/blocks", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t from = 0;
            if (req.has_param("from")) {
              auto s = req.get_param_value("from");
              auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), from);
              if (ec != std::errc() || p != s.data() + s.size()) {
                throw ServiceError(ServiceError::Kind::malformed, "from must be a non-negative integer");
              }
            }
            json blocks = json::array();
            for (const auto& b : svc.audit_blocks(from)) blocks.push_back(to_base64(b));
            reply(res, 200, json{{"from", from}, {"height", svc.height()}, {"blocks", blocks}});
          }));
}

Client::Client(const std::string& base_url) : cli_(std::make_unique<httplib::Client>(base_url)) {
  cli_->set_connection_timeout(5);
  cli_->set_read_timeout(60);
}

Client::~Client() = default;

namespace {
json handle(const httplib::Result& res) {
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception&) {
    body = json{{"error", "HTTP_" + std::to_string(res->status)}, {"detail", res->body}};
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteError(res->status, body.value("error", std::string("HTTP_") + std::to_string(res->status)),
                      body.value("detail", std::string()));
  }
  return body;
}
}  // namespace

json Client::post(const std::string& path, const json& body) {
  return handle(cli_->Post(path, body.dump(), "application/json"));
}

json Client::get(const std::string& path) { return handle(cli_->Get(path)); }

json Client::register_model(const service::RegistrationBundle& b) { return post("/v1/entries", wire::to_json(b)); }

json Client::update_status(const ledger::StatusUpdate& u) {
  return post("/v1/entries/" + u.ai_id.hex() + "/status", wire::to_json(u));
}

json Client::get_entry(const PrimaryIdentifier& id) { return get("/v1/entries/" + id.hex()); }

json Client::history(const PrimaryIdentifier& id) { return get("/v1/entries/" + id.hex() + "/history"); }

service::Challenge Client::request_challenge(const PrimaryIdentifier& id) {
  return wire::challenge_from_json(post("/v1/challenges", json{{"ai_id", id.hex()}}));
}

service::VerificationVerdict Client::submit_proof(const std::array<std::uint8_t, 16>& challenge_id, ByteView proof) {
  return wire::verdict_from_json(post("/v1/proofs", json{{"challenge_id", to_hex(challenge_id)}, {"proof", to_base64(proof)}}));
}

json Client::submit_drift(const service::DriftAttestation& a) { return post("/v1/drift-attestations", wire::to_json(a)); }

std::vector<Bytes> Client::ledger_blocks(std::uint64_t from) {
  auto body = get("/v1/ledger/blocks?from=" + std::to_string(from));
  std::vector<Bytes> out;
  for (const auto& b : body.at("blocks")) out.push_back(from_base64(b.get<std::string>()));
  return out;
}

}  // namespace aiid::http
