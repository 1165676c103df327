#pragma once

#include <memory>
#include <string>

#include "aiid/registry_service.hpp"
#include "aiid/wire.hpp"

namespace httplib {
class Server;
class Client;
}  // namespace httplib

// HTTP/JSON binding of the registry service.
//
//   POST /v1/entries                       register            201
//   POST /v1/entries/{ai_id}/status        status update       200
//   GET  /v1/entries/{ai_id}               lookup              200
//   GET  /v1/entries/{ai_id}/history       status trail        200
//   POST /v1/challenges                    issue challenge     201
//   POST /v1/proofs                        submit proof        200
//   POST /v1/drift-attestations            drift attestation   201
//   GET  /v1/ledger/blocks?from=N          raw blocks          200
//
// Errors are {"error": KIND, "detail": text}.
namespace aiid::http {

int status_code(service::ServiceError::Kind k);

void install_routes(httplib::Server& srv, service::RegistryService& svc);

// Connection-level failure (no HTTP response).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-2xx response.
class RemoteError : public std::runtime_error {
 public:
  RemoteError(int status, std::string error, std::string detail)
      : std::runtime_error(error + ": " + detail), status_(status), error_(std::move(error)), detail_(std::move(detail)) {}
  int status() const noexcept { return status_; }
  const std::string& error() const noexcept { return error_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int status_;
  std::string error_;
  std::string detail_;
};

class Client {
 public:
  // base_url like "http://127.0.0.1:8080"
  explicit Client(const std::string& base_url);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  wire::json register_model(const service::RegistrationBundle& b);
  wire::json update_status(const ledger::StatusUpdate& u);
  wire::json get_entry(const PrimaryIdentifier& id);
  wire::json history(const PrimaryIdentifier& id);
  service::Challenge request_challenge(const PrimaryIdentifier& id);
  service::VerificationVerdict submit_proof(const std::array<std::uint8_t, 16>& challenge_id, ByteView proof);
  wire::json submit_drift(const service::DriftAttestation& a);
  // Returns raw block bytes from `from` to head.
  std::vector<Bytes> ledger_blocks(std::uint64_t from);

 private:
  wire::json post(const std::string& path, const wire::json& body);
  wire::json get(const std::string& path);

  std::unique_ptr<httplib::Client> cli_;
};

}  // namespace aiid::http
