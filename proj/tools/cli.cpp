#include "cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <sys/stat.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>

#include "aiid/canonical_weights.hpp"
#include "aiid/http_api.hpp"
#include "aiid/identity.hpp"
#include "aiid/lzjd.hpp"
#include "aiid/possession.hpp"
#include "aiid/registry_service.hpp"

namespace aiid::cli {

namespace {

using wire::json;

// Carries an exit code up to run_cli.
class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

[[noreturn]] void input_error(const std::string& what) { throw Failure(kInput, what); }

Bytes read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) input_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) input_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) input_error("write failed: " + path);
}

Bytes read_weights(const std::string& path) {
  Bytes b = read_file(path);
  try {
    weights::parse(b);
  } catch (const weights::FormatError& e) {
    input_error(path + ": " + e.what() + " (offset " + std::to_string(e.offset()) + ")");
  }
  return b;
}

Commitment read_commitment_file(const std::string& path) {
  Bytes b = read_file(path);
  if (b.size() != 32) input_error(path + ": commitment file must hold exactly 32 bytes");
  Commitment c;
  std::copy(b.begin(), b.end(), c.digest.begin());
  return c;
}

IssuerNamespace parse_ns(const std::string& text) {
  if (!IssuerNamespace::is_valid(text)) input_error("namespace must be 8 characters [A-Z0-9]");
  return IssuerNamespace(text);
}

PrimaryIdentifier parse_ai_id(const std::string& text) {
  try {
    return PrimaryIdentifier::from_hex(text);
  } catch (const std::invalid_argument& e) {
    input_error(e.what());
  }
}

// Key file: {"role": ..., "public_key": hex, "secret_key": hex}
struct KeyFile {
  std::string role;
  crypto::KeyPair key;
};

const char* const kRoles[] = {"developer", "authority", "attestor", "reporter"};

KeyFile load_key(const std::string& path) {
  if (path.empty()) input_error("no key file given (--key or AIID_KEY)");
  Bytes raw = read_file(path);
  try {
    auto j = json::parse(raw.begin(), raw.end());
    wire::check_fields(j, {"role", "public_key", "secret_key"});
    KeyFile k;
    k.role = j.at("role").get<std::string>();
    k.key.public_key = fixed_from_hex<32>(j.at("public_key").get<std::string>());
    k.key.secret_key = fixed_from_hex<64>(j.at("secret_key").get<std::string>());
    if (crypto::public_key_of(k.key.secret_key) != k.key.public_key) {
      input_error(path + ": public key does not match secret key");
    }
    return k;
  } catch (const Failure&) {
    throw;
  } catch (const std::exception& e) {
    input_error(path + ": invalid key file: " + e.what());
  }
}

void save_key(const std::string& path, const KeyFile& k) {
  json j{{"role", k.role}, {"public_key", to_hex(k.key.public_key)}, {"secret_key", to_hex(k.key.secret_key)}};
  std::string text = j.dump(2) + "\n";
  write_file(path, as_bytes(text));
  ::chmod(path.c_str(), 0600);
}

crypto::PublicKey parse_public_key(const std::string& text) {
  try {
    return fixed_from_hex<32>(text);
  } catch (const std::invalid_argument& e) {
    input_error(std::string("public key: ") + e.what());
  }
}

std::string score_text(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

// Rounds whose anchor matches, searching the accepted range.
std::optional<std::uint16_t> rounds_for_anchor(const Digest& anchor) {
  for (std::uint32_t r = 1; r <= 1024; ++r) {
    if (zk::zkp_anchor(static_cast<std::uint16_t>(r)) == anchor) return static_cast<std::uint16_t>(r);
  }
  return std::nullopt;
}

struct Globals {
  std::string url = "http://127.0.0.1:8080";
  std::string key;
  bool json = false;
};

class Printer {
 public:
  Printer(std::ostream& out, bool as_json) : out_(out), json_(as_json) {}
  // Text mode prints "label: value" lines in insertion order.
  Printer& field(const std::string& label, const json& value) {
    obj_[label] = value;
    order_.push_back(label);
    return *this;
  }
  void emit() {
    if (json_) {
      out_ << obj_.dump() << "\n";
      return;
    }
    for (const auto& k : order_) {
      const auto& v = obj_[k];
      out_ << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
  }

 private:
  std::ostream& out_;
  bool json_;
  json obj_ = json::object();
  std::vector<std::string> order_;
};

// Subcommand option holders.
struct KeygenOpts {
  std::string role;
  std::string out;
  bool force = false;
};
struct FingerprintOpts {
  std::string file;
  std::string ns;
  std::string commitment_out;
};
struct IdBuildOpts {
  std::string country, ns, family, version, date, weights, tail;
};
struct IdCheckOpts {
  std::string text;
  bool no_checksum = false;
};
struct RegisterOpts {
  std::string weights, commitment, ns, country, family, version, date, metadata, risk_class;
  std::uint16_t rounds = zk::kDefaultRounds;
};
struct StatusOpts {
  std::string ai_id;
  std::string set;
};
struct ProveOpts {
  std::string ai_id, weights, commitment;
};
struct DriftOpts {
  std::string anchor, candidate, ai_id;
  std::optional<double> tau;
  std::uint32_t k = lzjd::kDefaultSketchSize;
  bool report = false;
};
struct SketchOpts {
  std::string file, out;
  std::uint32_t k = lzjd::kDefaultSketchSize;
};
struct AuditOpts {
  std::string ledger;
};
struct ServeOpts {
  std::string ledger;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> authorities;
  std::vector<std::string> authority_keys;
  std::vector<std::string> policies;
  std::uint64_t challenge_ttl = 300;
  std::string default_risk_class = "default";
};

int cmd_keygen(const KeygenOpts& o, Printer p) {
  if (!o.force && std::filesystem::exists(o.out)) input_error(o.out + " exists (use --force to overwrite)");
  KeyFile k{o.role, crypto::generate_keypair()};
  save_key(o.out, k);
  p.field("role", k.role).field("public_key", to_hex(k.key.public_key)).field("path", o.out).emit();
  return kOk;
}

int cmd_fingerprint(const FingerprintOpts& o, Printer p) {
  auto ns = parse_ns(o.ns);
  Bytes stream = read_weights(o.file);
  auto h = compute_commitment(stream);
  if (!o.commitment_out.empty()) write_file(o.commitment_out, h.digest);
  p.field("commitment", to_hex(h.digest))
      .field("ai_id", derive_ai_id(h, ns).hex())
      .field("hash_tail", hash_tail(h))
      .emit();
  return kOk;
}

int cmd_id_build(const IdBuildOpts& o, Printer p) {
  if (o.weights.empty() == o.tail.empty()) throw Failure(kUsage, "give exactly one of --weights or --tail");
  SecondaryFields f{o.country, o.ns, o.family, o.version, o.date};
  try {
    SecondaryIdentifier id = o.weights.empty() ? complete_secondary_id(f, o.tail)
                                               : build_secondary_id(f, compute_commitment(read_weights(o.weights)));
    p.field("secondary_id", id.render()).emit();
  } catch (const IdentifierError& e) {
    input_error(e.what());
  }
  return kOk;
}

int cmd_id_check(const IdCheckOpts& o, Printer p, std::ostream& err) {
  try {
    auto id = parse_secondary_id(o.text, !o.no_checksum);
    p.field("secondary_id", id.render())
        .field("country", id.country)
        .field("owner_id", id.owner_id)
        .field("family", id.family)
        .field("version", id.version)
        .field("date", id.date)
        .field("hash_tail", id.hash_tail)
        .field("checksum", id.checksum)
        .field("valid", true)
        .emit();
    return kOk;
  } catch (const IdentifierError& e) {
    err << "invalid: " << e.what() << " (position " << e.position() << ")\n";
    return e.kind() == IdentifierError::Kind::checksum ? kVerification : kInput;
  }
}

Commitment witness_from(const std::string& weights, const std::string& commitment) {
  if (weights.empty() == commitment.empty()) throw Failure(kUsage, "give exactly one of --weights or --commitment");
  return weights.empty() ? read_commitment_file(commitment) : compute_commitment(read_weights(weights));
}

int cmd_register(const RegisterOpts& o, const Globals& g, Printer p) {
  auto h = witness_from(o.weights, o.commitment);
  auto ns = parse_ns(o.ns);
  auto key = load_key(g.key);
  service::RegistrationBundle b;
  b.ns = ns.text();
  b.country = o.country;
  b.family = o.family;
  b.version = o.version;
  b.date = o.date;
  b.hash_tail = hash_tail(h);
  b.ai_id = derive_ai_id(h, ns);
  b.zkp_anchor = zk::zkp_anchor(o.rounds);
  if (!o.metadata.empty()) b.metadata = read_file(o.metadata);
  b.registered_at = ledger::system_clock_seconds();
  b.risk_class = o.risk_class;
  try {
    service::sign_bundle(b, key.key.secret_key);
  } catch (const service::ServiceError& e) {
    input_error(e.what());
  }
  http::Client client(g.url);
  auto r = client.register_model(b);
  p.field("ai_id", r.at("ai_id"))
      .field("secondary_id", r.at("secondary_id"))
      .field("status", r.at("status"))
      .field("block_index", r.at("block_index"))
      .emit();
  return kOk;
}

int cmd_status(const StatusOpts& o, const Globals& g, Printer p) {
  auto id = parse_ai_id(o.ai_id);
  http::Client client(g.url);
  if (!o.set.empty()) {
    if (o.set.size() != 1) input_error("status must be one of U, P, F, X");
    ledger::TestingStatus s;
    try {
      s = ledger::status_from_char(o.set[0]);
    } catch (const std::invalid_argument& e) {
      input_error(e.what());
    }
    auto key = load_key(g.key);
    ledger::StatusUpdate u;
    u.ai_id = id;
    u.new_status = s;
    u.timestamp = ledger::system_clock_seconds();
    u.authority_public_key = key.key.public_key;
    u.authority_signature = crypto::sign(key.key.secret_key, ledger::status_signing_bytes(id, s, u.timestamp));
    auto r = client.update_status(u);
    p.field("ai_id", id.hex()).field("status", r.at("status")).field("block_index", r.at("block_index")).emit();
    return kOk;
  }
  auto v = client.get_entry(id);
  auto hist = client.history(id).at("history");
  std::string trail;
  for (const auto& h : hist) trail += (trail.empty() ? "" : " ") + h.at("status").get<std::string>() + "@" +
                                      std::to_string(h.at("block_index").get<std::uint64_t>());
  p.field("ai_id", id.hex())
      .field("secondary_id", v.at("entry").at("secondary_id"))
      .field("status", v.at("status"))
      .field("risk_class", v.at("risk_class"))
      .field("drift_flagged", v.at("drift_flagged"))
      .field("history", trail)
      .emit();
  return kOk;
}

// Wraps a stage so failures name it.
template <class Fn>
auto stage(const char* name, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const http::RemoteError& e) {
    throw http::RemoteError(e.status(), e.error(), std::string(name) + ": " + e.detail());
  } catch (const http::TransportError& e) {
    throw http::TransportError(std::string(name) + ": " + e.what());
  } catch (const zk::WitnessMismatch& e) {
    throw Failure(kVerification, std::string(name) + ": witness mismatch: " + e.what());
  }
}

int cmd_prove(const ProveOpts& o, const Globals& g, Printer p) {
  auto id = parse_ai_id(o.ai_id);
  auto h = witness_from(o.weights, o.commitment);
  http::Client client(g.url);
  auto entry = stage("lookup", [&] { return client.get_entry(id); }).at("entry");
  auto ns = parse_ns(entry.at("namespace").get<std::string>());
  auto rounds = rounds_for_anchor(fixed_from_hex<32>(entry.at("zkp_anchor").get<std::string>()));
  if (!rounds) throw Failure(kVerification, "lookup: registered anchor names no known proof system");
  // Fail before contacting the verifier if the witness is wrong.
  if (derive_ai_id(h, ns) != id) {
    throw Failure(kVerification, "prove: witness mismatch: commitment does not derive the requested AI-ID");
  }
  auto c = stage("challenge", [&] { return client.request_challenge(id); });
  zk::PossessionStatement st{id, ns, *rounds, c.nonce};
  Bytes proof = stage("prove", [&] { return zk::serialize_proof(zk::prove(st, {h})); });
  auto v = stage("submit", [&] { return client.submit_proof(c.challenge_id, proof); });
  p.field("ai_id", id.hex())
      .field("verdict", service::to_string(v.outcome))
      .field("status", v.status ? std::string(1, ledger::to_char(*v.status)) : std::string("-"))
      .field("detail", v.detail)
      .emit();
  return v.outcome == service::Outcome::verified ? kOk : kVerification;
}

bool has_magic(ByteView b, std::string_view magic) {
  return b.size() >= magic.size() && std::equal(magic.begin(), magic.end(), b.begin());
}

int cmd_drift(const DriftOpts& o, const Globals& g, Printer p) {
  if (!o.tau) throw Failure(kUsage, "--tau is required; there is no default drift threshold");
  std::optional<lzjd::DriftPolicy> policy;
  try {
    policy.emplace(*o.tau, "cli");
  } catch (const std::invalid_argument& e) {
    throw Failure(kUsage, e.what());
  }
  Bytes anchor_raw = read_file(o.anchor);
  Bytes candidate = read_weights(o.candidate);
  lzjd::DriftVerdict v;
  try {
    if (has_magic(anchor_raw, "LZJ1")) {
      v = lzjd::screen_drift(lzjd::parse_sketch(anchor_raw), candidate, *policy);
    } else {
      weights::parse(anchor_raw);
      v = lzjd::screen_drift(ByteView(anchor_raw), candidate, *policy);
    }
  } catch (const lzjd::DegenerateInput& e) {
    input_error(e.what());
  } catch (const weights::FormatError& e) {
    input_error(o.anchor + ": " + e.what());
  } catch (const DecodeError& e) {
    input_error(o.anchor + ": " + e.what());
  }
  p.field("score", score_text(v.score)).field("outcome", lzjd::to_string(v.outcome)).field("mode", lzjd::to_string(v.mode));
  if (o.report) {
    if (o.ai_id.empty()) throw Failure(kUsage, "--report needs --ai-id");
    auto key = load_key(g.key);
    std::uint32_t k = has_magic(anchor_raw, "LZJ1") ? lzjd::parse_sketch(anchor_raw).k : o.k;
    service::DriftAttestation a;
    a.ai_id = parse_ai_id(o.ai_id);
    a.score = v.score;
    a.mode = v.mode;
    a.candidate_sketch_digest = crypto::sha256(lzjd::serialize_sketch(lzjd::sketch(candidate, k)));
    a.reported_at = ledger::system_clock_seconds();
    service::sign_drift(a, key.key.secret_key);
    auto r = http::Client(g.url).submit_drift(a);
    p.field("registry_outcome", r.at("record").at("outcome")).field("drift_flagged", r.at("drift_flagged"));
  }
  p.emit();
  return v.outcome == lzjd::Outcome::within ? kOk : kVerification;
}

int cmd_sketch(const SketchOpts& o, Printer p) {
  if (o.k == 0) throw Failure(kUsage, "--k must be at least 1");
  auto s = lzjd::sketch(read_weights(o.file), o.k);
  Bytes enc = lzjd::serialize_sketch(s);
  write_file(o.out, enc);
  p.field("k", s.k).field("values", s.values.size()).field("digest", to_hex(crypto::sha256(enc))).field("path", o.out).emit();
  return kOk;
}

int cmd_audit(const AuditOpts& o, const Globals& g, Printer p) {
  Bytes all;
  std::string source;
  if (!o.ledger.empty()) {
    all = read_file(o.ledger);
    source = o.ledger;
  } else {
    for (const auto& b : http::Client(g.url).ledger_blocks(0)) all.insert(all.end(), b.begin(), b.end());
    source = g.url;
  }
  auto check = ledger::verify_chain_bytes(all);
  p.field("source", source);
  if (check.ok) {
    std::uint64_t height = 0;
    ByteReader in(all);
    while (!in.done()) {
      ledger::decode_block(in);
      ++height;
    }
    p.field("result", "ok").field("height", height).emit();
    return kOk;
  }
  p.field("result", "invalid").field("first_invalid_block", check.first_invalid).field("reason", check.reason).emit();
  return kVerification;
}

int cmd_serve(const ServeOpts& o, std::ostream& out) {
  service::ServiceConfig cfg;
  cfg.ledger_path = o.ledger;
  cfg.challenge_ttl = o.challenge_ttl;
  cfg.default_risk_class = o.default_risk_class;
  for (const auto& a : o.authorities) cfg.authorities.push_back(parse_public_key(a));
  for (const auto& path : o.authority_keys) {
    // Accept either a full key file or a bare hex public key in a file.
    Bytes raw = read_file(path);
    std::string text(raw.begin(), raw.end());
    try {
      auto j = json::parse(text);
      cfg.authorities.push_back(parse_public_key(j.at("public_key").get<std::string>()));
    } catch (const json::exception&) {
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
      cfg.authorities.push_back(parse_public_key(text));
    }
  }
  for (const auto& pol : o.policies) {
    auto eq = pol.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure(kUsage, "--policy takes CLASS=TAU");
    try {
      std::size_t used = 0;
      double tau = std::stod(pol.substr(eq + 1), &used);
      if (used != pol.size() - eq - 1) throw std::invalid_argument("trailing characters");
      lzjd::DriftPolicy(tau, pol.substr(0, eq));
      cfg.drift_policies[pol.substr(0, eq)] = tau;
    } catch (const std::exception& e) {
      throw Failure(kUsage, "--policy " + pol + ": " + e.what());
    }
  }
  std::unique_ptr<service::RegistryService> svc;
  try {
    svc = std::make_unique<service::RegistryService>(cfg);
  } catch (const ledger::LedgerError& e) {
    input_error(e.what());
  }
  httplib::Server srv;
  http::install_routes(srv, *svc);
  if (!srv.bind_to_port(o.host, o.port)) input_error("cannot bind " + o.host + ":" + std::to_string(o.port));
  out << "listening on http://" << o.host << ":" << o.port << " (ledger height " << svc->height() << ")\n"
      << std::flush;
  srv.listen_after_bind();
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AI model identification: fingerprints, identifiers, registry, proofs and drift screening", "aiid"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file with option defaults")->envname("AIID_CONFIG");
  Globals g;
  app.add_option("--url", g.url, "Registry service base URL")->envname("AIID_SERVICE_URL")->capture_default_str();
  app.add_option("--key", g.key, "Key file used for signing")->envname("AIID_KEY");
  app.add_flag("--json", g.json, "Machine-readable output");

  KeygenOpts keygen;
  auto* c_keygen = app.add_subcommand("keygen", "Generate an Ed25519 key file");
  c_keygen->add_option("--role", keygen.role, "Key role")->required()->check(CLI::IsMember(std::vector<std::string>(
                                                                             std::begin(kRoles), std::end(kRoles))));
  c_keygen->add_option("--out", keygen.out, "Output path")->required();
  c_keygen->add_flag("--force", keygen.force, "Overwrite an existing file");

  FingerprintOpts fp;
  auto* c_fp = app.add_subcommand("fingerprint", "Print commitment, AI-ID and hash tail of an AIW1 file");
  c_fp->add_option("file", fp.file, "AIW1 weight file")->required();
  c_fp->add_option("--ns", fp.ns, "Issuer namespace (8 x [A-Z0-9])")->required();
  c_fp->add_option("--commitment-out", fp.commitment_out, "Also write the 32-byte commitment here");

  auto* c_id = app.add_subcommand("id", "Secondary identifiers");
  c_id->require_subcommand(1);
  IdBuildOpts ib;
  auto* c_ib = c_id->add_subcommand("build", "Build a secondary identifier");
  c_ib->add_option("--country", ib.country, "Country code (2 x A-Z)")->required();
  c_ib->add_option("--ns", ib.ns, "Owner namespace")->required();
  c_ib->add_option("--family", ib.family, "Model family (3 x [A-Z0-9])")->required();
  c_ib->add_option("--model-version", ib.version, "Version (2 x [A-Z0-9])")->required();
  c_ib->add_option("--date", ib.date, "YYYYMMDD")->required();
  c_ib->add_option("--weights", ib.weights, "AIW1 file to derive the hash tail from");
  c_ib->add_option("--tail", ib.tail, "Hash tail, if the weights are not at hand");
  IdCheckOpts ic;
  auto* c_ic = c_id->add_subcommand("check", "Validate a secondary identifier");
  c_ic->add_option("id", ic.text, "Identifier text")->required();
  c_ic->add_flag("--no-checksum", ic.no_checksum, "Check grammar only");

  RegisterOpts reg;
  auto* c_reg = app.add_subcommand("register", "Register a model with the registry service");
  c_reg->add_option("--weights", reg.weights, "AIW1 weight file");
  c_reg->add_option("--commitment", reg.commitment, "32-byte commitment file instead of weights");
  c_reg->add_option("--ns", reg.ns, "Issuer namespace")->required();
  c_reg->add_option("--country", reg.country, "Country code")->required();
  c_reg->add_option("--family", reg.family, "Model family")->required();
  c_reg->add_option("--model-version", reg.version, "Model version")->required();
  c_reg->add_option("--date", reg.date, "YYYYMMDD")->required();
  c_reg->add_option("--metadata", reg.metadata, "Metadata file (bytes are digested by the registry)");
  c_reg->add_option("--risk-class", reg.risk_class, "Drift risk class");
  c_reg->add_option("--rounds", reg.rounds, "Proof rounds the entry anchors")->capture_default_str();

  StatusOpts st;
  auto* c_st = app.add_subcommand("status", "Show or (as an authority) set testing status");
  c_st->add_option("ai_id", st.ai_id, "AI-ID (hex)")->required();
  c_st->add_option("--set", st.set, "New status: U, P, F or X");

  ProveOpts pv;
  auto* c_pv = app.add_subcommand("prove", "Answer a checkpoint challenge with a proof of possession");
  c_pv->add_option("--ai-id", pv.ai_id, "AI-ID (hex)")->required();
  c_pv->add_option("--weights", pv.weights, "AIW1 weight file");
  c_pv->add_option("--commitment", pv.commitment, "32-byte commitment file");

  DriftOpts dr;
  auto* c_dr = app.add_subcommand("drift", "Screen a candidate stream against an anchor stream or sketch");
  c_dr->add_option("anchor", dr.anchor, "Anchor AIW1 file or LZJ1 sketch")->required();
  c_dr->add_option("candidate", dr.candidate, "Candidate AIW1 file")->required();
  c_dr->add_option("--tau", dr.tau, "Drift threshold in [0,1]");
  c_dr->add_option("--k", dr.k, "Sketch size for the reported candidate digest")->capture_default_str();
  c_dr->add_option("--ai-id", dr.ai_id, "Registered AI-ID of the anchor");
  c_dr->add_flag("--report", dr.report, "Submit a signed drift attestation");

  SketchOpts sk;
  auto* c_sk = app.add_subcommand("sketch", "Write the LZJD sketch of an AIW1 file");
  c_sk->add_option("file", sk.file, "AIW1 weight file")->required();
  c_sk->add_option("--out", sk.out, "Output path")->required();
  c_sk->add_option("--k", sk.k, "Sketch size")->capture_default_str();

  AuditOpts au;
  auto* c_au = app.add_subcommand("audit", "Verify the ledger hash chain (file or service)");
  c_au->add_option("--ledger", au.ledger, "Ledger file; default fetches from --url");

  ServeOpts sv;
  auto* c_sv = app.add_subcommand("serve", "Run the registry service");
  c_sv->add_option("--ledger", sv.ledger, "Ledger file")->required();
  c_sv->add_option("--host", sv.host)->capture_default_str();
  c_sv->add_option("--port", sv.port)->capture_default_str();
  c_sv->add_option("--authority", sv.authorities, "Authority public key (hex), repeatable");
  c_sv->add_option("--authority-key", sv.authority_keys, "Authority key file, repeatable");
  c_sv->add_option("--policy", sv.policies, "Drift threshold CLASS=TAU, repeatable");
  c_sv->add_option("--challenge-ttl", sv.challenge_ttl, "Seconds")->capture_default_str();
  c_sv->add_option("--default-risk-class", sv.default_risk_class)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    Printer p(out, g.json);
    if (*c_keygen) return cmd_keygen(keygen, p);
    if (*c_fp) return cmd_fingerprint(fp, p);
    if (*c_ib) return cmd_id_build(ib, p);
    if (*c_ic) return cmd_id_check(ic, p, err);
    if (*c_reg) return cmd_register(reg, g, p);
    if (*c_st) return cmd_status(st, g, p);
    if (*c_pv) return cmd_prove(pv, g, p);
    if (*c_dr) return cmd_drift(dr, g, p);
    if (*c_sk) return cmd_sketch(sk, p);
    if (*c_au) return cmd_audit(au, g, p);
    if (*c_sv) return cmd_serve(sv, out);
  } catch (const Failure& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const http::RemoteError& e) {
    err << "rejected (" << e.status() << " " << e.error() << "): " << e.detail() << "\n";
    return kService;
  } catch (const http::TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kService;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  }
  return kUsage;
}

}  // namespace aiid::cli
