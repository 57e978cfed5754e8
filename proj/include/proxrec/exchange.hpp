#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "proxrec/codec.hpp"
#include "proxrec/local_store.hpp"

namespace proxrec {

/// Largest hop count the wire format can carry; used for unlimited relaying.
inline constexpr std::uint8_t kUnlimitedHops = 255;

struct RelayPolicy {
  bool enabled = false;
  std::uint8_t max_hops = 1;

  static RelayPolicy off() { return {}; }
  static RelayPolicy limited(std::uint8_t max_hops) { return {true, max_hops}; }
  static RelayPolicy unlimited() { return {true, kUnlimitedHops}; }
};

struct ExchangePolicy {
  double upload_period = 3600.0;  // seconds between uploads
  RelayPolicy relay;
  double fetch_deferral = 0.0;  // seconds between hearing an advertisement and fetching
  std::size_t adv_size_cap = 512;
  std::size_t payload_size_cap = std::size_t{4} << 20;

  /// Throws ValidationError.
  void validate() const;
};

/// Builds the payload a node uploads.
///
/// Own records always go out; with relay on, received records whose hop
/// count is below max_hops go out too. Every emitted record carries the hop
/// count it will have at the receiver (stored hops + 1). When the encoding
/// exceeds payload_size_cap, the highest-hop records are dropped first (later
/// records in canonical order first among equal hops) until it fits.
///
/// Throws ProtocolError if the owner's own records alone do not fit.
Payload build_payload(const LocalStore& store, const ExchangePolicy& policy, double now);

struct CspParams {
  double upload_latency = 0.0;
  double fetch_latency = 0.0;
  double availability = 1.0;

  void validate() const;
};

/// Simulated third-party cloud storage provider. Holds one live object per
/// sender; uploading replaces the sender's previous object and invalidates its
/// token. Objects are stored encoded, so a fetch decodes them like a real
/// download would.
class CspSim {
 public:
  enum class FetchStatus { ok, unknown_token, not_ready, unavailable, malformed };

  struct FetchResult {
    FetchStatus status = FetchStatus::unknown_token;
    std::shared_ptr<const Payload> payload;  // decoded once per stored object
    double ready_at = 0.0;  // when the download completes
  };

  CspSim(CspParams params, std::uint64_t seed, Ontology ontology = {}, RatingScale scale = {});

  Token upload(const Payload& payload, double now);
  /// Stores raw bytes for `sender`, bypassing the encoder.
  Token upload_bytes(UserId sender, Bytes bytes, double now);

  /// Fails if the token was replaced or never issued, if the object is not
  /// yet readable (now < upload time + upload latency), if the availability
  /// draw fails, or if the stored bytes do not decode.
  FetchResult fetch(const Token& token, double now);

  std::optional<Token> live_token(UserId sender) const;
  /// Encoded object behind a live token, or nullptr.
  const Bytes* stored_bytes(const Token& token) const noexcept;
  const CspParams& params() const noexcept { return params_; }
  const Ontology& ontology() const noexcept { return ontology_; }
  std::size_t object_count() const noexcept { return objects_.size(); }

 private:
  struct Object {
    UserId sender;
    Bytes bytes;
    double upload_time;
    std::shared_ptr<const Payload> decoded;
    bool malformed = false;
  };

  Token fresh_token();

  CspParams params_;
  Ontology ontology_;
  RatingScale scale_;
  std::uint64_t seed_;
  std::uint64_t tokens_drawn_ = 0;
  std::uint64_t availability_draws_ = 0;
  std::map<Token, Object> objects_;
  std::map<UserId, Token> live_;
  std::set<Token> issued_;  // every token ever issued
};

/// Uploads `payload`. Throws ProtocolError if it exceeds the policy cap.
Token upload(CspSim& csp, const Payload& payload, double now, const ExchangePolicy& policy);

/// Fetch queued by an encounter; `fetcher` downloads `sender`'s object.
struct PendingFetch {
  double due = 0.0;
  UserId fetcher;
  UserId sender;
  Token token{};
};

/// Handles one proximity contact: both stores log the encounter and each side
/// queues the peer's advertised token for fetching at time + fetch_deferral.
/// No payload moves during the encounter. A side without a token yet queues
/// nothing for its peer.
///
/// Throws ProtocolError if an advertisement exceeds adv_size_cap, and
/// ValidationError if the stores do not belong to the event's nodes.
std::vector<PendingFetch> broadcast_on_encounter(LocalStore& a_store, LocalStore& b_store,
                                                 const std::optional<Token>& a_token,
                                                 const std::optional<Token>& b_token, const EncounterEvent& event,
                                                 const ExchangePolicy& policy);

/// Downloads and merges a payload. Failed or malformed fetches come back with
/// `dropped` set and leave the store unchanged.
MergeStats fetch_and_merge(LocalStore& store, CspSim& csp, const Token& token, double now);

/// Merges a decoded payload. Malformed content is logged and reported as
/// dropped.
MergeStats merge_payload(LocalStore& store, const Payload& payload);

}  // namespace proxrec
