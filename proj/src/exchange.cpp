#include "proxrec/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "proxrec/errors.hpp"
#include "rng.hpp"

namespace proxrec {

void ExchangePolicy::validate() const {
  if (!std::isfinite(upload_period) || upload_period <= 0) throw ValidationError("upload_period must be > 0");
  if (!std::isfinite(fetch_deferral) || fetch_deferral < 0) throw ValidationError("fetch_deferral must be >= 0");
  if (adv_size_cap == 0) throw ValidationError("adv_size_cap must be > 0");
  if (payload_size_cap == 0) throw ValidationError("payload_size_cap must be > 0");
  if (relay.enabled && relay.max_hops < 1) throw ValidationError("relay max_hops must be >= 1");
}

void CspParams::validate() const {
  if (!std::isfinite(upload_latency) || upload_latency < 0) throw ValidationError("upload_latency must be >= 0");
  if (!std::isfinite(fetch_latency) || fetch_latency < 0) throw ValidationError("fetch_latency must be >= 0");
  if (!(availability >= 0 && availability <= 1)) throw ValidationError("availability must be in [0,1]");
}

Payload build_payload(const LocalStore& store, const ExchangePolicy& policy, double now) {
  Payload p{store.owner(), {}, now};
  std::size_t own_size = kPayloadHeaderSize;
  for (const auto& r : store.records()) {
    const bool own = r.rater == store.owner();
    if (own) {
      own_size += record_wire_size(r);
    } else if (!policy.relay.enabled || r.hops >= policy.relay.max_hops) {
      continue;
    }
    RatingRecord out = r;
    out.hops = static_cast<std::uint8_t>(r.hops + 1);
    p.records.push_back(out);
  }
  if (own_size > policy.payload_size_cap)
    throw ProtocolError("own records of node " + std::to_string(store.owner().value) + " need " +
                        std::to_string(own_size) + " bytes, payload cap is " +
                        std::to_string(policy.payload_size_cap));

  std::size_t size = encoded_size(p);
  if (size <= policy.payload_size_cap) return p;

  // Drop relayed records, highest hop count first, later canonical position
  // first among equal hops.
  std::vector<std::size_t> relayed;
  for (std::size_t i = 0; i < p.records.size(); ++i)
    if (p.records[i].rater != store.owner()) relayed.push_back(i);
  std::sort(relayed.begin(), relayed.end(), [&](std::size_t x, std::size_t y) {
    if (p.records[x].hops != p.records[y].hops) return p.records[x].hops > p.records[y].hops;
    return x > y;
  });
  std::vector<bool> keep(p.records.size(), true);
  for (std::size_t idx : relayed) {
    if (size <= policy.payload_size_cap) break;
    keep[idx] = false;
    size -= record_wire_size(p.records[idx]);
  }
  std::vector<RatingRecord> kept;
  kept.reserve(p.records.size());
  for (std::size_t i = 0; i < p.records.size(); ++i)
    if (keep[i]) kept.push_back(p.records[i]);
  p.records = std::move(kept);
  return p;
}

CspSim::CspSim(CspParams params, std::uint64_t seed, Ontology ontology, RatingScale scale)
    : params_(params), ontology_(std::move(ontology)), scale_(scale), seed_(seed) {
  params_.validate();
  scale_.validate();
}

Token CspSim::fresh_token() {
  for (;;) {
    Token t{};
    const std::uint64_t hi = detail::derive_seed(seed_, 2 * tokens_drawn_);
    const std::uint64_t lo = detail::derive_seed(seed_, 2 * tokens_drawn_ + 1);
    ++tokens_drawn_;
    for (std::size_t i = 0; i < 8; ++i) {
      t[i] = static_cast<std::uint8_t>(hi >> (8 * i));
      t[8 + i] = static_cast<std::uint8_t>(lo >> (8 * i));
    }
    if (issued_.insert(t).second) return t;
  }
}

Token CspSim::upload(const Payload& payload, double now) {
  return upload_bytes(payload.sender, encode_payload(payload, ontology_), now);
}

Token CspSim::upload_bytes(UserId sender, Bytes bytes, double now) {
  if (auto it = live_.find(sender); it != live_.end()) objects_.erase(it->second);
  const Token token = fresh_token();
  objects_.emplace(token, Object{sender, std::move(bytes), now, nullptr, false});
  live_[sender] = token;
  return token;
}

CspSim::FetchResult CspSim::fetch(const Token& token, double now) {
  FetchResult result;
  auto it = objects_.find(token);
  if (it == objects_.end()) {
    result.status = FetchStatus::unknown_token;
    return result;
  }
  if (now < it->second.upload_time + params_.upload_latency) {
    result.status = FetchStatus::not_ready;
    return result;
  }
  if (params_.availability < 1.0) {
    const double u =
        static_cast<double>(detail::derive_seed(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL, availability_draws_++) >> 11) *
        0x1.0p-53;
    if (!(u < params_.availability)) {
      result.status = FetchStatus::unavailable;
      return result;
    }
  }
  Object& obj = it->second;
  if (!obj.decoded && !obj.malformed) {
    try {
      auto decoded = std::make_shared<Payload>(decode_payload(obj.bytes, ontology_, scale_));
      if (decoded->sender != obj.sender) {
        spdlog::warn("dropping payload claiming sender {} stored by node {}", decoded->sender.value, obj.sender.value);
        obj.malformed = true;
      } else {
        obj.decoded = std::move(decoded);
      }
    } catch (const ProtocolError& e) {
      spdlog::warn("dropping malformed payload from node {}: {}", obj.sender.value, e.what());
      obj.malformed = true;
    }
  }
  if (obj.malformed) {
    result.status = FetchStatus::malformed;
    return result;
  }
  result.payload = obj.decoded;
  result.status = FetchStatus::ok;
  result.ready_at = now + params_.fetch_latency;
  return result;
}

std::optional<Token> CspSim::live_token(UserId sender) const {
  auto it = live_.find(sender);
  if (it == live_.end()) return std::nullopt;
  return it->second;
}

const Bytes* CspSim::stored_bytes(const Token& token) const noexcept {
  auto it = objects_.find(token);
  return it == objects_.end() ? nullptr : &it->second.bytes;
}

Token upload(CspSim& csp, const Payload& payload, double now, const ExchangePolicy& policy) {
  const std::size_t size = encoded_size(payload);
  if (size > policy.payload_size_cap)
    throw ProtocolError("payload of " + std::to_string(size) + " bytes exceeds cap of " +
                        std::to_string(policy.payload_size_cap));
  return csp.upload(payload, now);
}

std::vector<PendingFetch> broadcast_on_encounter(LocalStore& a_store, LocalStore& b_store,
                                                 const std::optional<Token>& a_token,
                                                 const std::optional<Token>& b_token, const EncounterEvent& event,
                                                 const ExchangePolicy& policy) {
  validate_event(event);
  if (a_store.owner() != event.a || b_store.owner() != event.b)
    throw ValidationError("stores do not belong to the encounter's nodes");

  auto advertise = [&](UserId sender, const Token& token) {
    const auto bytes = encode_advertisement(Advertisement{sender, token, event.time});
    if (bytes.size() > policy.adv_size_cap)
      throw ProtocolError("advertisement of " + std::to_string(bytes.size()) + " bytes exceeds cap of " +
                          std::to_string(policy.adv_size_cap));
  };

  if (a_token) advertise(event.a, *a_token);
  if (b_token) advertise(event.b, *b_token);

  a_store.record_encounter(event.b, event.duration);
  b_store.record_encounter(event.a, event.duration);

  std::vector<PendingFetch> fetches;
  const double due = event.time + policy.fetch_deferral;
  if (b_token) fetches.push_back({due, event.a, event.b, *b_token});
  if (a_token) fetches.push_back({due, event.b, event.a, *a_token});
  return fetches;
}

MergeStats merge_payload(LocalStore& store, const Payload& payload) {
  try {
    return store.merge_sorted(payload.records);
  } catch (const ValidationError& e) {
    spdlog::warn("node {} dropping payload from node {}: {}", store.owner().value, payload.sender.value, e.what());
    MergeStats stats;
    stats.dropped = true;
    return stats;
  }
}

MergeStats fetch_and_merge(LocalStore& store, CspSim& csp, const Token& token, double now) {
  auto result = csp.fetch(token, now);
  if (result.status != CspSim::FetchStatus::ok) {
    MergeStats stats;
    stats.dropped = true;
    return stats;
  }
  return merge_payload(store, *result.payload);
}

}  // namespace proxrec
