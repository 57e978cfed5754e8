#pragma once

// Canonical wire formats. All integers are little-endian; see
// docs/wire-format.md for the byte layout.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "proxrec/types.hpp"

namespace proxrec {

using Bytes = std::vector<std::uint8_t>;

/// Opaque storage token standing in for a shortened public URL.
using Token = std::array<std::uint8_t, 16>;

std::string to_hex(const Token& token);

/// A node's record set as uploaded to the cloud store.
struct Payload {
  UserId sender;
  std::vector<RatingRecord> records;  // sorted by (rater, item), unique
  double created_at = 0.0;            // local metadata, not serialized
};

/// The small broadcast message pointing at a payload.
struct Advertisement {
  UserId sender;
  Token token{};
  double issued_at = 0.0;  // local metadata, not serialized
};

inline constexpr std::array<std::uint8_t, 4> kPayloadMagic{'P', 'R', 'X', 'R'};
inline constexpr std::array<std::uint8_t, 4> kAdvertisementMagic{'P', 'R', 'X', 'A'};
inline constexpr std::uint8_t kWireVersion = 1;

/// magic(4) + version(1) + sender(8) + count(4)
inline constexpr std::size_t kPayloadHeaderSize = 17;
/// magic(4) + version(1) + flags(1) + token length(2) + sender(8) + token(16)
inline constexpr std::size_t kAdvertisementSize = 32;

/// rater(8) + category(1) + key length(2) + key + value(4) + timestamp(8) +
/// source(1) + hops(1)
inline std::size_t record_wire_size(const RatingRecord& r) noexcept { return 25 + r.item.key().size(); }

std::size_t encoded_size(std::span<const RatingRecord> records) noexcept;
std::size_t encoded_size(const Payload& p) noexcept;

/// Throws ValidationError for categories outside the ontology, keys longer
/// than 65535 bytes, or records not in canonical order.
Bytes encode_payload(const Payload& p, const Ontology& ontology);

/// Throws ProtocolError for anything that is not a canonical encoding with
/// every record inside the rating scale.
Payload decode_payload(std::span<const std::uint8_t> bytes, const Ontology& ontology, const RatingScale& scale);

Bytes encode_advertisement(const Advertisement& ad);
/// Throws ProtocolError.
Advertisement decode_advertisement(std::span<const std::uint8_t> bytes);

}  // namespace proxrec
