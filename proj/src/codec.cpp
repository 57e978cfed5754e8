#include "proxrec/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "proxrec/errors.hpp"

namespace proxrec {

namespace {

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}

  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void text(std::string_view s) {
    for (char c : s) out_.push_back(static_cast<std::uint8_t>(c));
  }

 private:
  Bytes& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ProtocolError("truncated message");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_hex(const Token& token) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : token) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

std::size_t encoded_size(std::span<const RatingRecord> records) noexcept {
  std::size_t n = kPayloadHeaderSize;
  for (const auto& r : records) n += record_wire_size(r);
  return n;
}

std::size_t encoded_size(const Payload& p) noexcept { return encoded_size(p.records); }

Bytes encode_payload(const Payload& p, const Ontology& ontology) {
  if (p.records.size() > UINT32_MAX) throw ValidationError("payload has too many records");
  Bytes out;
  out.reserve(encoded_size(p));
  Writer w(out);
  w.bytes(kPayloadMagic);
  w.uint<std::uint8_t>(kWireVersion);
  w.uint<std::uint64_t>(p.sender.value);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.records.size()));
  for (std::size_t i = 0; i < p.records.size(); ++i) {
    const auto& r = p.records[i];
    if (i > 0 && !(key_of(p.records[i - 1]) < key_of(r)))
      throw ValidationError("payload records must be sorted by (rater, item) without duplicates");
    const auto key = r.item.key();
    if (key.size() > UINT16_MAX) throw ValidationError("item key longer than 65535 bytes: " + r.item.to_string());
    w.uint<std::uint64_t>(r.rater.value);
    w.uint<std::uint8_t>(ontology.index_of(r.item.category()));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(key.size()));
    w.text(key);
    w.uint<std::uint32_t>(std::bit_cast<std::uint32_t>(r.value));
    w.uint<std::uint64_t>(r.timestamp);
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.source));
    w.uint<std::uint8_t>(r.hops);
  }
  return out;
}

Payload decode_payload(std::span<const std::uint8_t> bytes, const Ontology& ontology, const RatingScale& scale) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kPayloadMagic.begin())) throw ProtocolError("bad payload magic");
  if (auto v = r.uint<std::uint8_t>(); v != kWireVersion)
    throw ProtocolError("unsupported payload version " + std::to_string(v));
  Payload p;
  p.sender = UserId{r.uint<std::uint64_t>()};
  const auto count = r.uint<std::uint32_t>();
  // every record needs at least 26 bytes; reject absurd counts before reserving
  if (count > r.remaining() / 26) throw ProtocolError("record count exceeds payload length");
  p.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const UserId rater{r.uint<std::uint64_t>()};
    const auto category_index = r.uint<std::uint8_t>();
    if (category_index >= ontology.categories().size())
      throw ProtocolError("category index " + std::to_string(category_index) + " outside the ontology");
    const auto key_len = r.uint<std::uint16_t>();
    if (key_len == 0) throw ProtocolError("empty item key");
    auto key = r.take(key_len);
    const float value = std::bit_cast<float>(r.uint<std::uint32_t>());
    const auto timestamp = r.uint<std::uint64_t>();
    const auto source = r.uint<std::uint8_t>();
    if (source > static_cast<std::uint8_t>(Source::manual))
      throw ProtocolError("unknown source tag " + std::to_string(source));
    const auto hops = r.uint<std::uint8_t>();
    if (!std::isfinite(value) || !scale.contains(value)) throw ProtocolError("rating value outside the scale");
    RatingRecord rec{rater,
                     ItemId(ontology.name_at(category_index),
                            std::string_view(reinterpret_cast<const char*>(key.data()), key.size())),
                     value,
                     timestamp,
                     static_cast<Source>(source),
                     hops};
    if (!p.records.empty() && !(key_of(p.records.back()) < key_of(rec)))
      throw ProtocolError("payload records not in canonical order");
    p.records.push_back(rec);
  }
  if (r.remaining() != 0) throw ProtocolError("trailing bytes after payload");
  return p;
}

Bytes encode_advertisement(const Advertisement& ad) {
  Bytes out;
  out.reserve(kAdvertisementSize);
  Writer w(out);
  w.bytes(kAdvertisementMagic);
  w.uint<std::uint8_t>(kWireVersion);
  w.uint<std::uint8_t>(0);
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(ad.token.size()));
  w.uint<std::uint64_t>(ad.sender.value);
  w.bytes(ad.token);
  return out;
}

Advertisement decode_advertisement(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kAdvertisementMagic.begin()))
    throw ProtocolError("bad advertisement magic");
  if (auto v = r.uint<std::uint8_t>(); v != kWireVersion)
    throw ProtocolError("unsupported advertisement version " + std::to_string(v));
  r.uint<std::uint8_t>();  // flags, reserved
  if (r.uint<std::uint16_t>() != Token{}.size()) throw ProtocolError("unsupported token length");
  Advertisement ad;
  ad.sender = UserId{r.uint<std::uint64_t>()};
  auto token = r.take(ad.token.size());
  std::copy(token.begin(), token.end(), ad.token.begin());
  if (r.remaining() != 0) throw ProtocolError("trailing bytes after advertisement");
  return ad;
}

}  // namespace proxrec
