#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace proxrec {

struct UserId {
  std::uint64_t value = 0;

  auto operator<=>(const UserId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, UserId u) { return os << u.value; }

namespace detail {
struct ItemEntry;
}

/// Globally valid item identifier: a (category, key) pair.
///
/// Instances are interned, so copies are a single pointer and equality is a
/// pointer comparison. Ordering is lexicographic on (category, key), which is
/// the order used for ranking ties and for the canonical record order.
class ItemId {
 public:
  /// Throws ValidationError if either part is empty.
  ItemId(std::string_view category, std::string_view key);

  std::string_view category() const noexcept;
  std::string_view key() const noexcept;

  /// "category:key", for messages and logs.
  std::string to_string() const;

  friend bool operator==(ItemId a, ItemId b) noexcept { return a.entry_ == b.entry_; }
  friend std::strong_ordering operator<=>(ItemId a, ItemId b) noexcept;

  std::size_t hash() const noexcept { return std::hash<const void*>{}(entry_); }

 private:
  const detail::ItemEntry* entry_;
};

inline std::ostream& operator<<(std::ostream& os, ItemId i) { return os << i.to_string(); }

/// Category namespace shared by all nodes. Categories travel on the wire as
/// their index in this list, so every participant must use the same ontology.
class Ontology {
 public:
  /// movies, music, poi
  Ontology();
  explicit Ontology(std::vector<std::string> categories);

  bool contains(std::string_view category) const noexcept;
  /// Throws ValidationError for names outside the ontology.
  std::uint8_t index_of(std::string_view category) const;
  /// Throws ValidationError for out-of-range indices.
  const std::string& name_at(std::uint8_t index) const;
  const std::vector<std::string>& categories() const noexcept { return categories_; }

 private:
  std::vector<std::string> categories_;
};

struct RatingScale {
  double min = 1.0;
  double max = 5.0;

  bool contains(double v) const noexcept { return v >= min && v <= max; }
  double midpoint() const noexcept { return 0.5 * (min + max); }
  double clamp(double v) const noexcept { return v < min ? min : (v > max ? max : v); }
  /// Throws ValidationError unless min < max and both are finite.
  void validate() const;
};

enum class Source : std::uint8_t { tracked = 0, third_party = 1, manual = 2 };

std::string_view to_string(Source s) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;

/// One (rater, item, value) fact; the unit of exchange.
struct RatingRecord {
  UserId rater;
  ItemId item;
  float value;
  std::uint64_t timestamp = 0;
  Source source = Source::manual;
  std::uint8_t hops = 0;  // 0 on the rater's own device

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

/// Records are keyed and ordered by (rater, item).
struct RecordKey {
  UserId rater;
  ItemId item;

  friend bool operator==(const RecordKey&, const RecordKey&) = default;
  friend std::strong_ordering operator<=>(const RecordKey& a, const RecordKey& b) noexcept {
    if (auto c = a.rater <=> b.rater; c != 0) return c;
    return a.item <=> b.item;
  }
};

inline RecordKey key_of(const RatingRecord& r) noexcept { return {r.rater, r.item}; }

/// Throws ValidationError if the value is outside the scale or not finite.
void validate_record(const RatingRecord& r, const RatingScale& scale);

/// A proximity contact between two nodes.
struct EncounterEvent {
  double time = 0.0;
  UserId a;
  UserId b;
  double duration = 0.0;

  friend bool operator==(const EncounterEvent&, const EncounterEvent&) = default;
};

/// Throws ValidationError if a == b or any field is negative / not finite.
void validate_event(const EncounterEvent& e);

}  // namespace proxrec

template <>
struct std::hash<proxrec::UserId> {
  std::size_t operator()(proxrec::UserId u) const noexcept { return std::hash<std::uint64_t>{}(u.value); }
};

template <>
struct std::hash<proxrec::ItemId> {
  std::size_t operator()(proxrec::ItemId i) const noexcept { return i.hash(); }
};
