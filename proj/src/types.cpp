#include "proxrec/types.hpp"

#include <cmath>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "proxrec/errors.hpp"

namespace proxrec {

namespace detail {

struct ItemEntry {
  std::string category;
  std::string key;
};

namespace {

// Append-only intern pool. Entries are never freed, so ItemId pointers stay
// valid for the life of the process and may be shared across threads.
class ItemPool {
 public:
  const ItemEntry* intern(std::string_view category, std::string_view key) {
    std::string lookup;
    lookup.reserve(category.size() + key.size() + 1);
    lookup.append(category).push_back('\0');
    lookup.append(key);
    {
      std::shared_lock lock(mutex_);
      if (auto it = index_.find(lookup); it != index_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = index_.find(lookup); it != index_.end()) return it->second;
    const ItemEntry* entry = &entries_.emplace_back(ItemEntry{std::string(category), std::string(key)});
    index_.emplace(std::move(lookup), entry);
    return entry;
  }

 private:
  std::shared_mutex mutex_;
  std::deque<ItemEntry> entries_;
  std::unordered_map<std::string, const ItemEntry*> index_;
};

ItemPool& pool() {
  static ItemPool p;
  return p;
}

}  // namespace
}  // namespace detail

ItemId::ItemId(std::string_view category, std::string_view key) {
  if (category.empty()) throw ValidationError("item category must not be empty");
  if (key.empty()) throw ValidationError("item key must not be empty");
  entry_ = detail::pool().intern(category, key);
}

std::string_view ItemId::category() const noexcept { return entry_->category; }
std::string_view ItemId::key() const noexcept { return entry_->key; }

std::string ItemId::to_string() const { return entry_->category + ":" + entry_->key; }

std::strong_ordering operator<=>(ItemId a, ItemId b) noexcept {
  if (a.entry_ == b.entry_) return std::strong_ordering::equal;
  if (int c = a.entry_->category.compare(b.entry_->category); c != 0) return c <=> 0;
  return a.entry_->key.compare(b.entry_->key) <=> 0;
}

Ontology::Ontology() : categories_{"movies", "music", "poi"} {}

Ontology::Ontology(std::vector<std::string> categories) : categories_(std::move(categories)) {
  if (categories_.empty()) throw ValidationError("ontology must list at least one category");
  if (categories_.size() > 256) throw ValidationError("ontology supports at most 256 categories");
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].empty()) throw ValidationError("ontology category names must not be empty");
    for (std::size_t j = 0; j < i; ++j)
      if (categories_[i] == categories_[j])
        throw ValidationError("duplicate ontology category '" + categories_[i] + "'");
  }
}

bool Ontology::contains(std::string_view category) const noexcept {
  for (const auto& c : categories_)
    if (c == category) return true;
  return false;
}

std::uint8_t Ontology::index_of(std::string_view category) const {
  for (std::size_t i = 0; i < categories_.size(); ++i)
    if (categories_[i] == category) return static_cast<std::uint8_t>(i);
  throw ValidationError("category '" + std::string(category) + "' is not in the ontology");
}

const std::string& Ontology::name_at(std::uint8_t index) const {
  if (index >= categories_.size())
    throw ValidationError("category index " + std::to_string(index) + " is not in the ontology");
  return categories_[index];
}

void RatingScale::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
    throw ValidationError("rating scale requires finite min < max");
}

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::tracked:
      return "tracked";
    case Source::third_party:
      return "third_party";
    case Source::manual:
      return "manual";
  }
  return "manual";
}

std::optional<Source> parse_source(std::string_view name) noexcept {
  if (name == "tracked") return Source::tracked;
  if (name == "third_party") return Source::third_party;
  if (name == "manual") return Source::manual;
  return std::nullopt;
}

void validate_record(const RatingRecord& r, const RatingScale& scale) {
  if (!std::isfinite(r.value) || !scale.contains(r.value))
    throw ValidationError("rating " + std::to_string(r.value) + " for " + r.item.to_string() + " by user " +
                          std::to_string(r.rater.value) + " is outside the scale [" + std::to_string(scale.min) +
                          ", " + std::to_string(scale.max) + "]");
}

void validate_event(const EncounterEvent& e) {
  if (e.a == e.b) throw ValidationError("encounter of node " + std::to_string(e.a.value) + " with itself");
  if (!std::isfinite(e.time) || e.time < 0) throw ValidationError("encounter time must be a non-negative number");
  if (!std::isfinite(e.duration) || e.duration < 0)
    throw ValidationError("encounter duration must be a non-negative number");
}

}  // namespace proxrec
