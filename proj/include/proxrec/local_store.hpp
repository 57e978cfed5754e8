#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "proxrec/types.hpp"

namespace proxrec {

enum class MergeOutcome { inserted, replaced, ignored };

struct MergeStats {
  std::size_t inserted = 0;
  std::size_t replaced = 0;
  std::size_t ignored = 0;
  bool dropped = false;  // fetch failed or payload malformed; nothing merged

  MergeStats& operator+=(MergeOutcome o) {
    switch (o) {
      case MergeOutcome::inserted:
        ++inserted;
        break;
      case MergeOutcome::replaced:
        ++replaced;
        break;
      case MergeOutcome::ignored:
        ++ignored;
        break;
    }
    return *this;
  }
};

struct EncounterStats {
  std::uint64_t count = 0;
  double total_duration = 0.0;
};

/// A node's database: its own ratings, everything received from peers, and
/// the per-peer encounter log.
///
/// Records are kept sorted by (rater, item) with at most one record per key.
/// Conflicts resolve deterministically: newer timestamp wins, then lower hop
/// count, otherwise the existing record stays. A record authored by the owner
/// that arrives from the network (hops > 0) is always ignored.
///
/// Single writer; concurrent readers are fine once writing stops.
class LocalStore {
 public:
  explicit LocalStore(UserId owner, RatingScale scale = {});

  UserId owner() const noexcept { return owner_; }
  const RatingScale& scale() const noexcept { return scale_; }

  /// Throws ValidationError if the value is out of scale.
  MergeOutcome merge_record(const RatingRecord& rec);

  /// Batch form of merge_record for a payload. `recs` must be sorted by
  /// (rater, item) without duplicates; every record is validated before any is
  /// merged, so a bad batch leaves the store untouched.
  MergeStats merge_sorted(std::span<const RatingRecord> recs);

  /// Throws ValidationError for negative durations or peer == owner.
  void record_encounter(UserId peer, double duration);

  EncounterStats encounters_with(UserId peer) const noexcept;
  const std::map<UserId, EncounterStats>& encounters() const noexcept { return encounters_; }

  std::span<const RatingRecord> records() const noexcept { return records_; }
  /// All records by `rater`, sorted by item.
  std::span<const RatingRecord> ratings_by(UserId rater) const noexcept;
  const RatingRecord* find(UserId rater, ItemId item) const noexcept;
  std::size_t size() const noexcept { return records_.size(); }

  /// Distinct raters present in the store, ascending.
  std::vector<UserId> raters() const;

 private:
  MergeOutcome resolve(const RatingRecord* existing, const RatingRecord& incoming) const noexcept;

  UserId owner_;
  RatingScale scale_;
  std::vector<RatingRecord> records_;
  std::map<UserId, EncounterStats> encounters_;
};

/// Snapshot CSV: header `rater,category,key,value,timestamp,source,hops`.
void save_snapshot(const LocalStore& store, const std::filesystem::path& path);
void write_snapshot(const LocalStore& store, std::ostream& out);

/// Reads a snapshot written by save_snapshot (the hops column may be omitted).
/// Throws ParseError naming the offending line.
std::vector<RatingRecord> load_snapshot(const std::filesystem::path& path, const RatingScale& scale = {},
                                        const Ontology& ontology = {});

}  // namespace proxrec
