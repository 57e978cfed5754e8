#include "proxrec/local_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "proxrec/errors.hpp"
#include "record_csv.hpp"

namespace proxrec {

namespace {

struct KeyLess {
  bool operator()(const RatingRecord& r, const RecordKey& k) const noexcept { return key_of(r) < k; }
  bool operator()(const RecordKey& k, const RatingRecord& r) const noexcept { return k < key_of(r); }
};

}  // namespace

LocalStore::LocalStore(UserId owner, RatingScale scale) : owner_(owner), scale_(scale) { scale_.validate(); }

MergeOutcome LocalStore::resolve(const RatingRecord* existing, const RatingRecord& incoming) const noexcept {
  if (incoming.rater == owner_ && incoming.hops > 0) return MergeOutcome::ignored;
  if (existing == nullptr) return MergeOutcome::inserted;
  if (incoming.timestamp > existing->timestamp) return MergeOutcome::replaced;
  if (incoming.timestamp == existing->timestamp && incoming.hops < existing->hops) return MergeOutcome::replaced;
  return MergeOutcome::ignored;
}

MergeOutcome LocalStore::merge_record(const RatingRecord& rec) {
  validate_record(rec, scale_);
  const RecordKey key = key_of(rec);
  auto it = std::lower_bound(records_.begin(), records_.end(), key, KeyLess{});
  const bool found = it != records_.end() && key_of(*it) == key;
  const MergeOutcome outcome = resolve(found ? &*it : nullptr, rec);
  switch (outcome) {
    case MergeOutcome::inserted:
      records_.insert(it, rec);
      break;
    case MergeOutcome::replaced:
      *it = rec;
      break;
    case MergeOutcome::ignored:
      break;
  }
  return outcome;
}

MergeStats LocalStore::merge_sorted(std::span<const RatingRecord> recs) {
  for (std::size_t i = 0; i < recs.size(); ++i) {
    validate_record(recs[i], scale_);
    if (i > 0 && !(key_of(recs[i - 1]) < key_of(recs[i])))
      throw ValidationError("merge batch must be sorted by (rater, item) without duplicates");
  }

  // First pass: outcomes only. Replacements can be applied in place; inserts
  // need a rebuild.
  MergeStats stats;
  std::vector<MergeOutcome> outcomes(recs.size());
  {
    auto it = records_.begin();
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const RecordKey key = key_of(recs[i]);
      while (it != records_.end() && key_of(*it) < key) ++it;
      const bool found = it != records_.end() && key_of(*it) == key;
      outcomes[i] = resolve(found ? &*it : nullptr, recs[i]);
      if (outcomes[i] == MergeOutcome::replaced) *it = recs[i];
      stats += outcomes[i];
    }
  }
  if (stats.inserted == 0) return stats;

  std::vector<RatingRecord> merged;
  merged.reserve(records_.size() + stats.inserted);
  auto it = records_.begin();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (outcomes[i] != MergeOutcome::inserted) continue;
    const RecordKey key = key_of(recs[i]);
    while (it != records_.end() && key_of(*it) < key) merged.push_back(*it++);
    merged.push_back(recs[i]);
  }
  merged.insert(merged.end(), it, records_.end());
  records_ = std::move(merged);
  return stats;
}

void LocalStore::record_encounter(UserId peer, double duration) {
  if (!std::isfinite(duration) || duration < 0) throw ValidationError("encounter duration must be non-negative");
  if (peer == owner_) throw ValidationError("a node cannot encounter itself");
  auto& e = encounters_[peer];
  e.count += 1;
  e.total_duration += duration;
}

EncounterStats LocalStore::encounters_with(UserId peer) const noexcept {
  auto it = encounters_.find(peer);
  return it == encounters_.end() ? EncounterStats{} : it->second;
}

std::span<const RatingRecord> LocalStore::ratings_by(UserId rater) const noexcept {
  auto first = std::partition_point(records_.begin(), records_.end(),
                                    [rater](const RatingRecord& r) { return r.rater < rater; });
  auto last =
      std::partition_point(first, records_.end(), [rater](const RatingRecord& r) { return r.rater == rater; });
  return {first, last};
}

const RatingRecord* LocalStore::find(UserId rater, ItemId item) const noexcept {
  const RecordKey key{rater, item};
  auto it = std::lower_bound(records_.begin(), records_.end(), key, KeyLess{});
  return it != records_.end() && key_of(*it) == key ? &*it : nullptr;
}

std::vector<UserId> LocalStore::raters() const {
  std::vector<UserId> out;
  for (const auto& r : records_)
    if (out.empty() || out.back() != r.rater) out.push_back(r.rater);
  return out;
}

void write_snapshot(const LocalStore& store, std::ostream& out) {
  detail::write_records_csv(out, store.records());
}

void save_snapshot(const LocalStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_snapshot(store, out);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<RatingRecord> load_snapshot(const std::filesystem::path& path, const RatingScale& scale,
                                        const Ontology& ontology) {
  return detail::read_records_csv(path, scale, ontology, false);
}

namespace detail {

std::vector<RatingRecord> read_records_csv(const std::filesystem::path& path, const RatingScale& scale,
                                           const Ontology& ontology, bool own_only) {
  csv::Reader reader(path);
  std::vector<std::string> f;
  if (!reader.next(f)) throw ParseError(reader.name(), 1, "missing header row");
  static const std::vector<std::string> kFull{"rater", "category", "key", "value", "timestamp", "source", "hops"};
  for (auto& name : f) name = std::string(csv::trim(name));
  const bool with_hops = f == kFull;
  if (!with_hops && f != std::vector<std::string>(kFull.begin(), kFull.end() - 1))
    throw ParseError(reader.name(), reader.line(), std::string("expected header '") + kRecordHeader + "'");
  const std::size_t width = with_hops ? 7 : 6;

  std::vector<RatingRecord> out;
  while (reader.next(f)) {
    auto fail = [&](const std::string& what) { throw ParseError(reader.name(), reader.line(), what); };
    if (f.size() != width)
      fail("expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    auto rater = csv::parse_u64(f[0]);
    if (!rater) fail("bad rater id '" + f[0] + "'");
    const auto category = csv::trim(f[1]);
    if (!ontology.contains(category)) fail("category '" + std::string(category) + "' is not in the ontology");
    if (f[2].empty()) fail("empty item key");
    auto value = csv::parse_float(f[3]);
    if (!value) fail("bad rating value '" + f[3] + "'");
    if (!scale.contains(*value))
      fail("rating " + f[3] + " outside scale [" + csv::format_double(scale.min) + ", " +
           csv::format_double(scale.max) + "]");
    auto ts = csv::parse_u64(f[4]);
    if (!ts) fail("bad timestamp '" + f[4] + "'");
    auto source = parse_source(csv::trim(f[5]));
    if (!source) fail("unknown source tag '" + f[5] + "'");
    std::uint64_t hops = 0;
    if (with_hops) {
      auto h = csv::parse_u64(f[6]);
      if (!h || *h > 255) fail("bad hop count '" + f[6] + "'");
      hops = *h;
    }
    if (own_only && hops != 0) fail("own ratings must have hops = 0");
    out.push_back(RatingRecord{UserId{*rater}, ItemId(category, f[2]), *value, *ts, *source,
                               static_cast<std::uint8_t>(hops)});
  }
  return out;
}

void write_records_csv(std::ostream& out, std::span<const RatingRecord> records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.rater.value << ',';
    csv::write_field(out, r.item.category());
    out << ',';
    csv::write_field(out, r.item.key());
    out << ',' << csv::format_float(r.value) << ',' << r.timestamp << ',' << to_string(r.source) << ','
        << static_cast<unsigned>(r.hops) << '\n';
  }
}

}  // namespace detail
}  // namespace proxrec
