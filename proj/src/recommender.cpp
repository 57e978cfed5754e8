#include "proxrec/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proxrec/errors.hpp"

namespace proxrec {

std::string_view to_string(Basis b) noexcept {
  switch (b) {
    case Basis::cf:
      return "cf";
    case Basis::content:
      return "content";
    case Basis::user_mean_fallback:
      return "user_mean_fallback";
  }
  return "cf";
}

std::string_view to_string(GroupStrategy s) noexcept {
  switch (s) {
    case GroupStrategy::average:
      return "average";
    case GroupStrategy::least_misery:
      return "least_misery";
    case GroupStrategy::most_pleasure:
      return "most_pleasure";
  }
  return "average";
}

std::optional<GroupStrategy> parse_group_strategy(std::string_view name) noexcept {
  if (name == "average") return GroupStrategy::average;
  if (name == "least_misery") return GroupStrategy::least_misery;
  if (name == "most_pleasure") return GroupStrategy::most_pleasure;
  return std::nullopt;
}

namespace {

bool ranks_before(double score_a, ItemId a, double score_b, ItemId b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

}  // namespace

Recommender::Recommender(const LocalStore& store, SimilarityConfig cfg, std::size_t k)
    : store_(store), cfg_(cfg), k_(k) {
  cfg_.validate();
  if (k_ < 1) throw ValidationError("k must be >= 1");
  for (const auto& r : store_.records()) raters_[r.item].push_back(r.rater);
  items_.reserve(raters_.size());
  for (const auto& [item, raters] : raters_) items_.push_back(item);
  std::sort(items_.begin(), items_.end());
}

std::span<const UserId> Recommender::raters_of(ItemId i) const noexcept {
  auto it = raters_.find(i);
  if (it == raters_.end()) return {};
  return it->second;
}

double Recommender::user_mean(UserId u) const {
  if (auto it = means_.find(u); it != means_.end()) return it->second;
  const auto ratings = store_.ratings_by(u);
  if (ratings.empty()) throw ColdUserError("user " + std::to_string(u.value) + " has no ratings in the store");
  double sum = 0;
  for (const auto& r : ratings) sum += r.value;
  const double mean = sum / static_cast<double>(ratings.size());
  means_.emplace(u, mean);
  return mean;
}

double Recommender::similarity(UserId u, UserId v) const {
  const auto key = u < v ? std::pair{u, v} : std::pair{v, u};
  if (auto it = similarities_.find(key); it != similarities_.end()) return it->second;
  const double s = hybrid_similarity(key.first, key.second, store_, cfg_);
  similarities_.emplace(key, s);
  return s;
}

std::vector<Neighbor> Recommender::neighbors(UserId u, ItemId i) const {
  std::vector<Neighbor> out;
  for (UserId v : raters_of(i))
    if (v != u) out.push_back({v, similarity(u, v)});
  rank_neighbors(out, k_);
  return out;
}

Prediction Recommender::predict(UserId u, ItemId i) const {
  const double mean_u = user_mean(u);
  const auto nbrs = neighbors(u, i);
  if (nbrs.empty()) return {i, store_.scale().clamp(mean_u), Basis::user_mean_fallback, 0};
  double num = 0;
  double den = 0;
  for (const auto& n : nbrs) {
    const RatingRecord* r = store_.find(n.user, i);
    num += n.similarity * (static_cast<double>(r->value) - user_mean(n.user));
    den += std::abs(n.similarity);
  }
  return {i, store_.scale().clamp(mean_u + num / den), Basis::cf, nbrs.size()};
}

std::vector<Prediction> Recommender::top_n(UserId u, std::size_t n) const { return top_n(u, n, items_); }

std::vector<Prediction> Recommender::top_n(UserId u, std::size_t n, std::span<const ItemId> candidates) const {
  if (n < 1) throw ValidationError("n must be >= 1");
  user_mean(u);
  std::vector<ItemId> items(candidates.begin(), candidates.end());
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  std::vector<Prediction> out;
  for (ItemId i : items)
    if (!store_.find(u, i)) out.push_back(predict(u, i));
  std::sort(out.begin(), out.end(),
            [](const Prediction& a, const Prediction& b) { return ranks_before(a.score, a.item, b.score, b.item); });
  if (out.size() > n) out.erase(out.begin() + static_cast<std::ptrdiff_t>(n), out.end());
  return out;
}

std::vector<GroupRecommendation> Recommender::group_recommend(std::span<const UserId> members, std::size_t n,
                                                              GroupStrategy strategy) const {
  if (n < 1) throw ValidationError("n must be >= 1");
  std::vector<UserId> distinct(members.begin(), members.end());
  std::sort(distinct.begin(), distinct.end());
  if (std::adjacent_find(distinct.begin(), distinct.end()) != distinct.end())
    throw ValidationError("group members must be distinct");
  if (distinct.size() < 2) throw ValidationError("a group needs at least two members");
  std::string missing;
  for (UserId m : members)
    if (store_.ratings_by(m).empty()) missing += (missing.empty() ? "" : ", ") + std::to_string(m.value);
  if (!missing.empty()) throw ColdUserError("group members unknown to the store: " + missing);

  std::vector<GroupRecommendation> out;
  for (ItemId i : items_) {
    if (std::any_of(members.begin(), members.end(), [&](UserId m) { return store_.find(m, i) != nullptr; }))
      continue;
    GroupRecommendation g{i, 0.0, {}};
    for (UserId m : members) g.member_predictions.push_back(predict(m, i));
    double lo = g.member_predictions.front().score;
    double hi = lo;
    double sum = 0;
    for (const auto& p : g.member_predictions) {
      sum += p.score;
      lo = std::min(lo, p.score);
      hi = std::max(hi, p.score);
    }
    // rounding can push the mean of near-equal scores just outside [lo, hi]
    const double mean = std::clamp(sum / static_cast<double>(members.size()), lo, hi);
    g.score = strategy == GroupStrategy::average ? mean : strategy == GroupStrategy::least_misery ? lo : hi;
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const GroupRecommendation& a, const GroupRecommendation& b) {
    return ranks_before(a.score, a.item, b.score, b.item);
  });
  if (out.size() > n) out.erase(out.begin() + static_cast<std::ptrdiff_t>(n), out.end());
  return out;
}

Prediction predict(UserId u, ItemId i, const LocalStore& store, const SimilarityConfig& cfg, std::size_t k) {
  return Recommender(store, cfg, k).predict(u, i);
}

std::vector<Prediction> top_n(UserId u, std::size_t n, const LocalStore& store, const SimilarityConfig& cfg,
                              std::size_t k, std::optional<std::span<const ItemId>> candidates) {
  Recommender rec(store, cfg, k);
  return candidates ? rec.top_n(u, n, *candidates) : rec.top_n(u, n);
}

std::vector<GroupRecommendation> group_recommend(std::span<const UserId> members, std::size_t n,
                                                 const LocalStore& store, const SimilarityConfig& cfg,
                                                 std::size_t k, GroupStrategy strategy) {
  return Recommender(store, cfg, k).group_recommend(members, n, strategy);
}

Prediction content_score(UserId u, ItemId i, const LocalStore& store, const Catalog& catalog) {
  const ItemMeta* target = catalog.find(i);
  if (!target) throw ValidationError("item " + i.to_string() + " is not in the catalog");
  const auto& scale = store.scale();
  const std::size_t dims = catalog.schema().size();
  std::vector<double> profile(dims, 0.0);
  double total_weight = 0;
  bool any = false;
  for (const auto& r : store.ratings_by(u)) {
    const ItemMeta* meta = catalog.find(r.item);
    if (!meta) continue;
    any = true;
    const double w = static_cast<double>(r.value) - scale.midpoint();
    total_weight += std::abs(w);
    for (std::size_t d = 0; d < dims; ++d) profile[d] += w * meta->weights[d];
  }
  if (!any) throw ColdUserError("user " + std::to_string(u.value) + " has no ratings on cataloged items");
  const Prediction midpoint{i, scale.midpoint(), Basis::content, 0};
  if (total_weight == 0) return midpoint;
  for (double& p : profile) p /= total_weight;

  double dot = 0;
  double np = 0;
  double nt = 0;
  for (std::size_t d = 0; d < dims; ++d) {
    dot += profile[d] * target->weights[d];
    np += profile[d] * profile[d];
    nt += target->weights[d] * target->weights[d];
  }
  if (np == 0 || nt == 0) return midpoint;
  const double cosine = std::clamp(dot / std::sqrt(np * nt), -1.0, 1.0);
  return {i, scale.clamp(scale.min + 0.5 * (cosine + 1.0) * (scale.max - scale.min)), Basis::content, 0};
}

}  // namespace proxrec
