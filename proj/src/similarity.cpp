#include "proxrec/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "proxrec/errors.hpp"

namespace proxrec {

void SimilarityConfig::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (min_overlap < 1) throw ValidationError("min_overlap must be >= 1");
  if (significance_gamma < 1) throw ValidationError("significance_gamma must be >= 1");
  if (!std::isfinite(propinquity_kappa) || propinquity_kappa <= 0)
    throw ValidationError("propinquity_kappa must be > 0");
  if (!std::isfinite(propinquity_tau) || propinquity_tau <= 0) throw ValidationError("propinquity_tau must be > 0");
  if (!unit(duration_weight)) throw ValidationError("duration_weight must be in [0,1]");
  if (!unit(hybrid_weight)) throw ValidationError("hybrid_weight must be in [0,1]");
}

std::optional<double> rating_similarity(std::span<const RatingRecord> u_ratings,
                                        std::span<const RatingRecord> v_ratings, const SimilarityConfig& cfg) {
  // co-rated values, in item order
  std::vector<double> a;
  std::vector<double> b;
  auto i = u_ratings.begin();
  auto j = v_ratings.begin();
  while (i != u_ratings.end() && j != v_ratings.end()) {
    if (i->item == j->item) {
      a.push_back(i->value);
      b.push_back(j->value);
      ++i;
      ++j;
    } else if (i->item < j->item) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t n = a.size();
  if (n < cfg.min_overlap || n == 0) return std::nullopt;

  double sa = 0;
  double sb = 0;
  double sab = 0;
  double saa = 0;
  double sbb = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sa += a[k];
    sb += b[k];
    sab += a[k] * b[k];
    saa += a[k] * a[k];
    sbb += b[k] * b[k];
  }
  // Pearson and cosine both reduce to num / sqrt(da * db). Working from raw
  // sums keeps every term exact for half-star ratings, so the squared,
  // significance-weighted value below is one correctly rounded division and
  // mathematically equal similarities compare equal when ranking neighbors.
  double num = sab;
  double da = saa;
  double db = sbb;
  if (cfg.metric == SimilarityMetric::pearson) {
    auto constant = [](const std::vector<double>& x) {
      return std::all_of(x.begin(), x.end(), [&](double y) { return y == x.front(); });
    };
    if (constant(a) || constant(b)) return std::nullopt;
    const double nn = static_cast<double>(n);
    num = nn * sab - sa * sb;
    da = nn * saa - sa * sa;
    db = nn * sbb - sb * sb;
  }
  if (!(da > 0) || !(db > 0)) return std::nullopt;
  const double m = static_cast<double>(std::min(n, cfg.significance_gamma));
  const double gamma = static_cast<double>(cfg.significance_gamma);
  const double cap = (m * m) / (gamma * gamma);
  const double squared = std::min((num * num * (m * m)) / (da * db * (gamma * gamma)), cap);
  return std::copysign(std::sqrt(squared), num);
}

std::optional<double> rating_similarity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg) {
  return rating_similarity(store.ratings_by(u), store.ratings_by(v), cfg);
}

double propinquity_similarity(const EncounterStats& stats, const SimilarityConfig& cfg) {
  const double beta = cfg.duration_weight;
  const double exposure = (1.0 - beta) * static_cast<double>(stats.count) / cfg.propinquity_kappa +
                          beta * stats.total_duration / cfg.propinquity_tau;
  return -std::expm1(-exposure);
}

double propinquity_similarity(const LocalStore& store, UserId peer, const SimilarityConfig& cfg) {
  return propinquity_similarity(store.encounters_with(peer), cfg);
}

double pair_propinquity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg) {
  if (u == store.owner()) return propinquity_similarity(store, v, cfg);
  if (v == store.owner()) return propinquity_similarity(store, u, cfg);
  return 0.0;
}

double combine_similarity(std::optional<double> rating, double propinquity, const SimilarityConfig& cfg) {
  if (rating) return cfg.hybrid_weight * *rating + (1.0 - cfg.hybrid_weight) * propinquity;
  return cfg.fallback_to_propinquity ? propinquity : 0.0;
}

double hybrid_similarity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg) {
  return combine_similarity(rating_similarity(u, v, store, cfg), pair_propinquity(u, v, store, cfg), cfg);
}

void rank_neighbors(std::vector<Neighbor>& candidates, std::size_t k) {
  std::erase_if(candidates, [](const Neighbor& n) { return !(n.similarity > 0); });
  std::sort(candidates.begin(), candidates.end(), [](const Neighbor& x, const Neighbor& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return x.user < y.user;
  });
  if (candidates.size() > k) candidates.resize(k);
}

std::vector<Neighbor> select_neighbors(UserId u, std::span<const UserId> candidates, std::size_t k,
                                       const LocalStore& store, const SimilarityConfig& cfg) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::vector<UserId> unique(candidates.begin(), candidates.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<Neighbor> out;
  for (UserId v : unique)
    if (v != u) out.push_back({v, hybrid_similarity(u, v, store, cfg)});
  rank_neighbors(out, k);
  return out;
}

}  // namespace proxrec
