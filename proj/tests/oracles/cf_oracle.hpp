#pragma once

// Brute-force user-based CF written from the formulas, sharing no code with
// the library. Ratings live in nested std::maps keyed by plain values.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

using Item = std::pair<std::string, std::string>;  // (category, key)

struct CfParams {
  bool pearson = true;
  std::size_t min_overlap = 3;
  std::size_t gamma = 10;
  double kappa = 5.0;
  double tau = 3600.0;
  double beta = 0.5;
  double w = 0.7;
  bool fallback = true;
  std::size_t k = 20;
  double lo = 1.0;
  double hi = 5.0;
};

// 50 digits, so exact ties stay ties after rounding.
using Big = boost::multiprecision::cpp_bin_float_50;

namespace detail {

struct Memo {
  std::map<std::tuple<bool, std::size_t, std::size_t, std::uint64_t, std::uint64_t>, std::optional<Big>> sims;
  std::map<std::uint64_t, Big> means;
};

struct MemoSlot {
  mutable std::shared_ptr<Memo> p;
  MemoSlot() = default;
  MemoSlot(const MemoSlot&) {}
  MemoSlot& operator=(const MemoSlot&) {
    p.reset();
    return *this;
  }
  Memo& get() const {
    if (!p) p = std::make_shared<Memo>();
    return *p;
  }
};

}  // namespace detail

struct CfWorld {
  std::uint64_t owner = 0;
  std::map<std::uint64_t, std::map<Item, double>> ratings;
  std::map<std::uint64_t, std::pair<std::uint64_t, double>> encounters;  // owner's log
  // Filled lazily by the similarity functions. Copies start empty. A world
  // must not be edited after it has been queried.
  detail::MemoSlot memo;
};

struct OraclePrediction {
  Item item;
  double score;
  bool cf;
  std::size_t used;
};

inline double clamp_to(double x, const CfParams& p) { return x < p.lo ? p.lo : (x > p.hi ? p.hi : x); }


inline Big mean_of(const CfWorld& w, std::uint64_t u) {
  auto& memo = w.memo.get().means;
  if (auto it = memo.find(u); it != memo.end()) return it->second;
  const auto& r = w.ratings.at(u);
  Big s = 0;
  for (const auto& [i, v] : r) s += v;
  s /= static_cast<unsigned>(r.size());
  memo.emplace(u, s);
  return s;
}

inline std::optional<Big> rating_sim_uncached(const CfWorld& w, std::uint64_t u, std::uint64_t v,
                                              const CfParams& p) {
  auto iu = w.ratings.find(u);
  auto iv = w.ratings.find(v);
  if (iu == w.ratings.end() || iv == w.ratings.end()) return std::nullopt;
  std::vector<Big> x;
  std::vector<Big> y;
  for (const auto& [item, val] : iu->second) {
    auto f = iv->second.find(item);
    if (f != iv->second.end()) {
      x.emplace_back(val);
      y.emplace_back(f->second);
    }
  }
  const std::size_t n = x.size();
  if (n == 0 || n < p.min_overlap) return std::nullopt;
  if (p.pearson) {
    if (std::set<Big>(x.begin(), x.end()).size() == 1 || std::set<Big>(y.begin(), y.end()).size() == 1)
      return std::nullopt;
    Big mx = 0;
    Big my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<unsigned>(n);
    my /= static_cast<unsigned>(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] -= mx;
      y[i] -= my;
    }
  }
  Big xy = 0;
  Big xx = 0;
  Big yy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0 || yy == 0) return std::nullopt;
  Big c = xy / (sqrt(xx) * sqrt(yy));
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return c * static_cast<unsigned>(std::min(n, p.gamma)) / static_cast<unsigned>(p.gamma);
}

inline std::optional<Big> rating_sim(const CfWorld& w, std::uint64_t u, std::uint64_t v, const CfParams& p) {
  auto& memo = w.memo.get().sims;
  const auto key = std::make_tuple(p.pearson, p.min_overlap, p.gamma, std::min(u, v), std::max(u, v));
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  auto s = rating_sim_uncached(w, std::get<3>(key), std::get<4>(key), p);
  memo.emplace(key, s);
  return s;
}

inline Big prox_sim(const CfWorld& w, std::uint64_t u, std::uint64_t v, const CfParams& p) {
  std::uint64_t peer;
  if (u == w.owner)
    peer = v;
  else if (v == w.owner)
    peer = u;
  else
    return 0;
  auto it = w.encounters.find(peer);
  if (it == w.encounters.end()) return 0;
  const Big x = (1 - Big(p.beta)) * Big(it->second.first) / Big(p.kappa) +
                Big(p.beta) * Big(it->second.second) / Big(p.tau);
  return 1 - exp(-x);
}

inline Big hybrid_sim(const CfWorld& w, std::uint64_t u, std::uint64_t v, const CfParams& p) {
  const auto r = rating_sim(w, u, v, p);
  const Big s = prox_sim(w, u, v, p);
  if (r) return Big(p.w) * *r + (1 - Big(p.w)) * s;
  return p.fallback ? s : Big(0);
}

/// Neighbors of u among raters of `item`: positive similarity, by descending
/// similarity then ascending id, at most k. Values closer than 1e-30 are the
/// same real number for these inputs and count as ties.
inline std::vector<std::pair<std::uint64_t, Big>> neighbors(const CfWorld& w, std::uint64_t u, const Item& item,
                                                            const CfParams& p) {
  std::vector<std::pair<std::uint64_t, Big>> all;
  for (const auto& [v, items] : w.ratings) {
    if (v == u || !items.count(item)) continue;
    Big s = hybrid_sim(w, u, v, p);
    if (s > Big("1e-30")) all.emplace_back(v, std::move(s));
  }
  const Big eps("1e-30");
  std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (abs(a.second - b.second) > eps) return a.second > b.second;
    return a.first < b.first;
  });
  if (all.size() > p.k) all.resize(p.k);
  return all;
}

inline OraclePrediction predict(const CfWorld& w, std::uint64_t u, const Item& item, const CfParams& p) {
  const Big mu = mean_of(w, u);
  const auto nb = neighbors(w, u, item, p);
  if (nb.empty()) return {item, clamp_to(mu.convert_to<double>(), p), false, 0};
  Big num = 0;
  Big den = 0;
  for (const auto& [v, s] : nb) {
    num += s * (Big(w.ratings.at(v).at(item)) - mean_of(w, v));
    den += abs(s);
  }
  return {item, clamp_to(Big(mu + num / den).convert_to<double>(), p), true, nb.size()};
}

inline std::set<Item> all_items(const CfWorld& w) {
  std::set<Item> items;
  for (const auto& [u, r] : w.ratings)
    for (const auto& [i, v] : r) items.insert(i);
  return items;
}

inline std::vector<OraclePrediction> top_n(const CfWorld& w, std::uint64_t u, std::size_t n, const CfParams& p) {
  std::vector<OraclePrediction> out;
  for (const auto& i : all_items(w))
    if (!w.ratings.at(u).count(i)) out.push_back(predict(w, u, i, p));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

enum class Agg { average, least_misery, most_pleasure };

struct OracleGroupItem {
  Item item;
  double score;
  std::vector<double> member_scores;
};

/// Every candidate item (rated by no member), all strategies ranked
/// exhaustively.
inline std::vector<OracleGroupItem> group(const CfWorld& w, const std::vector<std::uint64_t>& members, std::size_t n,
                                          Agg agg, const CfParams& p) {
  std::vector<OracleGroupItem> out;
  for (const auto& i : all_items(w)) {
    bool rated = false;
    for (auto m : members) rated = rated || w.ratings.at(m).count(i) > 0;
    if (rated) continue;
    OracleGroupItem g{i, 0.0, {}};
    for (auto m : members) g.member_scores.push_back(predict(w, m, i, p).score);
    double sum = 0;
    for (double s : g.member_scores) sum += s;
    if (agg == Agg::average) g.score = sum / static_cast<double>(members.size());
    if (agg == Agg::least_misery) g.score = *std::min_element(g.member_scores.begin(), g.member_scores.end());
    if (agg == Agg::most_pleasure) g.score = *std::max_element(g.member_scores.begin(), g.member_scores.end());
    out.push_back(std::move(g));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

}  // namespace oracle
