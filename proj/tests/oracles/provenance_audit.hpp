#pragma once

// Observer that rebuilds every node's holdings from the deliveries it sees
// and checks that nothing arrives without a matching upload chain.

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "proxrec/simulator.hpp"

namespace oracle {

class ProvenanceAudit : public proxrec::SimObserver {
 public:
  using Key = std::tuple<std::uint64_t, std::string, std::string>;
  struct Held {
    float value;
    std::uint64_t timestamp;
    unsigned hops;
    bool operator==(const Held&) const = default;
  };

  /// Own ratings that start in the stores (after holdout).
  void add_own(const proxrec::RatingRecord& r) { shadow_[r.rater.value][key(r)] = {r.value, r.timestamp, 0}; }

  void on_upload(double time, proxrec::UserId node, const proxrec::Payload& payload,
                 const proxrec::Token&) override {
    auto& mine = shadow_[node.value];
    for (const auto& r : payload.records) {
      if (r.rater == node) {
        auto it = mine.find(key(r));
        if (r.hops != 1 || it == mine.end() || it->second.hops != 0 || it->second.value != r.value)
          fail(time, "node " + std::to_string(node.value) + " uploaded own record with bad provenance");
        continue;
      }
      auto it = mine.find(key(r));
      if (it == mine.end())
        fail(time, "node " + std::to_string(node.value) + " uploaded a record it never received");
      else if (it->second.hops + 1 != r.hops || it->second.value != r.value || it->second.timestamp != r.timestamp)
        fail(time, "node " + std::to_string(node.value) + " uploaded a record with altered hops or value");
    }
    uploads_[node.value].push_back(payload.records);
    ++uploads_seen_;
  }

  void on_delivery(double time, proxrec::UserId node, const proxrec::Payload& payload,
                   const proxrec::MergeStats&) override {
    const auto& history = uploads_[payload.sender.value];
    bool matched = false;
    for (const auto& up : history) matched = matched || same(up, payload.records);
    if (!matched)
      fail(time, "delivery to node " + std::to_string(node.value) + " does not match any upload of node " +
                     std::to_string(payload.sender.value));
    auto& mine = shadow_[node.value];
    for (const auto& r : payload.records) {
      if (r.rater == node) continue;
      const Held incoming{r.value, r.timestamp, r.hops};
      auto it = mine.find(key(r));
      if (it == mine.end() || incoming.timestamp > it->second.timestamp ||
          (incoming.timestamp == it->second.timestamp && incoming.hops < it->second.hops))
        mine[key(r)] = incoming;
    }
    ++deliveries_seen_;
  }

  /// The simulator's final stores must equal the rebuilt holdings.
  void check_final(const proxrec::RunResult& result) {
    for (const auto& store : result.stores) {
      std::map<Key, Held> actual;
      for (const auto& r : store.records()) actual[key(r)] = {r.value, r.timestamp, r.hops};
      if (actual != shadow_[store.owner().value])
        fail(-1, "final store of node " + std::to_string(store.owner().value) + " differs from observed deliveries");
    }
  }

  bool ok() const { return errors_.empty(); }
  const std::vector<std::string>& errors() const { return errors_; }
  std::size_t uploads_seen() const { return uploads_seen_; }
  std::size_t deliveries_seen() const { return deliveries_seen_; }

 private:
  static Key key(const proxrec::RatingRecord& r) {
    return {r.rater.value, std::string(r.item.category()), std::string(r.item.key())};
  }

  static bool same(const std::vector<proxrec::RatingRecord>& a, const std::vector<proxrec::RatingRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].rater != b[i].rater || a[i].item != b[i].item || a[i].value != b[i].value ||
          a[i].timestamp != b[i].timestamp || a[i].hops != b[i].hops || a[i].source != b[i].source)
        return false;
    return true;
  }

  void fail(double time, const std::string& what) {
    std::ostringstream os;
    os << "t=" << time << ": " << what;
    if (errors_.size() < 20) errors_.push_back(os.str());
  }

  std::map<std::uint64_t, std::map<Key, Held>> shadow_;
  std::map<std::uint64_t, std::vector<std::vector<proxrec::RatingRecord>>> uploads_;
  std::vector<std::string> errors_;
  std::size_t uploads_seen_ = 0;
  std::size_t deliveries_seen_ = 0;
};

}  // namespace oracle
