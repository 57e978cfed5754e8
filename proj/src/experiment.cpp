#include "proxrec/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "proxrec/errors.hpp"

namespace proxrec {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Strict view of one JSON object: rejects keys outside `allowed` up front.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    for (const auto& [key, value] : j_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) throw ConfigError("unknown key '" + name(key) + "'");
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }
  const json& at(std::string_view key) const { return j_.at(key); }
  std::string name(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  void number(std::string_view key, double& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("'" + name(key) + "' must be a number");
    out = v.get<double>();
  }

  template <typename T>
  void unsigned_int(std::string_view key, T& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned()) throw ConfigError("'" + name(key) + "' must be a non-negative integer");
    out = static_cast<T>(v.get<std::uint64_t>());
  }

  void boolean(std::string_view key, bool& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError("'" + name(key) + "' must be true or false");
    out = v.get<bool>();
  }

  std::optional<std::string> string(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("'" + name(key) + "' must be a string");
    return v.get<std::string>();
  }

  Section child(std::string_view key, std::initializer_list<std::string_view> allowed) const {
    return Section(at(key), name(key), allowed);
  }

 private:
  std::string where() const { return path_.empty() ? "experiment file" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

ordered_json row_json(const MetricsRow& r) {
  ordered_json j;
  j["time"] = r.time;
  j["spread"] = r.spread;
  j["coverage"] = r.coverage;
  j["rmse"] = r.rmse ? ordered_json(*r.rmse) : ordered_json(nullptr);
  j["mae"] = r.mae ? ordered_json(*r.mae) : ordered_json(nullptr);
  j["mean_store_bytes"] = r.mean_store_bytes;
  j["fetches_attempted"] = r.fetches_attempted;
  j["fetches_dropped"] = r.fetches_dropped;
  return j;
}

ordered_json experiment_json(const Experiment& exp) {
  const SimConfig& c = exp.sim;
  ordered_json j;
  j["ratings"] = c.ratings_path.string();
  if (c.trace_path) j["trace"] = c.trace_path->string();
  if (c.trace_gen) {
    const TraceGenParams& g = *c.trace_gen;
    j["trace_gen"] = {{"horizon", g.horizon},
                      {"mean_rate", g.mean_rate},
                      {"rate_heterogeneity", g.rate_heterogeneity},
                      {"n_communities", g.n_communities},
                      {"mean_duration", g.mean_duration},
                      {"seed", g.seed}};
  }
  if (c.catalog_path) j["catalog"] = c.catalog_path->string();
  j["rating_scale"] = {{"min", c.scale.min}, {"max", c.scale.max}};
  j["ontology"] = c.ontology.categories();
  ordered_json relay;
  relay["enabled"] = c.exchange.relay.enabled;
  if (c.exchange.relay.max_hops == kUnlimitedHops)
    relay["max_hops"] = "unlimited";
  else
    relay["max_hops"] = c.exchange.relay.max_hops;
  j["exchange"] = {{"upload_period", c.exchange.upload_period},
                   {"relay", relay},
                   {"fetch_deferral", c.exchange.fetch_deferral},
                   {"adv_size_cap", c.exchange.adv_size_cap},
                   {"payload_size_cap", c.exchange.payload_size_cap}};
  j["csp"] = {{"upload_latency", c.csp.upload_latency},
              {"fetch_latency", c.csp.fetch_latency},
              {"availability", c.csp.availability}};
  const SimilarityConfig& s = c.similarity;
  j["similarity"] = {{"metric", s.metric == SimilarityMetric::pearson ? "pearson" : "cosine"},
                     {"min_overlap", s.min_overlap},
                     {"significance_gamma", s.significance_gamma},
                     {"propinquity_kappa", s.propinquity_kappa},
                     {"propinquity_tau", s.propinquity_tau},
                     {"duration_weight", s.duration_weight},
                     {"hybrid_weight", s.hybrid_weight},
                     {"fallback_to_propinquity", s.fallback_to_propinquity}};
  j["k_neighbors"] = c.k_neighbors;
  j["horizon"] = c.horizon;
  j["metric_period"] = c.metric_period;
  j["holdout_fraction"] = c.holdout_fraction;
  j["seed"] = c.seed;
  j["output_dir"] = exp.output_dir.string();
  j["write_store_snapshots"] = exp.write_store_snapshots;
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void Experiment::set_seed(std::uint64_t seed) {
  sim.seed = seed;
  if (sim.trace_gen && !trace_seed_explicit) sim.trace_gen->seed = derived_trace_seed(seed);
}

Experiment parse_experiment(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment file is not valid JSON: ") + e.what());
  }
  const Section top(root, "",
                    {"ratings", "trace", "trace_gen", "catalog", "rating_scale", "ontology", "exchange", "csp",
                     "similarity", "k_neighbors", "horizon", "metric_period", "holdout_fraction", "seed",
                     "output_dir", "write_store_snapshots"});
  Experiment exp;
  SimConfig& c = exp.sim;

  const auto ratings = top.string("ratings");
  if (!ratings) throw ConfigError("missing required key 'ratings'");
  c.ratings_path = resolve(base_dir, *ratings);
  if (auto trace = top.string("trace")) c.trace_path = resolve(base_dir, *trace);
  if (auto catalog = top.string("catalog")) c.catalog_path = resolve(base_dir, *catalog);
  if (top.has("trace") == top.has("trace_gen"))
    throw ConfigError("exactly one of 'trace' and 'trace_gen' must be given");

  if (top.has("rating_scale")) {
    const Section s = top.child("rating_scale", {"min", "max"});
    s.number("min", c.scale.min);
    s.number("max", c.scale.max);
  }
  if (top.has("ontology")) {
    const json& o = top.at("ontology");
    if (!o.is_array()) throw ConfigError("'ontology' must be an array of strings");
    std::vector<std::string> cats;
    for (const auto& v : o) {
      if (!v.is_string()) throw ConfigError("'ontology' must be an array of strings");
      cats.push_back(v.get<std::string>());
    }
    try {
      c.ontology = Ontology(std::move(cats));
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("'ontology': ") + e.what());
    }
  }
  if (top.has("exchange")) {
    const Section e = top.child(
        "exchange", {"upload_period", "relay", "fetch_deferral", "adv_size_cap", "payload_size_cap"});
    e.number("upload_period", c.exchange.upload_period);
    e.number("fetch_deferral", c.exchange.fetch_deferral);
    e.unsigned_int("adv_size_cap", c.exchange.adv_size_cap);
    e.unsigned_int("payload_size_cap", c.exchange.payload_size_cap);
    if (e.has("relay")) {
      const Section r = e.child("relay", {"enabled", "max_hops"});
      r.boolean("enabled", c.exchange.relay.enabled);
      if (r.has("max_hops")) {
        const json& h = r.at("max_hops");
        if (h.is_string() && h.get<std::string>() == "unlimited") {
          c.exchange.relay.max_hops = kUnlimitedHops;
        } else if (h.is_number_unsigned() && h.get<std::uint64_t>() >= 1 &&
                   h.get<std::uint64_t>() <= kUnlimitedHops) {
          c.exchange.relay.max_hops = static_cast<std::uint8_t>(h.get<std::uint64_t>());
        } else {
          throw ConfigError("'exchange.relay.max_hops' must be an integer in [1,255] or \"unlimited\"");
        }
      }
    }
  }
  if (top.has("csp")) {
    const Section s = top.child("csp", {"upload_latency", "fetch_latency", "availability"});
    s.number("upload_latency", c.csp.upload_latency);
    s.number("fetch_latency", c.csp.fetch_latency);
    s.number("availability", c.csp.availability);
  }
  if (top.has("similarity")) {
    const Section s =
        top.child("similarity", {"metric", "min_overlap", "significance_gamma", "propinquity_kappa",
                                 "propinquity_tau", "duration_weight", "hybrid_weight", "fallback_to_propinquity"});
    if (auto m = s.string("metric")) {
      if (*m == "pearson")
        c.similarity.metric = SimilarityMetric::pearson;
      else if (*m == "cosine")
        c.similarity.metric = SimilarityMetric::cosine;
      else
        throw ConfigError("'similarity.metric' must be \"pearson\" or \"cosine\"");
    }
    s.unsigned_int("min_overlap", c.similarity.min_overlap);
    s.unsigned_int("significance_gamma", c.similarity.significance_gamma);
    s.number("propinquity_kappa", c.similarity.propinquity_kappa);
    s.number("propinquity_tau", c.similarity.propinquity_tau);
    s.number("duration_weight", c.similarity.duration_weight);
    s.number("hybrid_weight", c.similarity.hybrid_weight);
    s.boolean("fallback_to_propinquity", c.similarity.fallback_to_propinquity);
  }
  top.unsigned_int("k_neighbors", c.k_neighbors);
  top.number("horizon", c.horizon);
  top.number("metric_period", c.metric_period);
  top.number("holdout_fraction", c.holdout_fraction);
  top.unsigned_int("seed", c.seed);
  exp.output_dir = resolve(base_dir, top.string("output_dir").value_or("output"));
  top.boolean("write_store_snapshots", exp.write_store_snapshots);

  if (top.has("trace_gen")) {
    const Section g = top.child(
        "trace_gen", {"horizon", "mean_rate", "rate_heterogeneity", "n_communities", "mean_duration", "seed"});
    TraceGenParams p;
    p.horizon = c.horizon;
    g.number("horizon", p.horizon);
    g.number("mean_rate", p.mean_rate);
    g.number("rate_heterogeneity", p.rate_heterogeneity);
    g.unsigned_int("n_communities", p.n_communities);
    g.number("mean_duration", p.mean_duration);
    exp.trace_seed_explicit = g.has("seed");
    g.unsigned_int("seed", p.seed);
    c.trace_gen = p;
  }
  exp.set_seed(c.seed);

  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return exp;
}

Experiment load_experiment(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open experiment file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_experiment(text.str(), fs::absolute(base));
}

std::string experiment_to_json(const Experiment& exp) { return experiment_json(exp).dump(2); }

void write_outputs(const Experiment& exp, const RunResult& result, const fs::path& config_path) {
  fs::create_directories(exp.output_dir);
  {
    std::ostringstream csv;
    write_metrics_csv(result.metrics, csv);
    write_file(exp.output_dir / "metrics.csv", csv.str());
  }
  ordered_json summary;
  summary["seed"] = exp.sim.seed;
  summary["config_file"] = fs::absolute(config_path).lexically_normal().string();
  summary["config"] = experiment_json(exp);
  summary["nodes"] = result.stores.size();
  summary["total_records"] = result.total_records;
  summary["held_out"] = result.holdout.size();
  summary["snapshots"] = result.metrics.size();
  summary["final"] = result.metrics.empty() ? ordered_json(nullptr) : row_json(result.metrics.back());
  summary["stats"] = {{"uploads", result.stats.uploads},
                      {"encounters", result.stats.encounters},
                      {"deliveries", result.stats.deliveries},
                      {"max_payload_bytes", result.stats.max_payload_bytes},
                      {"max_advertisement_bytes", result.stats.max_advertisement_bytes},
                      {"payload_digest", hex64(result.stats.payload_digest)}};
  write_file(exp.output_dir / "summary.json", summary.dump(2) + "\n");

  if (exp.write_store_snapshots) {
    const fs::path dir = exp.output_dir / "stores";
    fs::create_directories(dir);
    for (const auto& s : result.stores) save_snapshot(s, dir / fmt::format("node_{}.csv", s.owner().value));
  }
}

}  // namespace proxrec
