#include "proxrec/cli.hpp"

#include <cstdlib>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "csv.hpp"
#include "proxrec/errors.hpp"
#include "proxrec/experiment.hpp"
#include "proxrec/recommender.hpp"

namespace proxrec {

namespace {

namespace fs = std::filesystem;

void setup_logging() {
  auto logger = spdlog::get("proxrec");
  if (!logger) {
    logger = spdlog::stderr_color_mt("proxrec");
    spdlog::set_default_logger(logger);
  }
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("PROXREC_LOG_LEVEL"); env && *env) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off
    if (level == spdlog::level::off && std::string_view(env) != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  Experiment exp = load_experiment(args.config);
  if (args.seed) exp.set_seed(*args.seed);
  if (args.output_dir) exp.output_dir = fs::absolute(*args.output_dir).lexically_normal();
  spdlog::info("simulating {} with seed {}", args.config, exp.sim.seed);
  const RunResult result = run(exp.sim);
  write_outputs(exp, result, args.config);
  out << "wrote " << result.metrics.size() << " snapshots to " << exp.output_dir.string() << '\n';
  return 0;
}

struct TraceArgs {
  TraceGenParams params;
  double hours = 10.0;
  std::string out;
};

int cmd_generate_traces(TraceArgs args, std::ostream& out) {
  args.params.horizon = args.hours * 3600.0;
  const auto events = generate_trace(args.params);
  save_trace(events, args.out);
  out << "wrote " << events.size() << " encounters to " << args.out << '\n';
  return 0;
}

struct RecommendArgs {
  std::string store;
  std::optional<std::uint64_t> user;
  std::vector<std::uint64_t> group;
  std::size_t n = 10;
  std::string strategy = "average";
  std::size_t k = 20;
  std::string metric = "pearson";
  std::size_t min_overlap = 3;
  std::size_t gamma = 10;
  double scale_min = 1.0;
  double scale_max = 5.0;
  std::optional<std::string> catalog;
};

int cmd_recommend(const RecommendArgs& args, std::ostream& out) {
  if (args.user.has_value() == !args.group.empty())
    throw ValidationError("give exactly one of --user and --group");
  const RatingScale scale{args.scale_min, args.scale_max};
  scale.validate();
  SimilarityConfig cfg;
  cfg.metric = args.metric == "cosine" ? SimilarityMetric::cosine : SimilarityMetric::pearson;
  cfg.min_overlap = args.min_overlap;
  cfg.significance_gamma = args.gamma;
  cfg.validate();

  const auto records = load_snapshot(args.store, scale);
  // Snapshots carry no encounter log, so the owner only has to be a
  // non-rater that keeps every record acceptable.
  const UserId owner{std::numeric_limits<std::uint64_t>::max()};
  LocalStore store(owner, scale);
  for (const auto& r : records) {
    if (r.rater == owner) throw ValidationError("rater id " + std::to_string(owner.value) + " is reserved");
    store.merge_record(r);
  }

  if (args.user) {
    const UserId u{*args.user};
    if (store.ratings_by(u).empty()) throw ColdUserError("user " + std::to_string(u.value) + " is not in the store");
    std::vector<Prediction> ranked;
    if (args.catalog) {
      const Catalog catalog = load_catalog(*args.catalog);
      for (const auto& [item, meta] : catalog.items())
        if (!store.find(u, item)) ranked.push_back(content_score(u, item, store, catalog));
      std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
      });
      if (ranked.size() > args.n) ranked.erase(ranked.begin() + static_cast<std::ptrdiff_t>(args.n), ranked.end());
    } else {
      ranked = top_n(u, args.n, store, cfg, args.k);
    }
    out << "rank\titem\tscore\tbasis\tneighbors\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
      out << i + 1 << '\t' << ranked[i].item.to_string() << '\t' << csv::format_double(ranked[i].score) << '\t'
          << to_string(ranked[i].basis) << '\t' << ranked[i].n_neighbors_used << '\n';
    return 0;
  }

  if (args.catalog) throw ValidationError("--catalog applies to single-user recommendations only");
  const auto strategy = parse_group_strategy(args.strategy);
  if (!strategy) throw ValidationError("unknown strategy " + args.strategy);
  std::vector<UserId> members;
  for (auto m : args.group) members.push_back(UserId{m});
  const auto ranked = group_recommend(members, args.n, store, cfg, args.k, *strategy);
  out << "rank\titem\tscore\tmembers\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << i + 1 << '\t' << ranked[i].item.to_string() << '\t' << csv::format_double(ranked[i].score) << '\t';
    for (std::size_t m = 0; m < ranked[i].member_predictions.size(); ++m) {
      const auto& p = ranked[i].member_predictions[m];
      out << (m ? ";" : "") << members[m].value << '=' << csv::format_double(p.score) << ':' << to_string(p.basis);
    }
    out << '\n';
  }
  return 0;
}

struct ConvertArgs {
  std::string in;
  std::string out;
  std::uint64_t max_user = 0;
  std::optional<std::string> items;
  std::optional<std::string> catalog;
};

int cmd_convert(const ConvertArgs& args, std::ostream& out) {
  if (args.items.has_value() != args.catalog.has_value())
    throw ValidationError("--items and --catalog must be given together");
  const std::size_t n = convert_ml100k(args.in, args.out, args.max_user);
  out << "wrote " << n << " ratings to " << args.out << '\n';
  if (args.items) {
    const std::size_t m = convert_ml100k_items(*args.items, *args.catalog);
    out << "wrote " << m << " catalog items to " << *args.catalog << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();

  CLI::App app{"Decentralized proximity-based recommender simulator", "proxrec"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment file");
  simulate->add_option("--config", sim.config, "Experiment JSON file")->required();
  simulate->add_option("--seed", sim.seed, "Override the run seed");
  simulate->add_option("--output-dir", sim.output_dir, "Override the output directory");

  TraceArgs trace;
  auto* gen = app.add_subcommand("generate-traces", "Generate a synthetic contact trace");
  gen->add_option("--nodes", trace.params.n_nodes, "Number of nodes (ids 1..n)")->required();
  gen->add_option("--hours", trace.hours, "Trace length in hours")->required();
  gen->add_option("--rate", trace.params.mean_rate, "Contacts per pair per hour")->required();
  gen->add_option("--heterogeneity", trace.params.rate_heterogeneity, "Rate multiplier within a community");
  gen->add_option("--communities", trace.params.n_communities, "Number of communities");
  gen->add_option("--mean-duration", trace.params.mean_duration, "Mean contact duration in seconds");
  gen->add_option("--seed", trace.params.seed, "Generator seed");
  gen->add_option("--out", trace.out, "Output trace CSV")->required();

  RecommendArgs rec;
  auto* recommend = app.add_subcommand("recommend", "Rank items from a store snapshot");
  recommend->add_option("--store", rec.store, "Store snapshot CSV")->required();
  auto* user_opt = recommend->add_option("--user", rec.user, "Recommend for one user");
  auto* group_opt = recommend->add_option("--group", rec.group, "Comma separated group members")->delimiter(',');
  user_opt->excludes(group_opt);
  recommend->add_option("--n", rec.n, "Number of items")->check(CLI::PositiveNumber);
  recommend->add_option("--strategy", rec.strategy, "average, least_misery or most_pleasure")
      ->check(CLI::IsMember({"average", "least_misery", "most_pleasure"}));
  recommend->add_option("--k", rec.k, "Neighborhood size")->check(CLI::PositiveNumber);
  recommend->add_option("--metric", rec.metric, "pearson or cosine")->check(CLI::IsMember({"pearson", "cosine"}));
  recommend->add_option("--min-overlap", rec.min_overlap, "Minimum co-rated items");
  recommend->add_option("--gamma", rec.gamma, "Significance weighting threshold");
  recommend->add_option("--scale-min", rec.scale_min, "Lowest rating");
  recommend->add_option("--scale-max", rec.scale_max, "Highest rating");
  recommend->add_option("--catalog", rec.catalog, "Catalog CSV; ranks by content score");

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert-ml100k", "Convert MovieLens-100k files");
  convert->add_option("--in", conv.in, "u.data")->required();
  convert->add_option("--out", conv.out, "Ratings CSV to write")->required();
  convert->add_option("--max-user", conv.max_user, "Keep users with id <= this (0 keeps all)");
  convert->add_option("--items", conv.items, "u.item");
  convert->add_option("--catalog", conv.catalog, "Catalog CSV to write from --items");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*gen) return cmd_generate_traces(trace, out);
    if (*recommend) return cmd_recommend(rec, out);
    if (*convert) return cmd_convert(conv, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ColdUserError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace proxrec
