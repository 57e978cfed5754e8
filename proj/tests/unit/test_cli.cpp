#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../support/fixtures.hpp"
#include "proxrec/cli.hpp"

using namespace proxrec;
namespace fs = std::filesystem;
using fixtures::rec;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "proxrec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& content) { std::ofstream(p) << content; }

fs::path experiment_dir(const std::string& name, const std::string& extra) {
  const auto dir = fixtures::temp_dir(name);
  std::string ratings = "rater,category,key,value,timestamp,source\n";
  for (int u = 1; u <= 6; ++u)
    for (int i = 0; i < 5; ++i)
      ratings += std::to_string(u) + ",movies," + std::to_string((u * 2 + i) % 9) + "," +
                 std::to_string(1 + (u + i * 2) % 5) + ",1,manual\n";
  write(dir / "ratings.csv", ratings);
  write(dir / "exp.json", R"({
  "ratings": "ratings.csv",
  "trace_gen": {"mean_rate": 2.0, "seed": 3},
  "exchange": {"upload_period": 600, "relay": {"enabled": true, "max_hops": "unlimited"}},
  "similarity": {"min_overlap": 1},
  "horizon": 36000,
  "metric_period": 3600,
  "holdout_fraction": 0.2,
  "seed": 9)" + extra + "\n}\n");
  return dir;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
  EXPECT_EQ(cli({"generate-traces", "--nodes", "3"}).code, 1);
}

TEST(Cli, SimulateWritesDeterministicOutputs) {
  const auto dir = experiment_dir("cli_sim", "");
  const auto a = cli({"simulate", "--config", (dir / "exp.json").string(), "--output-dir", (dir / "a").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = cli({"simulate", "--config", (dir / "exp.json").string(), "--output-dir", (dir / "b").string()});
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string metrics = slurp(dir / "a" / "metrics.csv");
  EXPECT_EQ(metrics.rfind(kMetricsHeader, 0), 0u);
  EXPECT_EQ(metrics, slurp(dir / "b" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.json"));
  const auto c = cli({"simulate", "--config", (dir / "exp.json").string(), "--output-dir", (dir / "c").string(),
                      "--seed", "10"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(metrics, slurp(dir / "c" / "metrics.csv"));
}

TEST(Cli, SimulateRejectsUnknownKeys) {
  const auto dir = experiment_dir("cli_strict", ",\n  \"bogus\": 1");
  const auto r = cli({"simulate", "--config", (dir / "exp.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  EXPECT_EQ(cli({"simulate", "--config", (dir / "missing.json").string()}).code, 1);
}

TEST(Cli, GenerateTracesIsDeterministic) {
  const auto dir = fixtures::temp_dir("cli_trace");
  auto gen = [&](const std::string& name, const std::string& seed) {
    return cli({"generate-traces", "--nodes", "8", "--hours", "2", "--rate", "1.5", "--communities", "2", "--seed",
                seed, "--out", (dir / name).string()});
  };
  ASSERT_EQ(gen("a.csv", "4").code, 0);
  ASSERT_EQ(gen("b.csv", "4").code, 0);
  ASSERT_EQ(gen("c.csv", "5").code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
  EXPECT_EQ(cli({"generate-traces", "--nodes", "8", "--hours", "2", "--rate", "0", "--out", (dir / "d.csv").string()})
                .code,
            1);
}

// Members 1 and 2 predict x as 5 and 1, y as 3 and 3.
TEST(Cli, RecommendGroupStrategies) {
  const auto dir = fixtures::temp_dir("cli_rec");
  LocalStore s(UserId{1});
  s.merge_record(rec(1, "a", 4));
  s.merge_record(rec(2, "b", 2, 1, 1));
  for (auto [u, k, v] : {std::tuple{3, "a", 4.0f}, {3, "x", 5.0f}, {3, "y", 3.0f}, {4, "b", 4.0f}, {4, "x", 1.0f},
                         {4, "y", 4.0f}})
    s.merge_record(rec(static_cast<std::uint64_t>(u), k, v, 1, 1));
  save_snapshot(s, dir / "store.csv");
  const std::vector<std::string> common{"recommend", "--store", (dir / "store.csv").string(), "--group", "1,2",
                                        "--metric", "cosine", "--min-overlap", "1", "--gamma", "1"};
  auto with = [&](const std::string& strategy) {
    auto args = common;
    args.insert(args.end(), {"--strategy", strategy});
    return cli(args);
  };
  const auto lm = with("least_misery");
  ASSERT_EQ(lm.code, 0) << lm.err;
  EXPECT_EQ(lm.out,
            "rank\titem\tscore\tmembers\n"
            "1\tmovies:y\t3\t1=3:cf;2=3:cf\n"
            "2\tmovies:x\t1\t1=5:cf;2=1:cf\n");
  const auto mp = with("most_pleasure");
  ASSERT_EQ(mp.code, 0) << mp.err;
  EXPECT_EQ(mp.out.substr(0, mp.out.find('\n', mp.out.find('\n') + 1) + 1),
            "rank\titem\tscore\tmembers\n1\tmovies:x\t5\t1=5:cf;2=1:cf\n");
  const auto missing = cli({"recommend", "--store", (dir / "store.csv").string(), "--group", "1,77"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("77"), std::string::npos);
  EXPECT_EQ(with("median").code, 1);
}

TEST(Cli, RecommendSingleUser) {
  const auto dir = fixtures::temp_dir("cli_rec_user");
  LocalStore s(UserId{1});
  s.merge_record(rec(1, "a", 4));
  s.merge_record(rec(2, "a", 4, 1, 1));
  s.merge_record(rec(2, "b", 5, 1, 1));
  save_snapshot(s, dir / "store.csv");
  const auto r = cli({"recommend", "--store", (dir / "store.csv").string(), "--user", "1", "--metric", "cosine",
                      "--min-overlap", "1", "--gamma", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  // 4 + (5 - 4.5)
  EXPECT_EQ(r.out, "rank\titem\tscore\tbasis\tneighbors\n1\tmovies:b\t4.5\tcf\t1\n");
  EXPECT_EQ(cli({"recommend", "--store", (dir / "store.csv").string(), "--user", "9"}).code, 1);
  EXPECT_EQ(cli({"recommend", "--store", (dir / "store.csv").string()}).code, 1);
}

TEST(Cli, ConvertMl100k) {
  const auto dir = fixtures::temp_dir("cli_ml");
  write(dir / "u.data", "1\t10\t4\t100\n2\t10\t3\t101\n300\t11\t5\t102\n");
  const auto r = cli({"convert-ml100k", "--in", (dir / "u.data").string(), "--out", (dir / "r.csv").string(),
                      "--max-user", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_ratings(dir / "r.csv").size(), 2u);
  // a missing input is a runtime failure
  EXPECT_EQ(cli({"convert-ml100k", "--in", (dir / "nope").string(), "--out", (dir / "x.csv").string()}).code, 2);
  EXPECT_EQ(cli({"convert-ml100k", "--in", (dir / "u.data").string(), "--out", (dir / "y.csv").string(), "--items",
                 (dir / "u.item").string()}).code,
            1);
}
