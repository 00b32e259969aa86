#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vdm/cli.hpp"
#include "vdm/word.hpp"

using namespace vdm;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST(Cli, Moment) {
  const auto r = run({"moment", "(X* X)^4"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("29/2 + t - t^2"), std::string::npos);
  EXPECT_NE(r.out.find("44/3"), std::string::npos);

  const auto j = json_lines(run({"--json", "moment", "X [t] X* X [t] X*"}).out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["text"], "7/12");
  EXPECT_EQ(j[0]["constant"], true);
}

TEST(Cli, TraceDiagLambdaGamma) {
  EXPECT_EQ(run({"trace", "(X X*)^3"}).out, "5\n");
  EXPECT_EQ(run({"trace", "((X* X)^2 - 2)"}).out, "0\n");
  EXPECT_EQ(run({"diag", "(X* X)^4", "--t", "1/2"}).out, "59/4\n");
  EXPECT_NE(run({"lambda", "{1,3|2,4}", "1", "1", "1"}).out.find("1/2 + t - t^2"), std::string::npos);
  EXPECT_EQ(run({"lambda", "{1,3|2,4}", "1", "1", "1", "--t", "1/4"}).out, "11/16\n");
  EXPECT_EQ(run({"lambda", "{1,3|2,4}", "1", "1", "1", "--tau", "1"}).out, "2/3\n");
  EXPECT_EQ(run({"gamma", "{1,3|2,4}", "t", "1", "t", "1"}).out, "t^2\n");
}

TEST(Cli, Cumulants) {
  EXPECT_EQ(run({"cumulant", "--n", "1", "t"}).out, "1/2\n");
  EXPECT_EQ(run({"cumulant", "--n", "4"}).out, "2/3\n");
  EXPECT_EQ(run({"cumulant", "--n", "3", "t", "t", "t", "t", "t"}).out, "0\n");
  EXPECT_EQ(run({"cumulant", "--eps", "1*1*"}).out, "0\n");
  const auto report = run({"--json", "cumulant", "--report", "2"});
  EXPECT_EQ(report.code, kExitOk);
  const auto rows = json_lines(report.out);
  EXPECT_EQ(rows.size(), 30u);
  for (const auto& row : rows) EXPECT_TRUE(row["equal"].get<bool>()) << row.dump();
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"moment"}).code, kExitUsage);
  EXPECT_EQ(run({"moment", "X", "--no-such-flag"}).code, kExitUsage);
  const auto bad = run({"moment", "X [1/0]"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("position 5"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"moment", "(X X*)^-1"}).code, kExitUsage);
  EXPECT_EQ(run({"diag", "X X", "--t", "1/2"}).code, kExitUsage);
  EXPECT_EQ(run({"cumulant", "--n", "9"}).code, kExitUsage);
  EXPECT_EQ(run({"lambda", "{1,3|2,4}", "1"}).code, kExitUsage);
  const auto guard = run({"moment", "(X* X)^9"});
  EXPECT_EQ(guard.code, kExitResource);
  EXPECT_NE(guard.err.find("--guard-override"), std::string::npos);
  EXPECT_EQ(run({"--trials", "10", "mc", "--word", "X* X", "--N", "600"}).code, kExitResource);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, GuardOverride) {
  EXPECT_EQ(run({"trace", "(X X*)^8 X"}).code, kExitResource);
  const auto r = run({"--guard-override", "18", "trace", "(X X*)^8 X"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "0\n");
}

TEST(Cli, MonteCarlo) {
  const auto r = run({"--json", "--trials", "50", "--seed", "3", "mc", "--word", "(X* X)^2", "--N", "40"});
  EXPECT_TRUE(r.code == kExitOk || r.code == kExitVerdictFail);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["analytic"], 2.0);
  EXPECT_EQ(lines[0]["seed"], 3);
  EXPECT_EQ(r.out, run({"--json", "--trials", "50", "--seed", "3", "mc", "--word", "(X* X)^2", "--N", "40"}).out);

  const auto identity = run({"--trials", "5", "mc", "--word", "X* X", "--N", "30", "--t", "1/3"});
  EXPECT_EQ(identity.code, kExitOk);
  EXPECT_NE(identity.out.find("PASS"), std::string::npos);

  EXPECT_EQ(run({"--trials", "5", "mc", "--word", "X* X", "--N", "30", "--allowance", "-1"}).code, kExitUsage);

  const auto decay = json_lines(run({"--json", "--trials", "20", "mc", "decay", "--eps", "11", "--Ns", "8,16"}).out);
  ASSERT_EQ(decay.size(), 1u);
  EXPECT_EQ(decay[0]["rows"].size(), 2u);
  EXPECT_EQ(run({"mc", "decay", "--eps", "11", "--Ns", "8,x"}).code, kExitUsage);

  const auto growth = json_lines(run({"--json", "--trials", "5", "mc", "growth", "--p", "1", "--Ns", "8,16"}).out);
  ASSERT_EQ(growth.size(), 1u);
  EXPECT_FALSE(growth[0]["grows"].get<bool>());
  EXPECT_EQ(run({"mc", "growth", "--p", "7"}).code, kExitUsage);
  EXPECT_EQ(run({"mc"}).code, kExitUsage);
}

TEST(Cli, Cache) {
  const auto path = std::filesystem::temp_directory_path() / "vdm_cli_cache_test.jsonl";
  std::filesystem::remove(path);
  EXPECT_EQ(run({"cache", "stats"}).code, kExitUsage);
  EXPECT_EQ(run({"--cache-path", path.string(), "lambda", "{1,4|2,5|3,6}", "1", "1", "1", "1", "1"}).code, kExitOk);
  const auto stats = json_lines(run({"--json", "--cache-path", path.string(), "cache", "stats"}).out);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_GE(stats[0]["entries"].get<int>(), 1);
  EXPECT_EQ(run({"--cache-path", path.string(), "cache", "clear"}).code, kExitOk);
  EXPECT_EQ(json_lines(run({"--json", "--cache-path", path.string(), "cache", "stats"}).out)[0]["entries"], 0);
  std::filesystem::remove(path);
}

TEST(Cli, WordRoundTrip) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> kind(0, 2), num(-5, 5), den(1, 4), deg(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Letter> letters;
    const int len = 1 + trial % 9;
    for (int i = 0; i < len; ++i) {
      switch (kind(rng)) {
        case 0: letters.push_back(Letter::x()); break;
        case 1: letters.push_back(Letter::xstar()); break;
        default: {
          std::vector<Rational> c;
          for (int k = deg(rng); k >= 0; --k) {
            Rational q(num(rng), den(rng));
            q.canonicalize();
            c.push_back(q);
          }
          letters.push_back(Letter::coefficient(PiecewisePoly(Polynomial(c))));
        }
      }
    }
    const Word w(letters);
    EXPECT_EQ(parse_word(w.to_string()), w) << w.to_string();
  }
  const Word pw({Letter::x(), Letter::coefficient(parse_function("piecewise{ [0,1/3]: 3*t; (1/3,1]: 1 }")), Letter::xstar()});
  EXPECT_EQ(parse_word(pw.to_string()), pw) << pw.to_string();
}
