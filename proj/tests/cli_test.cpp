#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = webred::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json json_of(const Result& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST(CliTorsion, BilinearTerm) {
  const auto r = run({"torsion", "--expr", "x1+x2+x3+x1*x2", "--n", "3", "--at", "0,0,0", "--output", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_DOUBLE_EQ(j["torsion"][0][1].get<double>(), -2.0 / 3.0);
  EXPECT_DOUBLE_EQ(j["torsion"][0][2].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(j["torsion"][1][1].get<double>(), 0.0);
}

TEST(CliTorsion, ZeroTableAsText) {
  const auto r = run({"torsion", "--expr", "x1+x2+x3", "--n", "3", "--at", "0,0,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("torsion of x1+x2+x3"), std::string::npos);
}

TEST(CliTorsion, InputErrors) {
  EXPECT_EQ(run({"torsion", "--expr", "x1+x2+x3", "--n", "3", "--at", "0,0"}).code, 2);
  EXPECT_EQ(run({"torsion", "--expr", "x1+", "--n", "3", "--at", "0,0,0"}).code, 2);
  EXPECT_EQ(run({"torsion", "--expr", "x1+x2+x3", "--n", "3"}).code, 2);
  EXPECT_EQ(run({"torsion", "--expr", "x1+x4", "--n", "3", "--at", "0,0,0"}).code, 2);
  EXPECT_EQ(run({"torsion", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(CliTorsion, SingularPointIsEvaluationFailure) {
  const auto r = run({"torsion", "--expr", "x1*x2+x3", "--n", "3", "--at", "0,1,1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("not regular"), std::string::npos);
}

TEST(CliCheck, AllCriteriaAgreeOnProductWeb) {
  const auto r = run({"check", "--expr", "x1*(x2+x3)*x4", "--n", "4", "--P", "1", "--A", "2,3", "--criterion", "all",
                      "--output", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["verdict"], "reducible");
  EXPECT_EQ(j["agree"], true);
  EXPECT_EQ(j["reports"].size(), 5u);
  for (const auto& report : j["reports"]) {
    for (const char* key : {"verdict", "max_residual", "scale", "partition", "samples", "seed", "worst_witness"})
      EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(j["partition"]["S"], nlohmann::json::array({4}));
}

TEST(CliCheck, BilinearNotReducible) {
  const auto r = run({"check", "--expr", "x1*x2+x3+x4", "--n", "4", "--P", "1", "--A", "2,3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("subweb: not_reducible"), std::string::npos) << r.out;
}

TEST(CliCheck, SingleCriteria) {
  for (const char* c : {"eq14", "eq20", "eq18", "frobenius", "frobenius-large"}) {
    const auto r = run({"check", "--expr", "x1*x2+x3+x4", "--n", "4", "--l", "1", "--k", "3", "--criterion", c,
                        "--output", "json"});
    ASSERT_EQ(r.code, 0) << c << r.err;
    const auto v = json_of(r)["verdict"];
    EXPECT_TRUE(v == "not_reducible" || v == "not_integrable") << c;
  }
}

TEST(CliCheck, GoursatPreset) {
  for (const char* preset : {"goursat4", "goursat5"}) {
    const auto r = run({"check", "--preset", preset, "--output", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json_of(r)["verdict"], "reducible");
  }
  const auto r = run({"check", "--preset", "goursat4", "--output", "json"});
  EXPECT_EQ(json_of(r)["expr"], "x1*((x2+x3)*x4)+x4");
}

TEST(CliCheck, InputErrors) {
  EXPECT_EQ(run({"check", "--expr", "x1*x2+x3+x4", "--n", "4"}).code, 2);  // no partition
  EXPECT_EQ(run({"check", "--expr", "x1*x2+x3+x4", "--n", "4", "--P", "1", "--A", "2"}).code, 2);
  EXPECT_EQ(run({"check", "--expr", "x1*x2+x3+x4", "--n", "4", "--P", "1", "--A", "2,3", "--l", "1"}).code, 2);
  EXPECT_EQ(run({"check", "--preset", "goursat9"}).code, 2);
  EXPECT_EQ(run({"check", "--preset", "goursat4", "--criterion", "eq99"}).code, 2);
  EXPECT_EQ(run({"check", "--preset", "goursat4", "--box", "0:1,0:1"}).code, 2);
  EXPECT_EQ(run({"check", "--preset", "goursat4", "--count", "0"}).code, 2);
}

TEST(CliCheck, SamplingFailureExitCode) {
  const auto r = run({"check", "--expr", "x1*x2*x3*x4", "--n", "4", "--P", "1", "--A", "2,3", "--margin", "0.9",
                      "--max-rejections", "50", "--output", "json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json_of(r)["verdict"], "inconclusive");
}

TEST(CliCheck, BoxOption) {
  const auto r = run({"check", "--expr", "log(x1)*x2+x3*x4", "--n", "4", "--P", "1", "--A", "2,3", "--box=0.5:1.5",
                      "--criterion", "eq20", "--output", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& x : json_of(r)["worst_witness"]["point"]) {
    EXPECT_GE(x.get<double>(), 0.5);
    EXPECT_LE(x.get<double>(), 1.5);
  }
}

TEST(CliCheck, DeterministicJson) {
  const std::vector<std::string> args{"check", "--expr", "x1*x2+sin(x3)*x4+x2*x3", "--n", "4", "--P", "1",
                                      "--A", "2,3", "--criterion", "all", "--seed", "7", "--output", "json"};
  const auto a = run(args);
  const auto b = run(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json_of(a)["seed"], 7);
  // JSON round-trips through a parser unchanged
  EXPECT_EQ(nlohmann::ordered_json::parse(a.out).dump(2) + "\n", a.out);
}

TEST(CliCompose, PrintsComposedFunction) {
  const auto r = run({"compose", "--f", "u1*u2", "--g", "(x2+x3)*x4", "--P", "1", "--A", "2,3", "--S", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "x1*((x2+x3)*x4)");
  EXPECT_NE(r.out.find("reducible"), std::string::npos);

  const auto j = json_of(run({"compose", "--f", "u1*u2", "--g", "(x2+x3)*x4", "--P", "1", "--A", "2,3", "--S", "4",
                              "--output", "json"}));
  EXPECT_EQ(j["expr"], "x1*((x2+x3)*x4)");
  EXPECT_EQ(j["self_check"]["verdict"], "reducible");
}

TEST(CliCompose, Errors) {
  EXPECT_EQ(run({"compose", "--f", "u1*u5", "--g", "x2+x3", "--P", "1", "--A", "2,3", "--S", "4"}).code, 2);
  EXPECT_EQ(run({"compose", "--f", "u1*u2", "--g", "x1+x3", "--P", "1", "--A", "2,3", "--S", "4"}).code, 2);
  EXPECT_EQ(run({"compose", "--f", "u1*u2", "--P", "1", "--A", "2,3"}).code, 2);
}

TEST(CliScan, ParallelWeb) {
  const auto r = run({"scan", "--expr", "x1+x2+x3+x4", "--n", "4", "--output", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["reports"].size(), 22u);
  EXPECT_EQ(j["reducible_count"], 22);
}

TEST(CliScan, GenericWeb) {
  const auto r = run({"scan", "--expr", "exp(x1)+exp(x2)+exp(x3)+exp(x4)+x1*x2*x3*x4", "--n", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0 of 22 partitions reducible"), std::string::npos) << r.out;
}
