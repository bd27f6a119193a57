#include <doctest.h>

#include <numeric>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "wssp/sim.hpp"

using wssp::ScoreDistribution;
using wssp::WsspInstance;

TEST_CASE("run_round on the worked example prefix") {
  const auto inst = WsspInstance::make(14, 3, 2, {0.682}, ScoreDistribution::uniform(0.0, 1.0));
  std::vector<double> stream{0.498, 0.858, 0.749, 0.398};
  for (int i = 0; i < 10; ++i) stream.push_back(0.05 * i);
  wssp::CcmdpPolicy policy(inst.dist);
  const auto result = wssp::run_round(inst, stream, policy);
  CHECK(result.decisions[0] == 0);
  CHECK(result.decisions[1] == 1);
  CHECK(result.decisions[2] == 0);
  CHECK(result.selection.size() == 3);
  CHECK(result.regret >= 0.0);
}

TEST_CASE("run_round with every candidate forced") {
  const auto inst = WsspInstance::make(3, 3, 3, {}, ScoreDistribution::uniform(0.0, 1.0));
  const std::vector<double> stream{0.2, 0.1, 0.7};
  wssp::CcmdpPolicy policy(inst.dist);
  const auto result = wssp::run_round(inst, stream, policy);
  CHECK(result.decisions == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(result.reward == doctest::Approx(1.0));
  CHECK(result.regret == doctest::Approx(0.0));
}

TEST_CASE("run_round against a hand backward induction") {
  // b=1, r=0, S = 0.8, U(0,1): T3 = 0.8, T2 = 0.82, T1 = (1 + 0.82^2)/2 = 0.8362.
  const auto inst = WsspInstance::make(3, 1, 0, {0.8}, ScoreDistribution::uniform(0.0, 1.0));
  wssp::CcmdpPolicy policy(inst.dist);

  auto low = wssp::run_round(inst, std::vector<double>{0.5, 0.6, 0.7}, policy);
  CHECK(low.decisions == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(low.retained == std::vector<std::uint8_t>{1});
  CHECK(low.reward == doctest::Approx(0.8));
  CHECK(low.regret == doctest::Approx(0.0));

  auto mid = wssp::run_round(inst, std::vector<double>{0.83, 0.83, 0.9}, policy);
  CHECK(mid.decisions == std::vector<std::uint8_t>{0, 1, 0});
  CHECK(mid.retained == std::vector<std::uint8_t>{0});
  CHECK(mid.reward == doctest::Approx(0.83));
  CHECK(mid.regret == doctest::Approx(0.07));

  CHECK_THROWS_AS(wssp::run_round(inst, std::vector<double>{0.5}, policy), std::invalid_argument);
}

TEST_CASE("offline reward") {
  CHECK(wssp::offline_reward(std::vector<double>{0.9, 0.2}, std::vector<double>{0.5, 0.8, 0.1}, 3,
                             1) == doctest::Approx(2.2));
  CHECK(wssp::offline_reward(std::vector<double>{0.9, 0.7}, std::vector<double>{0.1, 0.3}, 2, 0) ==
        doctest::Approx(1.6));
  CHECK(wssp::offline_reward(std::vector<double>{}, std::vector<double>{0.4, 0.1, 0.9}, 2, 2) ==
        doctest::Approx(1.3));
  // Forced hire displaces the worst preselected employee.
  CHECK(wssp::offline_reward(std::vector<double>{0.9, 0.7}, std::vector<double>{0.1}, 2, 1) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(wssp::offline_reward(std::vector<double>{0.9}, std::vector<double>{0.1}, 3, 2),
                  std::invalid_argument);
}

TEST_CASE("offline reward matches exhaustive enumeration") {
  wssp::Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = gen::uniform_int(rng, 1, 8);
    const int b = gen::uniform_int(rng, 1, std::min(n, 4));
    const int r = gen::uniform_int(rng, 0, b);
    std::vector<double> pre;
    std::vector<double> cand;
    for (int i = 0; i < b - r; ++i) pre.push_back(std::round(rng.uniform01() * 20) / 20);
    for (int i = 0; i < n; ++i) cand.push_back(std::round(rng.uniform01() * 20) / 20);
    CHECK(wssp::offline_reward(pre, cand, b, r) ==
          doctest::Approx(oracle::exhaustive_offline(pre, cand, b, r)).epsilon(1e-12));
  }
}

TEST_CASE("aggregate") {
  const std::vector<double> two{1.0, 3.0};
  const auto s = wssp::aggregate(two);
  CHECK(s.mean == 2.0);
  CHECK(s.std == 1.0);
  CHECK(s.stderr_ == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(s.replicates == 2);
  const std::vector<double> one{4.2};
  CHECK(wssp::aggregate(one).std == 0.0);
  const std::vector<double> a{0.5, 0.25, 2.0, 1.0};
  const std::vector<double> b{2.0, 1.0, 0.5, 0.25};
  CHECK(wssp::aggregate(a).mean == doctest::Approx(wssp::aggregate(b).mean));
  CHECK(wssp::aggregate(a).std == doctest::Approx(wssp::aggregate(b).std));
  CHECK_THROWS_AS(wssp::aggregate(std::vector<double>{}), std::invalid_argument);
}

namespace {

wssp::MsspConfig small_config() {
  wssp::MsspConfig c;
  c.rounds = 4;
  c.population = 300;
  c.n = 20;
  c.b = 3;
  c.r = 1;
  c.replicates = 12;
  c.pilot_replicates = 4;
  c.seed = 2024;
  c.threads = 2;
  return c;
}

std::string csv_of(const wssp::MsspConfig& c) {
  std::ostringstream out;
  wssp::write_report_csv(wssp::run_mssp(c), out);
  return out.str();
}

}  // namespace

TEST_CASE("mssp report structure and determinism") {
  auto c = small_config();
  for (const char* p : {"ccmdp", "ccmdp-partial", "ccmdp-rank", "mean", "ccm:c=5", "ccm-star", "rand"}) {
    c.policies.push_back(wssp::PolicySpec::parse(p));
  }
  const auto report = wssp::run_mssp(c);
  REQUIRE(report.policies.size() == 7);
  for (const auto& p : report.policies) {
    CHECK(p.rounds.size() == 4);
    for (const auto& s : p.rounds) {
      CHECK(s.replicates == 12);
      CHECK(s.mean >= 0.0);
    }
  }
  CHECK(report.policies[5].learning_phase >= 5);
  CHECK(report.policies[5].learning_phase <= 20);

  const std::string first = csv_of(c);
  CHECK(first == csv_of(c));
  auto serial = c;
  serial.threads = 1;
  CHECK(first == csv_of(serial));
  CHECK(first.rfind("policy,round,mean_regret,std,stderr,replicates\n", 0) == 0);

  auto single = small_config();
  single.rounds = 1;
  single.r = single.b;
  single.policies = {wssp::PolicySpec::parse("ccmdp")};
  const std::string one = csv_of(single);
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
}

TEST_CASE("replicates keep the budget and never show negative regret") {
  auto c = small_config();
  for (const char* p : {"ccmdp", "ccmdp-partial", "ccmdp-rank", "mean", "ccm:c=5", "rand"}) {
    const auto spec = wssp::PolicySpec::parse(p);
    for (int rep = 0; rep < 5; ++rep) {
      const auto trace = wssp::run_replicate(c, spec, c.seed, rep);
      REQUIRE(trace.regret.size() == 4);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(trace.regret[k] >= 0.0);
        CHECK(trace.reward[k] <= trace.offline[k] + 1e-12);
      }
    }
  }
}

TEST_CASE("without resignations ccmdp only upgrades the selection") {
  auto c = small_config();
  c.r = 0;
  c.rounds = 6;
  const auto spec = wssp::PolicySpec::parse("ccmdp");
  for (int rep = 0; rep < 10; ++rep) {
    const auto trace = wssp::run_replicate(c, spec, 9, rep);
    for (std::size_t k = 1; k < trace.selection_sum.size(); ++k) {
      CHECK(trace.selection_sum[k] >= trace.selection_sum[k - 1] - 1e-12);
    }
  }
}

TEST_CASE("configuration validation") {
  auto c = small_config();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);  // no policies
  c.policies = {wssp::PolicySpec::parse("ccm:c=25")};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.policies = {wssp::PolicySpec::parse("ccmdp")};
  CHECK_NOTHROW(c.validate());
  c.population = 10;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("fixed six-decimal formatting") {
  CHECK(wssp::format_fixed6(0.1234564) == "0.123456");
  CHECK(wssp::format_fixed6(-1e-9) == "0.000000");
  CHECK(wssp::format_fixed6(std::numeric_limits<double>::infinity()) == "inf");
}
