#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wssp/dist.hpp"
#include "wssp/dp.hpp"
#include "wssp/policy.hpp"

namespace wssp {

struct RoundResult {
  std::vector<std::uint8_t> decisions;  // one per candidate
  std::vector<std::uint8_t> retained;   // one per preselected employee
  double reward = 0.0;
  double offline = 0.0;
  double regret = 0.0;
  std::vector<double> selection;  // the b scores holding a position at the end
};

// Retained preselection plus accepted candidates.
double round_reward(std::span<const double> preselection, std::span<const std::uint8_t> retained,
                    std::span<const double> stream, std::span<const std::uint8_t> decisions);

// Runs one round of `policy` over `stream` (length n). Throws CapacityError
// if the policy accepts without capacity and std::logic_error if positions
// are still empty after the last candidate.
RoundResult run_round(const WsspInstance& instance, std::span<const double> stream,
                      Policy& policy);

// Best total score of b individuals from preselection and candidates with at
// least r of them candidates. Throws std::invalid_argument when fewer than r
// candidates (or fewer than b individuals) are available.
double offline_reward(std::span<const double> preselection, std::span<const double> candidates,
                      int b, int r);

struct MsspConfig {
  int rounds = 10;
  int population = 10000;
  int n = 100;
  int b = 5;
  int r = 0;
  ScoreDistribution dist = ScoreDistribution::uniform(0.0, 1.0);
  std::vector<PolicySpec> policies;
  int replicates = 500;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  int pilot_replicates = 50;
  RankPopulation rank_population = RankPopulation::shifted;

  void validate() const;
};

struct RoundStats {
  double mean = 0.0;
  double std = 0.0;  // population convention (divide by m)
  double stderr_ = 0.0;
  int replicates = 0;
};

// Mean, standard deviation and standard error, accumulated in input order.
RoundStats aggregate(std::span<const double> values);

struct PolicyReport {
  PolicySpec spec;
  int learning_phase = -1;  // resolved c for ccm / ccm-star, -1 otherwise
  std::vector<RoundStats> rounds;
};

struct MsspReport {
  MsspConfig config;
  std::string generator = Rng::kGeneratorId;
  std::vector<PolicyReport> policies;
};

// Per-round trace of one replicate of one (resolved) policy.
struct ReplicateTrace {
  std::vector<double> regret;
  std::vector<double> reward;
  std::vector<double> offline;
  std::vector<double> selection_sum;
};

// Replicate streams are seeded from seed ^ replicate. Population, initial
// preselection, resignations and candidate draws do not depend on the
// policy.
ReplicateTrace run_replicate(const MsspConfig& config, const PolicySpec& resolved,
                             std::uint64_t seed, int replicate);

// Picks c in {5, 10, ..., 50} (capped at n) minimising mean regret over
// config.pilot_replicates pilot replicates.
int select_learning_phase(const MsspConfig& config);

MsspReport run_mssp(const MsspConfig& config);

// `policy,round,mean_regret,std,stderr,replicates` rows, 6 decimals.
void write_report_csv(const MsspReport& report, std::ostream& out);

// Fixed-point with 6 decimals; "inf"/"-inf" for infinities, no negative zero.
std::string format_fixed6(double value);

}  // namespace wssp
