#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wssp/dist.hpp"
#include "wssp/dp.hpp"
#include "wssp/rng.hpp"

namespace wssp {

// What an online policy is told at the start of a round. It carries no score
// distribution; the full-information policy receives one at construction.
struct RoundSetup {
  int n = 1;
  int b = 1;
  int r = 1;
  std::vector<double> preselection;  // decreasing

  static RoundSetup from(const WsspInstance& instance) {
    return {instance.n, instance.b, instance.r, instance.preselection};
  }
};

class CapacityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Live counters before candidate j is interviewed. `empty` is X (empty
// positions), `held` is Y (positions still held by preselected employees).
// retained[i] flags the i-th best preselected employee; flags only go 1 -> 0,
// worst first.
struct SelectionState {
  int j = 1;
  int empty = 0;
  int held = 0;
  std::vector<std::uint8_t> retained;
  std::vector<std::uint8_t> decisions;
  std::vector<double> hires;

  static SelectionState start(int b, int r);

  bool has_capacity() const { return empty > 0 || held > 0; }
  // Every remaining candidate is needed to fill the empty positions.
  bool forced(int n) const { return empty > 0 && empty >= n - j + 1; }
};

// Records the decision for candidate j and moves to j+1. An accepted
// candidate fills an empty position or replaces the worst retained
// preselected employee, following `route` when both are possible.
// Throws CapacityError when accepting with no capacity.
SelectionState apply_decision(SelectionState state, bool accept, double score,
                              AcceptRoute route = AcceptRoute::fill_empty);

// Scores seen so far in the current round, preselection included.
class RankMemory {
 public:
  RankMemory() = default;
  explicit RankMemory(std::span<const double> initial);

  void insert(double score);
  // 1 + number of stored scores strictly larger than `score`.
  int relative_rank(double score) const;
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;  // ascending
};

bool ccmdp_decide(const SelectionState& state, double score, const ValueTable& table);

// Decides with the relative rank of `score` against `memory`, then stores it.
bool ccmdp_rank_decide(const SelectionState& state, double score, RankMemory& memory,
                       const RankValueTable& table);

// Fits the estimator and thresholds on a freshly built table when it can,
// falls back to the rank rule otherwise. The score is recorded in both the
// estimator and the rank memory afterwards.
bool ccmdp_partial_decide(const SelectionState& state, double score, const RoundSetup& setup,
                          DistributionEstimator& estimator, RankMemory& memory,
                          const RankValueTable& rank_table);

// Hire above the mean of the current employees (strict).
bool mean_decide(const SelectionState& state, double score, std::span<const double> employees,
                 int n);

// Cutoff rule: the first `c` candidates are rejected and recorded in
// `learned`; afterwards a candidate must beat the k-th best learned score,
// k = max(1, round(b c / n)).
bool ccm_decide(const SelectionState& state, double score, int c, std::vector<double>& learned,
                int n, int b);

// Accepts with probability b/n.
bool rand_decide(const SelectionState& state, Rng& rng, int n, int b);

enum class PolicyKind { ccmdp, ccmdp_partial, ccmdp_rank, mean, ccm, ccm_star, rand };

struct PolicySpec {
  PolicyKind kind = PolicyKind::ccmdp;
  int c = 0;  // learning-phase length, ccm only
  std::string label;

  // Accepts `ccmdp`, `ccmdp-partial`, `ccmdp-rank`, `mean`, `ccm:c=<int>`,
  // `ccm-star` and `rand`.
  static PolicySpec parse(std::string_view text);
  static const char* grammar();
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_round(const RoundSetup& setup) = 0;
  // Called once per candidate, in arrival order; may update internal state.
  virtual bool decide(const SelectionState& state, double score) = 0;
  virtual AcceptRoute route(const SelectionState& state) const;
};

class CcmdpPolicy : public Policy {
 public:
  explicit CcmdpPolicy(ScoreDistribution dist) : dist_(std::move(dist)) {}
  void begin_round(const RoundSetup& setup) override;
  bool decide(const SelectionState& state, double score) override;
  AcceptRoute route(const SelectionState& state) const override;
  const ValueTable& table() const { return *table_; }

 private:
  ScoreDistribution dist_;
  std::optional<ValueTable> table_;
};

// Knows the family only. The estimator lives as long as the policy, so it
// keeps learning across rounds.
class PartialPolicy : public Policy {
 public:
  explicit PartialPolicy(DistShape shape, RankPopulation population = RankPopulation::shifted)
      : estimator_(shape), population_(population) {}
  void begin_round(const RoundSetup& setup) override;
  bool decide(const SelectionState& state, double score) override;
  const DistributionEstimator& estimator() const { return estimator_; }

 private:
  DistributionEstimator estimator_;
  RankPopulation population_;
  bool seeded_ = false;
  RoundSetup setup_;
  RankMemory memory_;
  std::optional<RankValueTable> rank_table_;
};

class RankPolicy : public Policy {
 public:
  explicit RankPolicy(RankPopulation population = RankPopulation::shifted)
      : population_(population) {}
  void begin_round(const RoundSetup& setup) override;
  bool decide(const SelectionState& state, double score) override;

 private:
  RankPopulation population_;
  RankMemory memory_;
  std::optional<RankValueTable> table_;
};

class MeanPolicy : public Policy {
 public:
  void begin_round(const RoundSetup& setup) override { setup_ = setup; }
  bool decide(const SelectionState& state, double score) override;

 private:
  RoundSetup setup_;
};

class CcmPolicy : public Policy {
 public:
  explicit CcmPolicy(int c) : c_(c) {}
  void begin_round(const RoundSetup& setup) override;
  bool decide(const SelectionState& state, double score) override;

 private:
  int c_;
  RoundSetup setup_;
  std::vector<double> learned_;
};

class RandPolicy : public Policy {
 public:
  explicit RandPolicy(std::uint64_t seed) : rng_(seed) {}
  void begin_round(const RoundSetup& setup) override { setup_ = setup; }
  bool decide(const SelectionState& state, double score) override;

 private:
  Rng rng_;
  RoundSetup setup_;
};

// `truth` is consulted only for kinds allowed to know it: the full
// distribution for ccmdp, the family for ccmdp-partial. ccm-star must be
// resolved to a concrete ccm spec first.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ScoreDistribution& truth,
                                    std::uint64_t seed,
                                    RankPopulation population = RankPopulation::shifted);

}  // namespace wssp
