#include "wssp/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace wssp {

SelectionState SelectionState::start(int b, int r) {
  SelectionState s;
  s.empty = r;
  s.held = b - r;
  s.retained.assign(static_cast<std::size_t>(b - r), 1);
  return s;
}

SelectionState apply_decision(SelectionState state, bool accept, double score,
                              AcceptRoute route) {
  if (accept) {
    if (!state.has_capacity()) {
      throw CapacityError("candidate " + std::to_string(state.j) +
                          " accepted with no position left");
    }
    const bool fill = state.empty > 0 &&
                      (state.held == 0 || route == AcceptRoute::fill_empty);
    if (fill) {
      --state.empty;
    } else {
      state.retained[static_cast<std::size_t>(state.held - 1)] = 0;
      --state.held;
    }
    state.hires.push_back(score);
  }
  state.decisions.push_back(accept ? 1 : 0);
  ++state.j;
  return state;
}

RankMemory::RankMemory(std::span<const double> initial) : sorted_(initial.begin(), initial.end()) {
  std::sort(sorted_.begin(), sorted_.end());
}

void RankMemory::insert(double score) {
  sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), score), score);
}

int RankMemory::relative_rank(double score) const {
  const auto larger = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), score);
  return 1 + static_cast<int>(larger);
}

bool ccmdp_decide(const SelectionState& state, double score, const ValueTable& table) {
  if (!state.has_capacity()) return false;
  if (state.forced(table.instance().n)) return true;
  return score > table.threshold(state.j, state.empty, state.held);
}

bool ccmdp_rank_decide(const SelectionState& state, double score, RankMemory& memory,
                       const RankValueTable& table) {
  bool accept = false;
  if (state.has_capacity()) {
    if (state.forced(table.n())) {
      accept = true;
    } else {
      const double tau = relative_rank_threshold(table.threshold(state.j, state.empty, state.held),
                                                 state.j, table.n(), table.b(), table.r());
      accept = memory.relative_rank(score) < tau;
    }
  }
  memory.insert(score);
  return accept;
}

bool ccmdp_partial_decide(const SelectionState& state, double score, const RoundSetup& setup,
                          DistributionEstimator& estimator, RankMemory& memory,
                          const RankValueTable& rank_table) {
  std::optional<bool> accept;
  if (!state.has_capacity()) {
    accept = false;
  } else if (state.forced(setup.n)) {
    accept = true;
  } else if (auto fitted = estimator.fit()) {
    try {
      const WsspInstance instance{setup.n, setup.b, setup.r, setup.preselection, *fitted};
      const ValueTable table = build_value_table(instance, state.j);
      accept = score > table.threshold(state.j, state.empty, state.held);
    } catch (const std::invalid_argument&) {
      // fitted support does not cover the preselection; use the rank rule
    }
  }
  if (!accept.has_value()) {
    // ccmdp_rank_decide stores the score itself.
    const bool by_rank = ccmdp_rank_decide(state, score, memory, rank_table);
    estimator.observe(score);
    return by_rank;
  }
  memory.insert(score);
  estimator.observe(score);
  return *accept;
}

bool mean_decide(const SelectionState& state, double score, std::span<const double> employees,
                 int n) {
  if (!state.has_capacity()) return false;
  if (state.forced(n) || employees.empty()) return true;
  const double avg = std::accumulate(employees.begin(), employees.end(), 0.0) /
                     static_cast<double>(employees.size());
  return score > avg;
}

bool ccm_decide(const SelectionState& state, double score, int c, std::vector<double>& learned,
                int n, int b) {
  if (state.j <= c) {
    learned.push_back(score);
    return state.forced(n);
  }
  if (!state.has_capacity()) return false;
  if (state.forced(n)) return true;
  const auto k = static_cast<std::size_t>(
      std::max<long>(1, std::lround(static_cast<double>(b) * c / static_cast<double>(n))));
  if (learned.size() < k) return false;
  std::vector<double> sorted = learned;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k - 1), sorted.end(),
                   std::greater<>());
  return score > sorted[k - 1];
}

bool rand_decide(const SelectionState& state, Rng& rng, int n, int b) {
  // The coin is drawn for every candidate, capacity or not.
  const bool coin = rng.bernoulli(static_cast<double>(b) / static_cast<double>(n));
  if (!state.has_capacity()) return false;
  if (state.forced(n)) return true;
  return coin;
}

PolicySpec PolicySpec::parse(std::string_view text) {
  const std::string label(text);
  if (text == "ccmdp") return {PolicyKind::ccmdp, 0, label};
  if (text == "ccmdp-partial") return {PolicyKind::ccmdp_partial, 0, label};
  if (text == "ccmdp-rank") return {PolicyKind::ccmdp_rank, 0, label};
  if (text == "mean") return {PolicyKind::mean, 0, label};
  if (text == "ccm-star") return {PolicyKind::ccm_star, 0, label};
  if (text == "rand") return {PolicyKind::rand, 0, label};
  constexpr std::string_view kCcm = "ccm:c=";
  if (text.starts_with(kCcm)) {
    const std::string_view digits = text.substr(kCcm.size());
    int c = -1;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), c);
    if (!digits.empty() && ec == std::errc() && ptr == digits.data() + digits.size() && c >= 0) {
      return {PolicyKind::ccm, c, label};
    }
  }
  throw std::invalid_argument("unknown policy '" + label + "'; valid policies: " + grammar());
}

const char* PolicySpec::grammar() {
  return "ccmdp, ccmdp-partial, ccmdp-rank, mean, ccm:c=<int>, ccm-star, rand";
}

AcceptRoute Policy::route(const SelectionState&) const { return AcceptRoute::fill_empty; }

void CcmdpPolicy::begin_round(const RoundSetup& setup) {
  table_.emplace(build_value_table(
      WsspInstance{setup.n, setup.b, setup.r, setup.preselection, dist_}));
}

bool CcmdpPolicy::decide(const SelectionState& state, double score) {
  return ccmdp_decide(state, score, *table_);
}

AcceptRoute CcmdpPolicy::route(const SelectionState& state) const {
  if (!state.has_capacity()) return AcceptRoute::fill_empty;
  return table_->accept_route(state.j, state.empty, state.held);
}

void PartialPolicy::begin_round(const RoundSetup& setup) {
  setup_ = setup;
  if (!seeded_) {
    for (double s : setup.preselection) estimator_.observe(s);
    seeded_ = true;
  }
  memory_ = RankMemory(setup.preselection);
  if (!rank_table_ || rank_table_->n() != setup.n || rank_table_->b() != setup.b ||
      rank_table_->r() != setup.r) {
    rank_table_.emplace(build_rank_value_table(setup.n, setup.b, setup.r, population_));
  }
}

bool PartialPolicy::decide(const SelectionState& state, double score) {
  return ccmdp_partial_decide(state, score, setup_, estimator_, memory_, *rank_table_);
}

void RankPolicy::begin_round(const RoundSetup& setup) {
  memory_ = RankMemory(setup.preselection);
  if (!table_ || table_->n() != setup.n || table_->b() != setup.b || table_->r() != setup.r) {
    table_.emplace(build_rank_value_table(setup.n, setup.b, setup.r, population_));
  }
}

bool RankPolicy::decide(const SelectionState& state, double score) {
  return ccmdp_rank_decide(state, score, memory_, *table_);
}

bool MeanPolicy::decide(const SelectionState& state, double score) {
  std::vector<double> employees = state.hires;
  for (std::size_t i = 0; i < state.retained.size(); ++i) {
    if (state.retained[i]) employees.push_back(setup_.preselection[i]);
  }
  return mean_decide(state, score, employees, setup_.n);
}

void CcmPolicy::begin_round(const RoundSetup& setup) {
  if (c_ > setup.n) throw std::invalid_argument("ccm learning phase longer than the round");
  setup_ = setup;
  learned_.clear();
}

bool CcmPolicy::decide(const SelectionState& state, double score) {
  return ccm_decide(state, score, c_, learned_, setup_.n, setup_.b);
}

bool RandPolicy::decide(const SelectionState& state, double) {
  return rand_decide(state, rng_, setup_.n, setup_.b);
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ScoreDistribution& truth,
                                    std::uint64_t seed, RankPopulation population) {
  switch (spec.kind) {
    case PolicyKind::ccmdp:
      return std::make_unique<CcmdpPolicy>(truth);
    case PolicyKind::ccmdp_partial:
      switch (truth.kind()) {
        case DistKind::uniform:
          return std::make_unique<PartialPolicy>(DistShape::uniform, population);
        case DistKind::exponential:
          return std::make_unique<PartialPolicy>(DistShape::exponential, population);
        case DistKind::discrete:
          break;
      }
      throw std::invalid_argument("ccmdp-partial needs a uniform or exponential family");
    case PolicyKind::ccmdp_rank:
      return std::make_unique<RankPolicy>(population);
    case PolicyKind::mean:
      return std::make_unique<MeanPolicy>();
    case PolicyKind::ccm:
      return std::make_unique<CcmPolicy>(spec.c);
    case PolicyKind::ccm_star:
      throw std::invalid_argument("ccm-star must be resolved to a learning-phase length first");
    case PolicyKind::rand:
      return std::make_unique<RandPolicy>(seed);
  }
  throw std::invalid_argument("unhandled policy kind");
}

}  // namespace wssp
