#include "wssp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "wssp/rng.hpp"

namespace wssp {

namespace {

// Sub-stream tags within a replicate.
constexpr std::uint64_t kPopulationTag = 1;
constexpr std::uint64_t kPreselectionTag = 2;
constexpr std::uint64_t kPolicyTag = 3;
constexpr std::uint64_t kResignationTag = 0x100;
constexpr std::uint64_t kCandidateTag = 0x10000;
constexpr std::uint64_t kPilotTag = 0x9e3779b97f4a7c15ULL;

// Sorted views of a round's participants, by decreasing score.
struct Roster {
  std::vector<int> ids;
  std::vector<double> scores;
};

Roster sorted_roster(std::vector<int> ids, const std::vector<double>& population) {
  std::stable_sort(ids.begin(), ids.end(),
                   [&](int a, int b) { return population[a] > population[b]; });
  Roster out;
  out.ids = std::move(ids);
  for (int id : out.ids) out.scores.push_back(population[id]);
  return out;
}

}  // namespace

double round_reward(std::span<const double> preselection, std::span<const std::uint8_t> retained,
                    std::span<const double> stream, std::span<const std::uint8_t> decisions) {
  double total = 0.0;
  for (std::size_t i = 0; i < preselection.size(); ++i) {
    if (retained[i]) total += preselection[i];
  }
  for (std::size_t j = 0; j < stream.size(); ++j) {
    if (decisions[j]) total += stream[j];
  }
  return total;
}

RoundResult run_round(const WsspInstance& instance, std::span<const double> stream,
                      Policy& policy) {
  instance.validate();
  if (static_cast<int>(stream.size()) != instance.n) {
    throw std::invalid_argument("candidate stream must have n scores");
  }
  policy.begin_round(RoundSetup::from(instance));
  SelectionState state = SelectionState::start(instance.b, instance.r);
  for (double score : stream) {
    const bool accept = policy.decide(state, score);
    const AcceptRoute route = policy.route(state);
    state = apply_decision(std::move(state), accept, score, route);
  }
  if (state.empty != 0) {
    throw std::logic_error("policy left " + std::to_string(state.empty) +
                           " positions empty at the end of the round");
  }

  RoundResult result;
  result.decisions = std::move(state.decisions);
  result.retained = std::move(state.retained);
  result.reward = round_reward(instance.preselection, result.retained, stream, result.decisions);
  result.offline = offline_reward(instance.preselection, stream, instance.b, instance.r);
  result.regret = std::abs(result.offline - result.reward);
  for (std::size_t i = 0; i < instance.preselection.size(); ++i) {
    if (result.retained[i]) result.selection.push_back(instance.preselection[i]);
  }
  result.selection.insert(result.selection.end(), state.hires.begin(), state.hires.end());
  if (static_cast<int>(result.selection.size()) != instance.b) {
    throw std::logic_error("final selection does not fill the b positions");
  }
  return result;
}

double offline_reward(std::span<const double> preselection, std::span<const double> candidates,
                      int b, int r) {
  if (r < 0 || b < r) throw std::invalid_argument("need 0 <= r <= b");
  if (static_cast<int>(candidates.size()) < r) {
    throw std::invalid_argument("fewer candidates than positions that must be filled");
  }
  if (static_cast<int>(preselection.size() + candidates.size()) < b) {
    throw std::invalid_argument("fewer individuals than positions");
  }
  struct Entry {
    double score;
    bool candidate;
  };
  std::vector<Entry> merged;
  for (double s : preselection) merged.push_back({s, false});
  for (double s : candidates) merged.push_back({s, true});
  std::stable_sort(merged.begin(), merged.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<Entry> chosen(merged.begin(), merged.begin() + b);
  std::vector<double> spare;  // unused candidates, best first
  for (std::size_t i = static_cast<std::size_t>(b); i < merged.size(); ++i) {
    if (merged[i].candidate) spare.push_back(merged[i].score);
  }
  int hired = static_cast<int>(
      std::count_if(chosen.begin(), chosen.end(), [](const Entry& e) { return e.candidate; }));
  std::size_t next_spare = 0;
  // chosen is sorted, so the last preselected entry is the worst one.
  for (auto it = chosen.rbegin(); hired < r && it != chosen.rend(); ++it) {
    if (it->candidate) continue;
    *it = {spare.at(next_spare++), true};
    ++hired;
  }
  double total = 0.0;
  for (const Entry& e : chosen) total += e.score;
  return total;
}

void MsspConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  validate_dimensions(n, b, r);
  if (population < n + b) {
    throw std::invalid_argument("population must hold at least n + b individuals");
  }
  if (policies.empty()) throw std::invalid_argument("at least one policy is required");
  for (const PolicySpec& p : policies) {
    if (p.kind == PolicyKind::ccm && p.c > n) {
      throw std::invalid_argument("ccm learning phase must satisfy c <= n");
    }
    if (p.kind == PolicyKind::ccmdp_partial && dist.kind() == DistKind::discrete) {
      throw std::invalid_argument("ccmdp-partial needs a uniform or exponential family");
    }
  }
  if (pilot_replicates < 1) throw std::invalid_argument("pilot replicates must be at least 1");
}

RoundStats aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate needs at least one value");
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / m;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / m);
  return {mean, sd, sd / std::sqrt(m), static_cast<int>(values.size())};
}

ReplicateTrace run_replicate(const MsspConfig& config, const PolicySpec& resolved,
                             std::uint64_t seed, int replicate) {
  const std::uint64_t base = seed ^ static_cast<std::uint64_t>(replicate);
  const std::vector<double> population =
      sample_stream(config.dist, derive_seed(base, kPopulationTag),
                    static_cast<std::size_t>(config.population));
  const auto pop_size = static_cast<std::uint64_t>(config.population);
  std::vector<std::uint8_t> employed(population.size(), 0);

  std::vector<int> employees;
  {
    Rng rng(derive_seed(base, kPreselectionTag));
    while (static_cast<int>(employees.size()) < config.b - config.r) {
      const int id = static_cast<int>(rng.below(pop_size));
      if (employed[id]) continue;
      employed[id] = 1;
      employees.push_back(id);
    }
  }

  auto policy = make_policy(resolved, config.dist, derive_seed(base, kPolicyTag),
                            config.rank_population);
  ReplicateTrace trace;
  std::vector<std::uint8_t> drawn(population.size(), 0);
  for (int k = 1; k <= config.rounds; ++k) {
    if (k > 1 && config.r > 0) {
      // Resignations: r of the b employees, uniformly, picked from the
      // employees sorted by id.
      std::sort(employees.begin(), employees.end());
      Rng rng(derive_seed(base, kResignationTag + static_cast<std::uint64_t>(k)));
      for (int i = 0; i < config.r; ++i) {
        const auto remaining = static_cast<std::uint64_t>(employees.size() - i);
        const auto pick = static_cast<std::size_t>(i + rng.below(remaining));
        std::swap(employees[static_cast<std::size_t>(i)], employees[pick]);
      }
      for (int i = 0; i < config.r; ++i) employed[employees[i]] = 0;
      employees.erase(employees.begin(), employees.begin() + config.r);
    }

    std::vector<int> candidate_ids;
    candidate_ids.reserve(static_cast<std::size_t>(config.n));
    {
      Rng rng(derive_seed(base, kCandidateTag + static_cast<std::uint64_t>(k)));
      while (static_cast<int>(candidate_ids.size()) < config.n) {
        const int id = static_cast<int>(rng.below(pop_size));
        if (employed[id] || drawn[id]) continue;
        drawn[id] = 1;
        candidate_ids.push_back(id);
      }
      for (int id : candidate_ids) drawn[id] = 0;
    }
    std::vector<double> stream;
    stream.reserve(candidate_ids.size());
    for (int id : candidate_ids) stream.push_back(population[id]);

    const Roster pre = sorted_roster(employees, population);
    const WsspInstance instance{config.n, config.b, config.r, pre.scores, config.dist};
    const RoundResult result = run_round(instance, stream, *policy);

    std::vector<int> next;
    for (std::size_t i = 0; i < pre.ids.size(); ++i) {
      if (result.retained[i]) next.push_back(pre.ids[i]);
      else employed[pre.ids[i]] = 0;
    }
    for (std::size_t j = 0; j < candidate_ids.size(); ++j) {
      if (result.decisions[j]) {
        next.push_back(candidate_ids[j]);
        employed[candidate_ids[j]] = 1;
      }
    }
    employees = std::move(next);

    trace.regret.push_back(result.regret);
    trace.reward.push_back(result.reward);
    trace.offline.push_back(result.offline);
    trace.selection_sum.push_back(
        std::accumulate(result.selection.begin(), result.selection.end(), 0.0));
  }
  return trace;
}

namespace {

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::vector<double>> regret_matrix(const MsspConfig& config, const PolicySpec& spec,
                                               std::uint64_t seed, int replicates) {
  std::vector<std::vector<double>> regrets(static_cast<std::size_t>(replicates));
  parallel_for(replicates, config.threads, [&](int rep) {
    regrets[static_cast<std::size_t>(rep)] = run_replicate(config, spec, seed, rep).regret;
  });
  return regrets;
}

}  // namespace

int select_learning_phase(const MsspConfig& config) {
  std::vector<int> grid;
  for (int c = 5; c <= 50; c += 5) {
    if (c <= config.n) grid.push_back(c);
  }
  if (grid.empty()) grid.push_back(config.n / 2);
  const std::uint64_t pilot_seed = derive_seed(config.seed, kPilotTag);
  int best_c = grid.front();
  double best = std::numeric_limits<double>::infinity();
  for (int c : grid) {
    const PolicySpec spec{PolicyKind::ccm, c, "ccm:c=" + std::to_string(c)};
    const auto regrets = regret_matrix(config, spec, pilot_seed, config.pilot_replicates);
    double total = 0.0;
    for (const auto& per_round : regrets) {
      for (double v : per_round) total += v;
    }
    if (total < best) {
      best = total;
      best_c = c;
    }
  }
  return best_c;
}

MsspReport run_mssp(const MsspConfig& config) {
  config.validate();
  MsspReport report;
  report.config = config;
  for (const PolicySpec& spec : config.policies) {
    PolicySpec resolved = spec;
    PolicyReport entry;
    entry.spec = spec;
    if (spec.kind == PolicyKind::ccm_star) {
      resolved = {PolicyKind::ccm, select_learning_phase(config), spec.label};
    }
    if (resolved.kind == PolicyKind::ccm) entry.learning_phase = resolved.c;

    const auto regrets = regret_matrix(config, resolved, config.seed, config.replicates);
    std::vector<double> column(static_cast<std::size_t>(config.replicates));
    for (int k = 0; k < config.rounds; ++k) {
      for (int rep = 0; rep < config.replicates; ++rep) {
        column[static_cast<std::size_t>(rep)] =
            regrets[static_cast<std::size_t>(rep)][static_cast<std::size_t>(k)];
      }
      entry.rounds.push_back(aggregate(column));
    }
    report.policies.push_back(std::move(entry));
  }
  return report;
}

std::string format_fixed6(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (std::abs(value) < 5e-7) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_report_csv(const MsspReport& report, std::ostream& out) {
  out << "policy,round,mean_regret,std,stderr,replicates\n";
  for (const PolicyReport& p : report.policies) {
    for (std::size_t k = 0; k < p.rounds.size(); ++k) {
      const RoundStats& s = p.rounds[k];
      out << p.spec.label << ',' << (k + 1) << ',' << format_fixed6(s.mean) << ','
          << format_fixed6(s.std) << ',' << format_fixed6(s.stderr_) << ',' << s.replicates
          << '\n';
    }
  }
}

}  // namespace wssp
