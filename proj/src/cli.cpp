#include "wssp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "wssp/dist.hpp"
#include "wssp/dp.hpp"
#include "wssp/policy.hpp"
#include "wssp/sim.hpp"

namespace wssp {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_score_list(const std::string& text) {
  std::vector<double> scores;
  if (text.empty()) return scores;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(value)) {
      throw UsageError("--preselection: bad score '" + item + "'");
    }
    scores.push_back(value);
  }
  return scores;
}

void check_dimensions(int n, int b, int r) {
  if (n < 1) throw UsageError("--n: need n >= 1");
  if (b < 1 || b > n) throw UsageError("--b: need 1 <= b <= n");
  if (r < 0 || r > b) throw UsageError("--r: need 0 <= r <= b");
}

ScoreDistribution parse_dist_flag(const std::string& text) {
  try {
    return ScoreDistribution::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--dist: ") + e.what());
  }
}

// Writes to the named file, or to `out` when the name is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("--out: cannot open '" + path + "' for writing");
  file << text;
}

struct SolveOptions {
  std::string dist;
  int n = 0;
  int b = 0;
  int r = 0;
  std::string preselection;
  bool rank = false;
  bool literal_rank = false;
  bool closed_form = false;
  std::string out;
};

template <typename Table>
std::string table_csv(const Table& table, int n, int r, int held_max) {
  std::ostringstream csv;
  csv << "j,X,Y,V,T\n";
  for (int j = 1; j <= n + 1; ++j) {
    for (int x = 0; x <= r; ++x) {
      for (int y = 0; y <= held_max; ++y) {
        csv << j << ',' << x << ',' << y << ',' << format_fixed6(table.value(j, x, y)) << ',';
        if (j <= n) csv << format_fixed6(table.threshold(j, x, y));
        csv << '\n';
      }
    }
  }
  return csv.str();
}

int solve_command(const SolveOptions& opt, std::ostream& out) {
  check_dimensions(opt.n, opt.b, opt.r);
  if (opt.rank) {
    const auto table = build_rank_value_table(
        opt.n, opt.b, opt.r,
        opt.literal_rank ? RankPopulation::literal : RankPopulation::shifted);
    emit(opt.out, table_csv(table, opt.n, opt.r, opt.b - opt.r), out);
    return kExitOk;
  }
  if (opt.dist.empty()) throw UsageError("--dist: required unless --rank is given");
  ScoreDistribution dist = parse_dist_flag(opt.dist);
  std::vector<double> pre = parse_score_list(opt.preselection);
  if (static_cast<int>(pre.size()) != opt.b - opt.r) {
    throw UsageError("--preselection: expected b-r=" + std::to_string(opt.b - opt.r) +
                     " scores, got " + std::to_string(pre.size()));
  }
  WsspInstance instance;
  try {
    instance = WsspInstance::make(opt.n, opt.b, opt.r, std::move(pre), std::move(dist));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--preselection: ") + e.what());
  }
  if (opt.closed_form && instance.dist.kind() != DistKind::uniform) {
    throw UsageError("--closed-form: only available for uniform distributions");
  }
  const ValueTable table = build_value_table(
      instance, opt.closed_form ? Recurrence::uniform_closed_form : Recurrence::generic);
  emit(opt.out, table_csv(table, opt.n, opt.r, opt.b - opt.r), out);
  return kExitOk;
}

struct SimulateOptions {
  int rounds = 10;
  int population = 10000;
  int n = 100;
  int b = 5;
  int r = 0;
  std::string dist;
  std::vector<std::string> policies;
  int replicates = 500;
  std::uint64_t seed = 1;
  int threads = 0;
  int pilot_replicates = 50;
  bool literal_rank = false;
  std::string out;
  std::string meta;
};

int simulate_command(const SimulateOptions& opt, std::ostream& out) {
  check_dimensions(opt.n, opt.b, opt.r);
  if (opt.rounds < 1) throw UsageError("--rounds: need at least 1");
  if (opt.replicates < 1) throw UsageError("--replicates: need at least 1");
  if (opt.pilot_replicates < 1) throw UsageError("--pilot-replicates: need at least 1");
  if (opt.population < opt.n + opt.b) throw UsageError("--population: need at least n + b");
  if (opt.threads < 0) throw UsageError("--threads: must be non-negative");

  MsspConfig config;
  config.rounds = opt.rounds;
  config.population = opt.population;
  config.n = opt.n;
  config.b = opt.b;
  config.r = opt.r;
  config.dist = parse_dist_flag(opt.dist);
  config.replicates = opt.replicates;
  config.seed = opt.seed;
  config.threads = opt.threads;
  config.pilot_replicates = opt.pilot_replicates;
  config.rank_population = opt.literal_rank ? RankPopulation::literal : RankPopulation::shifted;
  for (const std::string& text : opt.policies) {
    try {
      config.policies.push_back(PolicySpec::parse(text));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--policy: ") + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const MsspReport report = run_mssp(config);
  std::ostringstream csv;
  write_report_csv(report, csv);

  std::string meta_text;
  if (!opt.meta.empty()) {
    nlohmann::ordered_json meta;
    meta["rounds"] = config.rounds;
    meta["population"] = config.population;
    meta["n"] = config.n;
    meta["b"] = config.b;
    meta["r"] = config.r;
    meta["dist"] = config.dist.to_string();
    meta["replicates"] = config.replicates;
    meta["seed"] = config.seed;
    meta["pilot_replicates"] = config.pilot_replicates;
    meta["rank_population"] = opt.literal_rank ? "n+b" : "n+b-r";
    meta["generator"] = report.generator;
    auto& policies = meta["policies"] = nlohmann::ordered_json::array();
    for (const PolicyReport& p : report.policies) {
      nlohmann::ordered_json entry;
      entry["label"] = p.spec.label;
      if (p.learning_phase >= 0) entry["learning_phase"] = p.learning_phase;
      policies.push_back(entry);
    }
    meta_text = meta.dump(2) + "\n";
  }
  emit(opt.out, csv.str(), out);
  if (!opt.meta.empty()) {
    std::ofstream file(opt.meta, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError("--meta: cannot open '" + opt.meta + "' for writing");
    file << meta_text;
  }
  return kExitOk;
}

// Published reference grid (uniform(0,1), n=14, b=3, r=2, preselection 0.682),
// rows keyed by (X, Y), columns j = 1..14.
struct PublishedRow {
  int empty;
  int held;
  std::array<double, 14> values;
};

constexpr std::array<PublishedRow, 5> kPublishedGrid = {{
    {1, 0, {0.893, 0.886, 0.879, 0.871, 0.861, 0.850, 0.836, 0.823, 0.800, 0.775, 0.741, 0.768,
            0.732, 0.682}},
    {2, 0, {1.719, 1.702, 1.683, 1.661, 1.636, 1.606, 1.571, 1.529, 1.476, 1.409, 1.320, 1.195,
            1.000, 0.000}},
    {0, 1, {0.907, 0.902, 0.897, 0.891, 0.885, 0.877, 0.869, 0.859, 0.847, 0.833, 0.816, 0.795,
            0.979, 0.979}},
    {1, 1, {1.756, 1.742, 1.729, 1.712, 1.694, 1.673, 1.650, 1.621, 1.588, 1.547, 1.495, 1.428,
            1.333, 1.182}},
    {2, 1, {2.547, 2.523, 2.496, 2.465, 2.431, 2.391, 2.345, 2.290, 2.224, 2.142, 2.036, 1.894,
            1.682, 0.000}},
}};

constexpr double kPublishedTolerance = 0.0015;

WsspInstance published_instance() {
  return WsspInstance::make(14, 3, 2, {0.682}, ScoreDistribution::uniform(0.0, 1.0));
}

bool is_single_slot_row(int empty, int held) {
  return (empty == 1 && held == 0) || (empty == 0 && held == 1);
}

// Single-slot value under U(0,1) by hand: v <- (1 + v^2) / 2 from the forced
// mean 0.5 at j = 14 (X=1, Y=0) or from the retained 0.682 at j = 15 (X=0, Y=1).
double hand_recursion(int empty, int held, int j) {
  double v = 0.0;
  int at = 0;
  if (empty == 1 && held == 0) {
    v = 0.5;
    at = 14;
  } else {
    v = 0.682;
    at = 15;
  }
  while (at > j) {
    v = 0.5 * (1.0 + v * v);
    --at;
  }
  return v;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

int repro_table(std::ostream& out) {
  const ValueTable table = build_value_table(published_instance());
  std::optional<std::string> first_failure;
  std::vector<std::string> errata;
  out << "Value grid V[j][X][Y], uniform(0,1), n=14, b=3, r=2, preselection (0.682)\n";
  out << "cell                computed  published  status\n";
  for (const PublishedRow& row : kPublishedGrid) {
    for (int j = 1; j <= 14; ++j) {
      const double computed = table.value(j, row.empty, row.held);
      const double published = row.values[static_cast<std::size_t>(j - 1)];
      std::string cell = "V[" + std::to_string(j) + "][" + std::to_string(row.empty) + "][" +
                         std::to_string(row.held) + "]";
      std::string status;
      const bool near_published = std::abs(computed - published) <= kPublishedTolerance;
      if (is_single_slot_row(row.empty, row.held)) {
        const double oracle = hand_recursion(row.empty, row.held, j);
        if (std::abs(oracle - computed) > 1e-9) {
          status = "MISMATCH vs hand recursion " + fmt4(oracle);
          if (!first_failure) first_failure = cell;
        } else if (near_published) {
          status = "ok";
        } else {
          status = "erratum (hand recursion " + fmt4(oracle) + " agrees)";
          errata.push_back(cell);
        }
      } else if (near_published) {
        status = "ok";
      } else {
        status = "MISMATCH";
        if (!first_failure) first_failure = cell;
      }
      char line[128];
      std::snprintf(line, sizeof line, "%-18s  %8.4f  %9.3f  ", cell.c_str(), computed, published);
      out << line << status << '\n';
    }
  }
  out << "erratum cells (" << errata.size() << "):";
  for (const auto& c : errata) out << ' ' << c;
  out << '\n';
  if (first_failure) {
    out << "FAILED: first mismatched cell " << *first_failure << '\n';
    return kExitCheckFailed;
  }
  out << "all anchored cells agree within " << kPublishedTolerance << '\n';
  return kExitOk;
}

int repro_example(std::ostream& out) {
  const ValueTable table = build_value_table(published_instance());
  constexpr std::array<double, 4> scores = {0.498, 0.858, 0.749, 0.398};
  // Published thresholds and decisions for the first three candidates.
  constexpr std::array<double, 3> published_threshold = {0.781, 0.767, 0.832};
  constexpr std::array<bool, 3> published_accept = {false, true, false};

  std::optional<std::string> failure;
  SelectionState state = SelectionState::start(3, 2);
  out << "j  X  Y  score   threshold  published  decision\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int j = state.j;
    const double threshold = table.threshold(j, state.empty, state.held);
    const bool accept = ccmdp_decide(state, scores[i], table);
    char line[160];
    std::snprintf(line, sizeof line, "%-2d %-2d %-2d %.3f   %.4f     ", j, state.empty, state.held,
                  scores[i], threshold);
    out << line;
    if (i < published_threshold.size()) {
      const double pub = published_threshold[i];
      out << fmt4(pub) << "     " << (accept ? "accept" : "reject");
      if (accept != published_accept[i]) {
        out << "  MISMATCH (decision)";
        if (!failure) failure = "decision for candidate " + std::to_string(j);
      } else if (std::abs(threshold - pub) <= kPublishedTolerance) {
        out << "  ok";
      } else {
        // The published value for candidate 3 is read off the j=3 column
        // instead of j+1; accept it only if that explains it.
        const double shifted = table.value(j, state.empty, state.held) -
                               std::max(table.value(j, state.empty - 1, state.held),
                                        table.value(j, state.empty, state.held - 1));
        if (std::abs(shifted - pub) <= kPublishedTolerance) {
          out << "  erratum (published value uses column j=" << j << ": " << fmt4(shifted) << ")";
        } else {
          out << "  MISMATCH (threshold)";
          if (!failure) failure = "threshold for candidate " + std::to_string(j);
        }
      }
    } else {
      out << "  -         " << (accept ? "accept" : "reject");
    }
    out << '\n';
    const AcceptRoute route = table.accept_route(j, state.empty, state.held);
    state = apply_decision(std::move(state), accept, scores[i], route);
  }
  if (failure) {
    out << "FAILED: " << *failure << '\n';
    return kExitCheckFailed;
  }
  out << "trace agrees with the published example\n";
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Warm-starting sequential selection: value tables, thresholds, simulations", "wssp"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Export the value/threshold table as CSV");
  solve_cmd->add_option("--dist", solve.dist, "uniform:<a>,<b> | exp:<rate> | discrete:<v>:<p>,...");
  solve_cmd->add_option("--n", solve.n, "Number of candidates")->required();
  solve_cmd->add_option("--b", solve.b, "Number of positions")->required();
  solve_cmd->add_option("--r", solve.r, "Positions initially empty")->required();
  solve_cmd->add_option("--preselection", solve.preselection,
                        "Comma-separated scores of the b-r preselected employees");
  solve_cmd->add_flag("--rank", solve.rank, "Emit the rank-based (no-information) table");
  solve_cmd->add_flag("--literal-rank-denominator", solve.literal_rank,
                      "Use n+b instead of n+b-r as the rank population");
  solve_cmd->add_flag("--closed-form", solve.closed_form,
                      "Use the uniform closed-form recurrence");
  solve_cmd->add_option("--out", solve.out, "Output CSV path (default: stdout)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the multi-round simulation");
  sim_cmd->add_option("--rounds", sim.rounds, "Rounds K")->capture_default_str();
  sim_cmd->add_option("--population", sim.population, "Population size N")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Interviews per round")->capture_default_str();
  sim_cmd->add_option("--b", sim.b, "Positions")->capture_default_str();
  sim_cmd->add_option("--r", sim.r, "Resignations per round")->capture_default_str();
  sim_cmd->add_option("--dist", sim.dist, "Score distribution")->required();
  sim_cmd->add_option("--policy", sim.policies, PolicySpec::grammar())->required();
  sim_cmd->add_option("--replicates", sim.replicates, "Replicates")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0: all cores)")
      ->capture_default_str();
  sim_cmd->add_option("--pilot-replicates", sim.pilot_replicates,
                      "Replicates used to tune ccm-star")
      ->capture_default_str();
  sim_cmd->add_flag("--literal-rank-denominator", sim.literal_rank,
                    "Use n+b instead of n+b-r as the rank population");
  sim_cmd->add_option("--out", sim.out, "Report CSV path (default: stdout)");
  sim_cmd->add_option("--meta", sim.meta, "Optional JSON metadata path");

  std::string target;
  auto* repro_cmd = app.add_subcommand("repro", "Check the published table or worked example");
  repro_cmd->add_option("target", target, "table1 | example")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return solve_command(solve, out);
    if (*sim_cmd) return simulate_command(sim, out);
    if (target == "table1") return repro_table(out);
    if (target == "example") return repro_example(out);
    err << "error: unknown repro target '" << target << "' (expected table1 or example)\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace wssp
