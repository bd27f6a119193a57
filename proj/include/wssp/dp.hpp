#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wssp/dist.hpp"

namespace wssp {

// One warm-starting selection round: n candidates, b positions of which r
// start empty, and b-r positions held by a preselection whose scores are
// kept sorted in decreasing order.
struct WsspInstance {
  int n = 1;
  int b = 1;
  int r = 1;
  std::vector<double> preselection;
  ScoreDistribution dist = ScoreDistribution::uniform(0.0, 1.0);

  // Sorts the preselection (descending) and validates; throws
  // std::invalid_argument on any violated constraint.
  static WsspInstance make(int n, int b, int r, std::vector<double> preselection,
                           ScoreDistribution dist);

  int preselected() const { return b - r; }
  void validate() const;
};

// Checks 1 <= b <= n and 0 <= r <= b.
void validate_dimensions(int n, int b, int r);

// Dense (j, X, Y) grid with j in [1, n+1], X in [0, r], Y in [0, b-r].
class StateGrid {
 public:
  StateGrid() = default;
  StateGrid(int n, int max_empty, int max_held, double fill);

  int n() const { return n_; }
  int max_empty() const { return max_empty_; }
  int max_held() const { return max_held_; }

  bool contains(int j, int empty, int held) const {
    return j >= 1 && j <= n_ + 1 && empty >= 0 && empty <= max_empty_ && held >= 0 &&
           held <= max_held_;
  }
  // Throws std::out_of_range outside the grid.
  double at(int j, int empty, int held) const;
  double& at(int j, int empty, int held);

 private:
  std::size_t index(int j, int empty, int held) const {
    return (static_cast<std::size_t>(j - 1) * (max_empty_ + 1) + empty) * (max_held_ + 1) +
           held;
  }
  void check(int j, int empty, int held) const;

  int n_ = 0;
  int max_empty_ = 0;
  int max_held_ = 0;
  std::vector<double> cells_;
};

enum class AcceptRoute { fill_empty, fire_preselected };

// Expected optimal future reward V[j][X][Y] (retained preselection included)
// for every state of one instance, plus the acceptance thresholds derived
// from it.
class ValueTable {
 public:
  ValueTable(WsspInstance instance, StateGrid values);

  const WsspInstance& instance() const { return instance_; }
  const StateGrid& grid() const { return values_; }
  double value(int j, int empty, int held) const { return values_.at(j, empty, held); }
  // Sum of the `held` best preselected scores.
  double prefix(int held) const { return prefix_.at(static_cast<std::size_t>(held)); }

  // Best continuation value after accepting candidate j in state (X, Y), or
  // -inf when there is no capacity left.
  double accept_value(int j, int empty, int held) const;
  // Score candidate j must strictly exceed in state (X, Y); +inf at X=Y=0.
  // Negative values mean any score is accepted (forced fills).
  double threshold(int j, int empty, int held) const;
  // The accept continuation achieving accept_value(); fill wins ties.
  AcceptRoute accept_route(int j, int empty, int held) const;

 private:
  WsspInstance instance_;
  StateGrid values_;
  std::vector<double> prefix_;
};

enum class Recurrence { generic, uniform_closed_form };

// One backward step: E[max(v_next, S + v_accept_best)] written as
// v_next + Z (F(Z) - 1) + E[S 1{S > Z}] with Z = v_next - v_accept_best.
// A v_accept_best of -inf means accepting is impossible and returns v_next.
double value_recurrence_step(double v_next, double v_accept_best,
                             const ScoreDistribution& dist);

// Same step specialised to U(lower, upper), with Z clamped to the support.
double uniform_recurrence_step(double v_next, double v_accept_best, double lower,
                               double upper);

// Backward induction over the whole grid. Layers j < first_layer are left at
// zero, which lets online learners rebuild only the remaining horizon.
ValueTable build_value_table(const WsspInstance& instance,
                             Recurrence method = Recurrence::generic, int first_layer = 1);

ValueTable build_value_table(const WsspInstance& instance, int first_layer);

// Population size used by the rank recurrence: n+b-r by default, or n+b.
enum class RankPopulation { shifted, literal };

// Expected sums of absolute ranks (1 = best) over the same state grid as
// ValueTable. Minimisation: lower is better; infeasible states are +inf.
class RankValueTable {
 public:
  RankValueTable(int n, int b, int r, int population, StateGrid values,
                 std::vector<double> prefix);

  int n() const { return n_; }
  int b() const { return b_; }
  int r() const { return r_; }
  int population() const { return population_; }
  const StateGrid& grid() const { return values_; }
  double value(int j, int empty, int held) const { return values_.at(j, empty, held); }
  double prefix(int held) const { return prefix_.at(static_cast<std::size_t>(held)); }

  // Best (smallest) continuation after accepting; +inf without capacity.
  double accept_value(int j, int empty, int held) const;
  // Absolute-rank threshold clamped into [0, M]; +inf at X=Y=0.
  double threshold(int j, int empty, int held) const;
  AcceptRoute accept_route(int j, int empty, int held) const;

 private:
  int n_, b_, r_, population_;
  StateGrid values_;
  std::vector<double> prefix_;
};

RankValueTable build_rank_value_table(int n, int b, int r,
                                      RankPopulation population = RankPopulation::shifted);

// Converts an absolute-rank threshold into the relative-rank threshold usable
// after j + b - r individuals have been seen.
double relative_rank_threshold(double absolute_threshold, int j, int n, int b, int r);

}  // namespace wssp
