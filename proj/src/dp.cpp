#include "wssp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace wssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> running_sums(std::span<const double> values) {
  std::vector<double> sums(values.size() + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) sums[i + 1] = sums[i] + values[i];
  return sums;
}

}  // namespace

void validate_dimensions(int n, int b, int r) {
  if (b < 1 || b > n) {
    throw std::invalid_argument("need 1 <= b <= n (got b=" + std::to_string(b) +
                                ", n=" + std::to_string(n) + ")");
  }
  if (r < 0 || r > b) {
    throw std::invalid_argument("need 0 <= r <= b (got r=" + std::to_string(r) +
                                ", b=" + std::to_string(b) + ")");
  }
}

WsspInstance WsspInstance::make(int n, int b, int r, std::vector<double> preselection,
                                ScoreDistribution dist) {
  std::sort(preselection.begin(), preselection.end(), std::greater<>());
  WsspInstance inst{n, b, r, std::move(preselection), std::move(dist)};
  inst.validate();
  return inst;
}

void WsspInstance::validate() const {
  validate_dimensions(n, b, r);
  if (static_cast<int>(preselection.size()) != b - r) {
    throw std::invalid_argument("preselection must hold b-r=" + std::to_string(b - r) +
                                " scores (got " + std::to_string(preselection.size()) + ")");
  }
  if (!std::is_sorted(preselection.begin(), preselection.end(), std::greater<>())) {
    throw std::invalid_argument("preselection must be sorted in decreasing order");
  }
  for (double s : preselection) {
    if (!(s >= dist.lower() && s <= dist.upper())) {
      throw std::invalid_argument("preselection score " + std::to_string(s) +
                                  " lies outside the distribution support");
    }
  }
}

StateGrid::StateGrid(int n, int max_empty, int max_held, double fill)
    : n_(n),
      max_empty_(max_empty),
      max_held_(max_held),
      cells_(static_cast<std::size_t>(n + 1) * (max_empty + 1) * (max_held + 1), fill) {}

void StateGrid::check(int j, int empty, int held) const {
  if (!contains(j, empty, held)) {
    throw std::out_of_range("state (j=" + std::to_string(j) + ", X=" + std::to_string(empty) +
                            ", Y=" + std::to_string(held) + ") is outside the table");
  }
}

double StateGrid::at(int j, int empty, int held) const {
  check(j, empty, held);
  return cells_[index(j, empty, held)];
}

double& StateGrid::at(int j, int empty, int held) {
  check(j, empty, held);
  return cells_[index(j, empty, held)];
}

ValueTable::ValueTable(WsspInstance instance, StateGrid values)
    : instance_(std::move(instance)),
      values_(std::move(values)),
      prefix_(running_sums(instance_.preselection)) {}

double ValueTable::accept_value(int j, int empty, int held) const {
  double best = -kInf;
  if (empty > 0) best = values_.at(j + 1, empty - 1, held);
  if (held > 0) best = std::max(best, values_.at(j + 1, empty, held - 1));
  return best;
}

double ValueTable::threshold(int j, int empty, int held) const {
  if (j < 1 || j > instance_.n) throw std::out_of_range("candidate index out of range");
  if (empty == 0 && held == 0) return kInf;
  return values_.at(j + 1, empty, held) - accept_value(j, empty, held);
}

AcceptRoute ValueTable::accept_route(int j, int empty, int held) const {
  if (empty == 0) return AcceptRoute::fire_preselected;
  if (held == 0) return AcceptRoute::fill_empty;
  return values_.at(j + 1, empty - 1, held) >= values_.at(j + 1, empty, held - 1)
             ? AcceptRoute::fill_empty
             : AcceptRoute::fire_preselected;
}

double value_recurrence_step(double v_next, double v_accept_best,
                             const ScoreDistribution& dist) {
  if (v_accept_best == -kInf) return v_next;
  const double gap = v_next - v_accept_best;
  return v_next + gap * (dist.cdf(gap) - 1.0) + dist.upper_partial_expectation(gap);
}

double uniform_recurrence_step(double v_next, double v_accept_best, double lower,
                               double upper) {
  if (!(lower < upper)) throw std::invalid_argument("uniform step needs lower < upper");
  if (v_accept_best == -kInf) return v_next;
  const double raw_gap = v_next - v_accept_best;
  // Below the support every candidate is accepted.
  if (raw_gap < lower) return v_accept_best + 0.5 * (lower + upper);
  const double gap = std::min(raw_gap, upper);
  return v_next + (gap * gap - 2.0 * lower * gap + upper * upper) / (2.0 * (upper - lower)) -
         gap;
}

ValueTable build_value_table(const WsspInstance& instance, int first_layer) {
  return build_value_table(instance, Recurrence::generic, first_layer);
}

ValueTable build_value_table(const WsspInstance& instance, Recurrence method,
                             int first_layer) {
  instance.validate();
  if (method == Recurrence::uniform_closed_form &&
      instance.dist.kind() != DistKind::uniform) {
    throw std::invalid_argument("closed-form recurrence requires a uniform distribution");
  }
  const int n = instance.n;
  const int max_empty = instance.r;
  const int max_held = instance.preselected();
  const double mu = instance.dist.mean();
  const std::vector<double> prefix = running_sums(instance.preselection);

  StateGrid grid(n, max_empty, max_held, 0.0);
  for (int y = 0; y <= max_held; ++y) grid.at(n + 1, 0, y) = prefix[y];

  const int stop = std::max(first_layer, 1);
  for (int j = n; j >= stop; --j) {
    const int remaining = n - j + 1;
    for (int x = 0; x <= max_empty; ++x) {
      for (int y = 0; y <= max_held; ++y) {
        double& cell = grid.at(j, x, y);
        if (x > remaining || (x == 0 && y == 0)) {
          cell = 0.0;
          continue;
        }
        if (x == remaining) {
          cell = x * mu + prefix[y];
          continue;
        }
        const double v_next = grid.at(j + 1, x, y);
        double accept = -kInf;
        if (x > 0) accept = grid.at(j + 1, x - 1, y);
        if (y > 0) accept = std::max(accept, grid.at(j + 1, x, y - 1));
        cell = method == Recurrence::uniform_closed_form
                   ? uniform_recurrence_step(v_next, accept, instance.dist.lower(),
                                             instance.dist.upper())
                   : value_recurrence_step(v_next, accept, instance.dist);
      }
    }
  }
  return ValueTable(instance, std::move(grid));
}

RankValueTable::RankValueTable(int n, int b, int r, int population, StateGrid values,
                               std::vector<double> prefix)
    : n_(n),
      b_(b),
      r_(r),
      population_(population),
      values_(std::move(values)),
      prefix_(std::move(prefix)) {}

double RankValueTable::accept_value(int j, int empty, int held) const {
  double best = kInf;
  if (empty > 0) best = values_.at(j + 1, empty - 1, held);
  if (held > 0) best = std::min(best, values_.at(j + 1, empty, held - 1));
  return best;
}

double RankValueTable::threshold(int j, int empty, int held) const {
  if (j < 1 || j > n_) throw std::out_of_range("candidate index out of range");
  const double reject = values_.at(j + 1, empty, held);
  if (empty == 0 && held == 0) return kInf;
  if (reject == kInf) return static_cast<double>(population_);
  const double gap = reject - accept_value(j, empty, held);
  return std::clamp(gap, 0.0, static_cast<double>(population_));
}

AcceptRoute RankValueTable::accept_route(int j, int empty, int held) const {
  if (empty == 0) return AcceptRoute::fire_preselected;
  if (held == 0) return AcceptRoute::fill_empty;
  return values_.at(j + 1, empty - 1, held) <= values_.at(j + 1, empty, held - 1)
             ? AcceptRoute::fill_empty
             : AcceptRoute::fire_preselected;
}

RankValueTable build_rank_value_table(int n, int b, int r, RankPopulation population) {
  validate_dimensions(n, b, r);
  const int held_max = b - r;
  const int m = population == RankPopulation::shifted ? n + b - r : n + b;
  const double mean_rank = 0.5 * (m + 1);

  // The i-th best preselected individual's expected absolute rank.
  std::vector<double> prefix(held_max + 1, 0.0);
  for (int i = 1; i <= held_max; ++i) {
    prefix[i] = prefix[i - 1] + i * (m + 1.0) / (held_max + 1.0);
  }

  StateGrid grid(n, r, held_max, 0.0);
  for (int x = 0; x <= r; ++x) {
    for (int y = 0; y <= held_max; ++y) grid.at(n + 1, x, y) = x == 0 ? prefix[y] : kInf;
  }
  for (int j = n; j >= 1; --j) {
    const int remaining = n - j + 1;
    for (int x = 0; x <= r; ++x) {
      for (int y = 0; y <= held_max; ++y) {
        double& cell = grid.at(j, x, y);
        if (x > remaining) {
          cell = kInf;
        } else if (x == 0 && y == 0) {
          cell = 0.0;
        } else if (x == remaining) {
          cell = x * mean_rank + prefix[y];
        } else {
          const double v_next = grid.at(j + 1, x, y);
          double accept = kInf;
          if (x > 0) accept = grid.at(j + 1, x - 1, y);
          if (y > 0) accept = std::min(accept, grid.at(j + 1, x, y - 1));
          const double gap = std::clamp(v_next - accept, 1.0, static_cast<double>(m));
          cell = v_next - (gap * gap - gap) / (2.0 * m);
        }
      }
    }
  }
  return RankValueTable(n, b, r, m, std::move(grid), std::move(prefix));
}

double relative_rank_threshold(double absolute_threshold, int j, int n, int b, int r) {
  return static_cast<double>(j + b - r) / static_cast<double>(n + b - r) * absolute_threshold;
}

}  // namespace wssp
