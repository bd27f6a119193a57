#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wssp {

enum class DistKind { uniform, exponential, discrete };

struct Atom {
  double value;
  double probability;
};

// Non-negative score model: uniform(lower, upper), exponential(rate) or a
// finite discrete law. Immutable once built.
//
// cdf() and upper_partial_expectation() are total on the real line: below the
// support they return 0 and mean(), above it 1 and 0. The backward induction
// evaluates them at arbitrary continuation gaps and relies on this.
class ScoreDistribution {
 public:
  static ScoreDistribution uniform(double lower, double upper);
  static ScoreDistribution exponential(double rate);
  // Atoms are sorted by value; probabilities must be positive and sum to 1.
  static ScoreDistribution discrete(std::vector<Atom> atoms);

  // Parses `uniform:<a>,<b>`, `exp:<rate>` or `discrete:<v1>:<p1>,<v2>:<p2>,...`.
  static ScoreDistribution parse(std::string_view spec);

  DistKind kind() const { return kind_; }
  // Support bounds; upper() is +inf for the exponential.
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double rate() const { return rate_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // P(S <= x). Right-continuous step function for the discrete kind.
  double cdf(double x) const;
  // Lebesgue density; zero everywhere for the discrete kind.
  double pdf(double x) const;
  double mean() const;
  // E[S 1{S > z}], i.e. the integral of s f(s) over (max(z, lower), upper).
  double upper_partial_expectation(double z) const;
  // Generalised inverse of cdf() for u in [0, 1).
  double quantile(double u) const;

  std::string to_string() const;

 private:
  ScoreDistribution() = default;

  DistKind kind_ = DistKind::uniform;
  double lower_ = 0.0;
  double upper_ = 1.0;
  double rate_ = 0.0;
  double mean_ = 0.5;
  std::vector<Atom> atoms_;
};

// `count` inverse-transform draws driven by wssp::Rng seeded with `seed`.
std::vector<double> sample_stream(const ScoreDistribution& dist, std::uint64_t seed,
                                  std::size_t count);

enum class DistShape { uniform, exponential };

// Running sufficient statistics (count, min, max, sum) for fitting a known
// distribution family online. Order of observations does not matter.
class DistributionEstimator {
 public:
  explicit DistributionEstimator(DistShape shape) : shape_(shape) {}

  void observe(double score);

  DistShape shape() const { return shape_; }
  std::size_t count() const { return count_; }
  double min() const { return min_; }
  double max() const { return max_; }
  double sum() const { return sum_; }

  // Uniform: range expansion by (max-min)/(m-1) on both sides, lower end
  // clamped at 0. Exponential: rate m/sum. Returns nullopt with fewer than
  // two observations or when the fitted parameters are degenerate.
  std::optional<ScoreDistribution> fit() const;

 private:
  DistShape shape_;
  std::size_t count_ = 0;
  double min_ = 0.0;
  double max_ = 0.0;
  double sum_ = 0.0;
};

}  // namespace wssp
