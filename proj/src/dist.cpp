#include "wssp/dist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wssp/rng.hpp"

namespace wssp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(std::string_view text, std::string_view context) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::invalid_argument("bad number '" + std::string(text) +
                                "' in distribution spec '" + std::string(context) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

ScoreDistribution ScoreDistribution::uniform(double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper)) {
    throw std::invalid_argument("uniform distribution needs lower < upper");
  }
  if (lower < 0.0) throw std::invalid_argument("score support must be non-negative");
  ScoreDistribution d;
  d.kind_ = DistKind::uniform;
  d.lower_ = lower;
  d.upper_ = upper;
  d.mean_ = 0.5 * (lower + upper);
  return d;
}

ScoreDistribution ScoreDistribution::exponential(double rate) {
  if (!std::isfinite(rate) || !(rate > 0.0)) {
    throw std::invalid_argument("exponential distribution needs rate > 0");
  }
  ScoreDistribution d;
  d.kind_ = DistKind::exponential;
  d.lower_ = 0.0;
  d.upper_ = kInf;
  d.rate_ = rate;
  d.mean_ = 1.0 / rate;
  return d;
}

ScoreDistribution ScoreDistribution::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("discrete distribution needs atoms");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (!std::isfinite(a.value) || !(a.probability > 0.0)) {
      throw std::invalid_argument("discrete atoms need finite values and positive mass");
    }
    if (i > 0 && atoms[i - 1].value == a.value) {
      throw std::invalid_argument("discrete atoms must have distinct values");
    }
    total += a.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("discrete probabilities must sum to 1");
  }
  if (atoms.front().value < 0.0) {
    throw std::invalid_argument("score support must be non-negative");
  }
  ScoreDistribution d;
  d.kind_ = DistKind::discrete;
  d.lower_ = atoms.front().value;
  d.upper_ = atoms.back().value;
  d.mean_ = 0.0;
  for (const Atom& a : atoms) d.mean_ += a.value * a.probability;
  d.atoms_ = std::move(atoms);
  return d;
}

ScoreDistribution ScoreDistribution::parse(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("distribution spec '" + std::string(spec) +
                                "' must look like uniform:<a>,<b>, exp:<rate> or "
                                "discrete:<v>:<p>,...");
  }
  const std::string_view family = spec.substr(0, colon);
  const std::string_view args = spec.substr(colon + 1);
  if (family == "uniform") {
    const auto parts = split(args, ',');
    if (parts.size() != 2) throw std::invalid_argument("uniform spec needs two bounds");
    return uniform(parse_number(parts[0], spec), parse_number(parts[1], spec));
  }
  if (family == "exp" || family == "exponential") {
    return exponential(parse_number(args, spec));
  }
  if (family == "discrete") {
    std::vector<Atom> atoms;
    for (std::string_view item : split(args, ',')) {
      const auto pair = split(item, ':');
      if (pair.size() != 2) throw std::invalid_argument("discrete atom must be <value>:<prob>");
      atoms.push_back({parse_number(pair[0], spec), parse_number(pair[1], spec)});
    }
    return discrete(std::move(atoms));
  }
  throw std::invalid_argument("unknown distribution family '" + std::string(family) + "'");
}

double ScoreDistribution::cdf(double x) const {
  switch (kind_) {
    case DistKind::uniform:
      if (x <= lower_) return 0.0;
      if (x >= upper_) return 1.0;
      return (x - lower_) / (upper_ - lower_);
    case DistKind::exponential:
      if (x <= 0.0) return 0.0;
      return -std::expm1(-rate_ * x);
    case DistKind::discrete: {
      double acc = 0.0;
      for (const Atom& a : atoms_) {
        if (a.value > x) break;
        acc += a.probability;
      }
      return std::min(acc, 1.0);
    }
  }
  return 0.0;
}

double ScoreDistribution::pdf(double x) const {
  switch (kind_) {
    case DistKind::uniform:
      return (x >= lower_ && x <= upper_) ? 1.0 / (upper_ - lower_) : 0.0;
    case DistKind::exponential:
      return x >= 0.0 ? rate_ * std::exp(-rate_ * x) : 0.0;
    case DistKind::discrete:
      return 0.0;
  }
  return 0.0;
}

double ScoreDistribution::mean() const { return mean_; }

double ScoreDistribution::upper_partial_expectation(double z) const {
  switch (kind_) {
    case DistKind::uniform: {
      if (z <= lower_) return mean_;
      if (z >= upper_) return 0.0;
      return (upper_ * upper_ - z * z) / (2.0 * (upper_ - lower_));
    }
    case DistKind::exponential: {
      if (z <= 0.0) return mean_;
      if (std::isinf(z)) return 0.0;
      return (z + 1.0 / rate_) * std::exp(-rate_ * z);
    }
    case DistKind::discrete: {
      double acc = 0.0;
      for (auto it = atoms_.rbegin(); it != atoms_.rend() && it->value > z; ++it) {
        acc += it->value * it->probability;
      }
      return acc;
    }
  }
  return 0.0;
}

double ScoreDistribution::quantile(double u) const {
  switch (kind_) {
    case DistKind::uniform:
      return lower_ + u * (upper_ - lower_);
    case DistKind::exponential:
      return -std::log1p(-u) / rate_;
    case DistKind::discrete: {
      double acc = 0.0;
      for (const Atom& a : atoms_) {
        acc += a.probability;
        if (u < acc) return a.value;
      }
      return atoms_.back().value;
    }
  }
  return lower_;
}

std::string ScoreDistribution::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case DistKind::uniform:
      out << "uniform:" << lower_ << ',' << upper_;
      break;
    case DistKind::exponential:
      out << "exp:" << rate_;
      break;
    case DistKind::discrete:
      out << "discrete:";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out << ',';
        out << atoms_[i].value << ':' << atoms_[i].probability;
      }
      break;
  }
  return out.str();
}

std::vector<double> sample_stream(const ScoreDistribution& dist, std::uint64_t seed,
                                  std::size_t count) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dist.quantile(rng.uniform01()));
  return out;
}

void DistributionEstimator::observe(double score) {
  if (count_ == 0) {
    min_ = max_ = score;
  } else {
    min_ = std::min(min_, score);
    max_ = std::max(max_, score);
  }
  sum_ += score;
  ++count_;
}

std::optional<ScoreDistribution> DistributionEstimator::fit() const {
  if (count_ < 2) return std::nullopt;
  const double m = static_cast<double>(count_);
  if (shape_ == DistShape::uniform) {
    const double pad = (max_ - min_) / (m - 1.0);
    const double upper = max_ + pad;
    const double lower = std::max(0.0, min_ - pad);
    if (!(lower < upper)) return std::nullopt;
    return ScoreDistribution::uniform(lower, upper);
  }
  if (!(sum_ > 0.0)) return std::nullopt;
  return ScoreDistribution::exponential(m / sum_);
}

}  // namespace wssp
