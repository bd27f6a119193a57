#pragma once

// Hand-rolled generators for property tests.

#include <algorithm>
#include <functional>
#include <vector>

#include "wssp/dist.hpp"
#include "wssp/dp.hpp"
#include "wssp/rng.hpp"

namespace gen {

inline int uniform_int(wssp::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline double uniform_real(wssp::Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

inline wssp::ScoreDistribution closed_form_dist(wssp::Rng& rng) {
  if (rng.bernoulli(0.5)) {
    const double lo = uniform_real(rng, 0.0, 2.0);
    return wssp::ScoreDistribution::uniform(lo, lo + uniform_real(rng, 0.1, 3.0));
  }
  return wssp::ScoreDistribution::exponential(uniform_real(rng, 0.2, 5.0));
}

inline wssp::WsspInstance random_instance(wssp::Rng& rng, const wssp::ScoreDistribution& dist,
                                          int max_n = 30, int max_b = 6) {
  const int n = uniform_int(rng, 1, max_n);
  const int b = uniform_int(rng, 1, std::min(n, max_b));
  const int r = uniform_int(rng, 0, b);
  std::vector<double> pre;
  for (int i = 0; i < b - r; ++i) pre.push_back(dist.quantile(rng.uniform01()));
  return wssp::WsspInstance::make(n, b, r, std::move(pre), dist);
}

inline wssp::WsspInstance random_instance(wssp::Rng& rng, int max_n = 30, int max_b = 6) {
  return random_instance(rng, closed_form_dist(rng), max_n, max_b);
}

}  // namespace gen
