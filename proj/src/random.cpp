#include "tcf/random.hpp"

#include <numeric>
#include <stdexcept>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "tcf/error.hpp"

namespace tcf {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double draw_normal(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double draw_poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  boost::random::poisson_distribution<long long, double> dist(mean);
  return static_cast<double>(dist(rng));
}

double draw_negative_binomial(Rng& rng, double mean, double phi) {
  if (mean <= 0.0) return 0.0;
  if (phi <= 0.0) return draw_poisson(rng, mean);
  boost::random::gamma_distribution<double> gamma(1.0 / phi, phi * mean);
  return draw_poisson(rng, gamma(rng));
}

std::size_t draw_index(Rng& rng, std::size_t n) {
  if (n == 0) throw InputError("draw_index on an empty range");
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

double draw_uniform01(Rng& rng) {
  boost::random::uniform_01<double> dist;
  return dist(rng);
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count) {
  if (count > n) throw InputError("cannot sample more items than available");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates from the front.
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + draw_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

std::vector<std::size_t> weighted_sample_without_replacement(Rng& rng, const std::vector<double>& weights,
                                                             std::size_t count) {
  const std::size_t n = weights.size();
  if (count > n) throw InputError("cannot sample more items than available");
  std::vector<double> w(weights);
  for (double& x : w) {
    if (!(x >= 0.0)) throw InputError("sampling weights must be nonnegative");
  }
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) total += w[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double u = draw_uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || w[i] <= 0.0) continue;
        acc += w[i];
        pick = i;
        if (u < acc) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) rest.push_back(i);
      pick = rest[draw_index(rng, rest.size())];
    }
    taken[pick] = true;
    out.push_back(pick);
  }
  return out;
}

}  // namespace tcf
