#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace tcf {

// Boost.Random engines and distributions are header-only with fixed
// algorithms, so a seed reproduces the same stream on every platform
// (the std:: distributions are implementation-defined).
using Rng = boost::random::mt19937_64;

/// splitmix64 mix of (seed, stream); used to derive independent
/// per-replication and per-fold seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

double draw_normal(Rng& rng, double mean, double sd);
double draw_poisson(Rng& rng, double mean);
/// Negative binomial with mean `mean` and variance mean + phi * mean^2,
/// drawn as Poisson(Gamma(shape = 1/phi, scale = phi * mean)).
double draw_negative_binomial(Rng& rng, double mean, double phi);
std::size_t draw_index(Rng& rng, std::size_t n);  // uniform on [0, n)
double draw_uniform01(Rng& rng);

/// Fisher-Yates shuffle driven by draw_index.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = draw_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

/// `count` distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count);

/// Successive weighted sampling without replacement: each draw picks a
/// remaining index with probability proportional to its weight. Once all
/// positive-weight indices are used, the rest are drawn uniformly.
std::vector<std::size_t> weighted_sample_without_replacement(Rng& rng, const std::vector<double>& weights,
                                                             std::size_t count);

}  // namespace tcf
