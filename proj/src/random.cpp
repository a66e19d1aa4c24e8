#include "meghasim/random.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "meghasim/time.hpp"

namespace meghasim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851f42d4c957f2dULL)));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Lemire's nearly-divisionless method.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::exponential(double mean) {
  // 1 - u lies in (0, 1], so the log is finite.
  double x = -std::log(1.0 - uniform()) * mean;
  while (x <= 0.0) x = -std::log(1.0 - uniform()) * mean;
  return x;
}

std::vector<std::uint32_t> Rng::sample(std::uint32_t n, std::uint32_t k) {
  if (k > n) throw std::invalid_argument("Rng::sample: k exceeds population");
  std::vector<std::uint32_t> out;
  out.reserve(k);
  if (k * 4ULL >= n) {
    std::vector<std::uint32_t> all(n);
    for (std::uint32_t i = 0; i < n; ++i) all[i] = i;
    for (std::uint32_t i = 0; i < k; ++i) {
      auto j = i + static_cast<std::uint32_t>(below(n - i));
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::unordered_set<std::uint32_t> seen;
  seen.reserve(k * 2);
  for (std::uint32_t j = n - k; j < n; ++j) {
    auto t = static_cast<std::uint32_t>(below(static_cast<std::uint64_t>(j) + 1));
    if (!seen.insert(t).second) {
      seen.insert(j);
      out.push_back(j);
    } else {
      out.push_back(t);
    }
  }
  return out;
}

std::string format_seconds(SimTime t) {
  std::int64_t v = t.count();
  bool neg = v < 0;
  auto mag = static_cast<std::uint64_t>(neg ? -v : v);
  std::uint64_t whole = mag / SimTime::kTicksPerSecond;
  std::uint64_t frac = mag % SimTime::kTicksPerSecond;
  std::string fs = std::to_string(frac);
  std::string out = (neg ? "-" : "") + std::to_string(whole) + ".";
  out.append(9 - fs.size(), '0');
  out += fs;
  return out;
}

}  // namespace meghasim
