#include "cojump/binomial.hpp"

#include <gmp.h>

#include <string>
#include <unordered_map>
#include <vector>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

std::vector<double> compute_row(int n) {
  // mpz keeps every entry exact; the one rounding happens at get_d.
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  mpz_t v;
  mpz_init(v);
  for (int k = 0; k <= n; ++k) {
    mpz_bin_uiui(v, static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    row[static_cast<std::size_t>(k)] = mpz_get_d(v);
  }
  mpz_clear(v);
  return row;
}

}  // namespace

std::span<const double> binomial_row(int n) {
  if (n < 0 || n > 2 * kDefaultPopulationCap) {
    throw ConfigError("binomial table limited to n <= " +
                      std::to_string(2 * kDefaultPopulationCap) +
                      ", requested n = " + std::to_string(n));
  }
  thread_local std::unordered_map<int, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, compute_row(n)).first;
  }
  return it->second;
}

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return binomial_row(n)[static_cast<std::size_t>(k)];
}

}  // namespace cojump
