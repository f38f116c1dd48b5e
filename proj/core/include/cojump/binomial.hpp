#ifndef COJUMP_BINOMIAL_HPP
#define COJUMP_BINOMIAL_HPP

#include <cstddef>
#include <span>

namespace cojump {

/// Source-compartment occupancies above this cap are rejected when building
/// pairwise rate tables; it also caps the exact binomial triangle at 2*cap.
inline constexpr int kDefaultPopulationCap = 300;

/// Row n of Pascal's triangle, i.e. C(n, 0..n), computed in exact integer
/// arithmetic and rounded once to double. Rows are cached per thread.
/// Throws ConfigError for n beyond 2*kDefaultPopulationCap.
std::span<const double> binomial_row(int n);

/// C(n, k) as a double (exact integer, correctly rounded).
double binomial_coefficient(int n, int k);

}  // namespace cojump

#endif  // COJUMP_BINOMIAL_HPP
