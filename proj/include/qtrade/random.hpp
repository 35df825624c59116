#pragma once

#include <cstdint>
#include <random>

#include "qtrade/qstate.hpp"

namespace qtrade {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index (splitmix64 finalizer) so that
/// independent sub-streams can be derived from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Vector of i.i.d. standard complex normal entries.
Vec complex_gaussian(int n, Rng& rng);

/// Haar-distributed m x m unitary (QR of a Ginibre matrix with the phase of
/// R's diagonal absorbed into Q).
Mat haar_unitary(int m, Rng& rng);

}  // namespace qtrade
