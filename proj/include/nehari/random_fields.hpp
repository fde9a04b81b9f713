#pragma once

#include <cstdint>
#include <random>

#include "nehari/mesh.hpp"

namespace nehari {

/// Seeded generator used by every multi-start routine.
using Rng = std::mt19937_64;

/// c0 + Σ c_k cos(kπ(x-x0)/L) with k ≤ `modes` (tensor modes in 2D).
/// When `nonnegative` is set the result is max(·, 0); an identically zero
/// draw is replaced by the constant 1.
ScalarField random_trig_field(const Grid& grid, Rng& rng, bool nonnegative, int modes = 4);

/// Uniform draw in [lo, hi) from raw 64-bit output, identical on every platform.
double uniform(Rng& rng, double lo, double hi);

}  // namespace nehari
