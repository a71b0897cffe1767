#pragma once

#include "bilop/signal.hpp"

#include <cmath>

namespace bilop::testing {

inline SampledFunction random_function(const Grid& g, Rng& rng) {
    SampledFunction f(g);
    for (auto& v : f.values) v = {rng.normal(), rng.normal()};
    return f;
}

inline SampledFunction random_real(const Grid& g, Rng& rng) {
    SampledFunction f(g);
    for (auto& v : f.values) v = rng.normal();
    return f;
}

/// Random trigonometric polynomial with bins |k| <= kmax.
inline SampledFunction random_bandlimited(const Grid& g, Rng& rng, long kmax) {
    Spectrum s{g, CVec(g.count, 0.0)};
    for (std::size_t j = 0; j < g.count; ++j)
        if (std::abs(g.bin(j)) <= kmax) s.values[j] = {rng.normal(), rng.normal()};
    return dft_inverse(s);
}

}  // namespace bilop::testing
