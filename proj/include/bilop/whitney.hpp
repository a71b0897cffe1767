#pragma once

#include "bilop/tilemodel.hpp"

#include <utility>
#include <vector>

namespace bilop {

struct WhitneyConfig {
    int depth = 5;            // number of dyadic scales
    int u_max = 2;            // |u|_inf truncation of the translation sum
    double damping = 8.0;     // N in (1+|u|^2)^{-N}
    double pair_min = 3.5;    // |c1 - c2| / s range of the cube pairs
    double pair_max = 7.0;
    double box = 0.0;         // frequency half-width (cycles) of the cells, 0 for the whole band
};

using ProbePair = std::pair<SampledFunction, SampledFunction>;

/// Three bump pairs: (bump(-2,1.5), bump(2.5,2)), modulated (bump(0,1.5) e^{i pi x}, bump(1,2) e^{-i pi x}),
/// (bump(-1,1.2), bump(-0.5,1.4) e^{0.6 i pi x}).
std::vector<ProbePair> standard_probes(const Grid& g);

struct WhitneyReport {
    double L = 0.0;
    RVec scales;
    std::size_t pairs = 0;
    std::size_t triples = 0;
    std::size_t tiles = 0;
    std::size_t gaps = 0;                 // bins where sigma chi != 0 but no cube covers
    double min_freq_length = 0.0;         // 2 pi min |w_s| (angular)
    double max_time_length = 0.0;         // max |I_s|
    bool remarque_ok = false;             // 2 pi min |w_s| >= 1/(2L)
    RVec remainder;                       // |model - T_sigma|_1 / (|f|_2 |g|_2) per probe
    RVec cutoff_remainder;                // same against the depth cutoff sigma chi
};

struct WhitneyResult {
    ModelSum model;
    WhitneyReport report;
};

/// Whitney cubes of side s = s0 2^j along the antidiagonal line, windows on the
/// cells (s/2)Z, coefficients from sigma chi / (sum of cube windows) tested
/// against packet tensor products. Requires a truncated, x-independent symbol
/// whose line is l1 = -l2.
WhitneyResult whitney_decompose(const Symbol& s, const Grid& g, const WhitneyConfig& cfg,
                                const std::vector<ProbePair>& probes = {});

}  // namespace bilop
