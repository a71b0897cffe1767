#include "bilop/operator.hpp"
#include "bilop/smooth.hpp"
#include "bilop/whitney.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bilop;

namespace {

const SingularLine kLine(1.0, -1.0);

Symbol truncated_bht(double L = 1.0) { return truncate_near_line(bht_sign_symbol(kLine), kLine, L); }

}  // namespace

TEST(Whitney, ZeroSymbolGivesEmptyModel) {
    Grid g = Grid::centered(64.0, 256);
    Symbol zero = truncate_near_line(scaled_symbol(product_symbol(), 0.0), kLine, 1.0);
    WhitneyConfig cfg;
    cfg.depth = 2;
    WhitneyResult r = whitney_decompose(zero, g, cfg, standard_probes(g));
    EXPECT_EQ(r.model.collection.size(), 0u);
    for (double e : r.report.remainder) EXPECT_EQ(e, 0.0);
}

TEST(Whitney, Preconditions) {
    Grid g = Grid::centered(64.0, 256);
    WhitneyConfig cfg;
    cfg.depth = 2;
    EXPECT_THROW(whitney_decompose(bht_sign_symbol(kLine), g, cfg), PreconditionError);
    Symbol xdep = truncated_bht();
    xdep.x_dependent = true;
    EXPECT_THROW(whitney_decompose(xdep, g, cfg), PreconditionError);
    const SingularLine other(1.0, -2.0);
    EXPECT_THROW(whitney_decompose(truncate_near_line(bht_sign_symbol(other), other, 1.0), g, cfg), ParameterError);
    // the finest cubes cannot reach the truncation distance on a short torus
    EXPECT_THROW(whitney_decompose(truncated_bht(), Grid::centered(16.0, 64), cfg), ResolutionError);
}

TEST(Whitney, FullTranslationSumReproducesCutoffSymbol) {
    // with every residue u kept, the packet frames are exact: the model equals T_{sigma chi}
    Grid g = Grid::centered(64.0, 256);
    WhitneyConfig cfg;
    cfg.depth = 3;
    cfg.u_max = 64;
    Rng rng(21);
    std::vector<ProbePair> probes;
    for (int i = 0; i < 2; ++i)
        probes.emplace_back(bilop::testing::random_bandlimited(g, rng, 40),
                            bilop::testing::random_bandlimited(g, rng, 40));
    WhitneyResult r = whitney_decompose(truncated_bht(), g, cfg, probes);
    ASSERT_GT(r.model.collection.size(), 0u);
    for (double e : r.report.cutoff_remainder) EXPECT_LT(e, 1e-10);
}

TEST(Whitney, EmittedFamilyProperties) {
    Grid g = Grid::centered(64.0, 256);
    WhitneyConfig cfg;
    cfg.depth = 3;
    const double L = 1.0;
    WhitneyResult r = whitney_decompose(truncated_bht(L), g, cfg);
    const auto& S = r.model.collection;
    ASSERT_GT(S.size(), 0u);
    EXPECT_TRUE(r.report.remarque_ok);
    double minw = INFINITY;
    for (const auto& s : S.tiles) minw = std::min(minw, s.freq.length);
    EXPECT_GE(kTwoPi * minw, 0.5 / L);
    EXPECT_EQ(r.report.min_freq_length, kTwoPi * minw);
    EXPECT_LE(r.model.max_abs_eps(), 1.0 + 1e-15);
    ValidationReport v = collection_validate(S);
    EXPECT_TRUE(v.area_ok);
    EXPECT_TRUE(v.disjoint_ok);
    EXPECT_TRUE(v.distinct_ok);
    EXPECT_TRUE(v.time_grid_ok);
    EXPECT_LE(v.time.overlap, 3.0);
    // the cells overlap by half a side, so J is a grid only with a larger constant
    EXPECT_TRUE(std::isfinite(v.freq.overlap));
    EXPECT_GT(v.freq.overlap, 4.0);
}

TEST(Whitney, RemainderDecreasesWithDepthSmallGrid) {
    Grid g = Grid::centered(64.0, 256);
    WhitneyConfig cfg;
    cfg.u_max = 4;
    const auto probes = standard_probes(g);
    RVec prev;
    for (int d = 3; d <= 4; ++d) {
        cfg.depth = d;
        WhitneyResult r = whitney_decompose(truncated_bht(), g, cfg, probes);
        for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_LT(r.report.remainder[i], prev[i]) << d << " " << i;
        prev = r.report.remainder;
    }
}
