#include "bilop/experiments.hpp"
#include "bilop/tilemodel.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bilop;

namespace {

const SingularLine kLine(1.0, -1.0);

Symbol truncated_bht(double L = 1.0) { return truncate_near_line(bht_sign_symbol(kLine), kLine, L); }

HolderConfig small_holder(int size = 8) {
    HolderConfig c;
    c.ensemble.size = size;
    return c;
}

RestrictedConfig small_restricted(int triples = 6) {
    RestrictedConfig c;
    c.set_triples = triples;
    c.samples = 3;
    return c;
}

}  // namespace

// ---------------------------------------------------------------- reports

TEST(Report, JsonRoundTripAndCsv) {
    ExperimentReport r;
    r.id = "demo";
    r.seed = 7;
    r.config = {{"a", 1}};
    r.tables.push_back({"t", {"x", "y"}, {{1.0, kInf}, {2.0, 0.5}}});
    r.fits.push_back({"f", kInf, 0.0, 0.0, 1});
    r.verdicts.push_back({"v", true, 1.0, 2.0, "rule"});
    r.timestamp = "2026-01-01T00:00:00Z";
    const ExperimentReport back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
    EXPECT_EQ(deterministic_dump(back), deterministic_dump(r));
    EXPECT_TRUE(std::isinf(back.tables[0].rows[0][1]));
    EXPECT_EQ(back.timestamp, r.timestamp);
    EXPECT_EQ(deterministic_dump(r).find("timestamp"), std::string::npos);
    std::ostringstream os;
    write_table_csv(os, r.tables[0]);
    EXPECT_EQ(os.str(), "x,y\n1,inf\n2,0.5\n");
    const std::string text = render_report(report_to_json(r));
    EXPECT_NE(text.find("PASS v"), std::string::npos);
    EXPECT_THROW(report_from_json(nlohmann::json{{"schema", "other"}}), ShapeError);
}

TEST(Report, WriteCreatesJsonAndTables) {
    const auto dir = std::filesystem::temp_directory_path() / "bilop_report_test";
    std::filesystem::remove_all(dir);
    ExperimentReport r;
    r.id = "demo";
    r.tables.push_back({"alpha", {"x"}, {{1.0}}});
    write_report(r, dir.string());
    EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "alpha.csv"));
    std::filesystem::remove_all(dir);
}

TEST(Exponents, Region) {
    EXPECT_NO_THROW(check_exponents({2, 2, 1}));
    EXPECT_NO_THROW(check_exponents({2, kInf, 2}));
    EXPECT_NO_THROW(check_exponents({1.5, 1.5, 0.75}));
    EXPECT_THROW(check_exponents({1, 2, 2.0 / 3.0}), ParameterError);
    EXPECT_THROW(check_exponents({1.2, 1.2, 0.6}), ParameterError);  // 1/r = 5/3
    EXPECT_THROW(check_exponents({2, 2, 2}), ParameterError);
    EXPECT_THROW(check_exponents({kInf, kInf, kInf}), ParameterError);
}

// ---------------------------------------------------------------- off-diagonal decay

TEST(Offdiag, ProductRatioVanishesOffI) {
    ExperimentReport r = offdiag_decay(product_symbol(), OffdiagConfig{});
    for (double v : r.table("decay").column("ratio")) EXPECT_LE(v, 1e-14);
    EXPECT_TRUE(r.pass());
    EXPECT_TRUE(std::isinf(r.fit("delta").exponent));
}

TEST(Offdiag, TruncatedBhtDecays) {
    ExperimentReport r = offdiag_decay(truncated_bht(), OffdiagConfig{});
    EXPECT_TRUE(r.verdict("monotone").pass);
    EXPECT_GE(r.fit("delta").exponent, 2.0);
    EXPECT_EQ(r.fit("delta").points, 7u);
}

TEST(Offdiag, ProbeSupDominatesSubsets) {
    OffdiagConfig c;
    const Table five = offdiag_decay(truncated_bht(), c).table("decay");
    c.probes = 3;
    const Table three = offdiag_decay(truncated_bht(), c).table("decay");
    c.probes = 1;
    const Table one = offdiag_decay(truncated_bht(), c).table("decay");
    for (std::size_t k = 0; k < five.rows.size(); ++k) {
        EXPECT_GE(five.rows[k][2], three.rows[k][2]);
        EXPECT_EQ(one.rows[k][2], one.rows[k][8]);
        EXPECT_EQ(one.rows[k][8], five.rows[k][8]);
    }
    c.probes = 0;
    EXPECT_THROW(offdiag_decay(truncated_bht(), c), ParameterError);
}

TEST(Offdiag, LinearInSymbol) {
    OffdiagConfig c;
    c.k_max = 3;
    const RVec a = offdiag_decay(truncated_bht(), c).table("decay").column("ratio");
    const RVec b = offdiag_decay(scaled_symbol(truncated_bht(), 2.0), c).table("decay").column("ratio");
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.0 * a[i], 1e-12 * a[i]);
}

TEST(Offdiag, TranslationInvariant) {
    OffdiagConfig c;
    c.k_max = 3;
    const RVec a = offdiag_decay(truncated_bht(), c).table("decay").column("ratio");
    c.I.center += 4.0 * (c.period / c.n);
    const RVec b = offdiag_decay(truncated_bht(), c).table("decay").column("ratio");
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i], 1e-9 * a[i]);
}

TEST(Offdiag, Errors) {
    OffdiagConfig c;
    c.exps = {1.0, 2.0, 2.0 / 3.0};
    EXPECT_THROW(offdiag_decay(product_symbol(), c), ParameterError);
    c = OffdiagConfig{};
    c.period = 64.0;
    EXPECT_THROW(offdiag_decay(product_symbol(), c), ResolutionError);
}

// ---------------------------------------------------------------- Holder

TEST(Holder, ProductBaseline) {
    ExperimentReport r = holder_sweep(product_symbol(), small_holder(12));
    EXPECT_TRUE(r.verdict("holder_baseline").pass) << r.verdict("holder_baseline").value;
    for (const auto& row : r.table("bounds").rows) {
        EXPECT_LE(row[3], 1.0 + 1e-9);
        EXPECT_LE(row[4], 1.0 + 1e-9);
    }
    EXPECT_TRUE(r.pass());
}

TEST(Holder, RatioScaleInvariant) {
    Grid g = Grid::centered(64.0, 128);
    Rng rng(3);
    EnsembleSpec e;
    const SampledFunction f = random_bump_sum(e, rng).sample(g), h = random_bump_sum(e, rng).sample(g);
    const Symbol s = truncated_bht();
    const RVec one(g.count, 1.0);
    for (const Exponents& ex : HolderConfig{}.triples) {
        const double a = holder_ratio(eval_direct(s, f, h), f, h, ex, one);
        const SampledFunction f2 = 2.0 * f;
        const double b = holder_ratio(eval_direct(s, f2, h), f2, h, ex, one);
        EXPECT_NEAR(a, b, 1e-13 * a);
    }
}

TEST(Holder, TruncatedBhtStable) {
    HolderConfig c = small_holder(10);
    c.triples = {{2, 2, 1}};
    ExperimentReport r = holder_sweep(truncated_bht(), c);
    EXPECT_TRUE(r.pass()) << r.verdicts[0].value;
    EXPECT_EQ(r.table("members").rows.size(), 20u);
}

TEST(Holder, Deterministic) {
    const std::string a = deterministic_dump(holder_sweep(truncated_bht(), small_holder(4)));
    const std::string b = deterministic_dump(holder_sweep(truncated_bht(), small_holder(4)));
    EXPECT_EQ(a, b);
    HolderConfig c = small_holder(4);
    c.seed = 2;
    EXPECT_NE(deterministic_dump(holder_sweep(truncated_bht(), c)), a);
}

// ---------------------------------------------------------------- weighted

TEST(Weighted, UnitWeightReducesToHolder) {
    const HolderConfig c = small_holder(5);
    const Table a = holder_sweep(truncated_bht(), c).table("bounds");
    const Table b = weighted_continuity(truncated_bht(), constant_weight(1.0), c).table("bounds");
    EXPECT_EQ(a.rows, b.rows);
}

TEST(Weighted, DoubledWeightCancels) {
    const HolderConfig c = small_holder(5);
    const RVec a = weighted_continuity(truncated_bht(), power_weight(0.5), c).table("members").column("ratio");
    Weight w2 = power_weight(0.5);
    w2.eval = [](double x) { return 2.0 * std::sqrt(1.0 + std::abs(x)); };
    const RVec b = weighted_continuity(truncated_bht(), w2, c).table("members").column("ratio");
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14 * a[i]);
}

TEST(Weighted, PolynomialWeightStable) {
    HolderConfig c = small_holder(10);
    c.triples = {{2, 2, 1}};
    ExperimentReport r = weighted_continuity(truncated_bht(), power_weight(0.5, 1.0, 1.0), c);
    EXPECT_TRUE(r.pass()) << r.verdicts[0].value;
}

TEST(Weighted, RejectsWeightOutsideClass) {
    EXPECT_THROW(weighted_continuity(truncated_bht(), exponential_weight(1.0), small_holder(2)), PreconditionError);
}

// ---------------------------------------------------------------- restricted weak type

TEST(Restricted, ExponentChecks) {
    EXPECT_EQ(restricted_alpha({1.0 / 0.6, 1.0 / 0.6, -5.0}), 2);
    EXPECT_EQ(restricted_alpha({-4.0, 1.0 / 0.625, 1.0 / 0.625}), 0);
    EXPECT_THROW(restricted_alpha({2.0, 2.0, 4.0}), ParameterError);         // no negative index
    EXPECT_THROW(restricted_alpha({1.0, 1.0 / 0.6, -1.0 / 0.6}), ParameterError);  // 1/p_alpha = -0.6
    EXPECT_THROW(restricted_alpha({0.0, 1.0, 1.0}), ParameterError);
    EXPECT_THROW(restricted_alpha({1.0, 1.0, 1.0}), ParameterError);
}

TEST(Restricted, ExceptionalSetCertifiedAndMinimal) {
    Grid g = Grid::centered(64.0, 256);
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        std::array<Mask, 3> E;
        for (auto& m : E) {
            m.assign(g.count, 0);
            const int pieces = rng.integer(1, 3);
            for (int q = 0; q < pieces; ++q) {
                const int a = rng.integer(0, 230), len = rng.integer(1, 25);
                for (int j = a; j < a + len; ++j) m[j] = 1;
            }
        }
        const int alpha = rng.integer(0, 2);
        const ExceptionalSet X = exceptional_set(E, g, alpha);
        ASSERT_TRUE(X.certified);
        EXPECT_LE(X.measure_U, 0.5 * X.measure_E_alpha);
        // independent recomputation of U = {v > eta}
        RVec v(g.count, 0.0);
        std::array<double, 3> cnt{};
        for (int i = 0; i < 3; ++i) cnt[i] = std::count(E[i].begin(), E[i].end(), 1);
        for (int i = 0; i < 3; ++i) {
            SampledFunction ind(g);
            for (std::size_t j = 0; j < g.count; ++j) ind[j] = E[i][j];
            const SampledFunction M = hardy_littlewood_max(ind);
            for (std::size_t j = 0; j < g.count; ++j) v[j] = std::max(v[j], M[j].real() * cnt[alpha] / cnt[i]);
        }
        std::size_t above = 0, at_least = 0;
        for (std::size_t j = 0; j < g.count; ++j) {
            EXPECT_EQ(X.U[j], v[j] > X.eta ? 1 : 0);
            EXPECT_EQ(X.E_alpha_prime[j], (E[alpha][j] && !(v[j] > X.eta)) ? 1 : 0);
            above += v[j] > X.eta;
            at_least += v[j] >= X.eta;
        }
        // any smaller eta lets {v >= eta} in, which is too large
        EXPECT_GT(static_cast<double>(at_least), std::floor(0.5 * cnt[alpha]));
    }
}

TEST(Restricted, ZeroInputGivesZeroForm) {
    Grid g = Grid::centered(64.0, 128);
    Rng rng(2);
    const SampledFunction z(g), a = bilop::testing::random_function(g, rng), b = bilop::testing::random_function(g, rng);
    const TrilinearForm L = symbol_form(truncated_bht());
    EXPECT_EQ(L(z, a, b), cplx(0.0));
    EXPECT_EQ(L(a, z, b), cplx(0.0));
    EXPECT_EQ(L(a, b, z), cplx(0.0));
}

TEST(Restricted, ExceptionalSetIndependentOfForm) {
    const RestrictedConfig c = small_restricted(5);
    const Table a = restricted_type_harness(symbol_form(truncated_bht()), c).table("sets");
    const Table b = restricted_type_harness(symbol_form(product_symbol()), c).table("sets");
    EXPECT_EQ(a.column("eta"), b.column("eta"));
    EXPECT_EQ(a.column("U"), b.column("U"));
    // a model-sum form sees the same sets
    ModelSum M;
    const Table m = restricted_type_harness(
                        [&M](const SampledFunction& f1, const SampledFunction& f2, const SampledFunction& f3) {
                            return trilinear_form(M, f1, f2, f3, Interval(0.0, 64.0));
                        },
                        c)
                        .table("sets");
    EXPECT_EQ(a.column("U"), m.column("U"));
}

TEST(Restricted, HarnessCertifiesAndIsFinite) {
    ExperimentReport r = restricted_type_harness(symbol_form(truncated_bht()), small_restricted(8));
    EXPECT_TRUE(r.verdict("exceptional_set").pass);
    EXPECT_TRUE(r.verdict("finite").pass);
    for (const auto& row : r.table("sets").rows) EXPECT_LE(row[6], row[7]);
    for (const auto& row : r.table("sets").rows) {
        EXPECT_GT(row[8], 0.0);
        EXPECT_GT(row[9], 0.0);
    }
}

// ---------------------------------------------------------------- limsup

TEST(Limsup, ZeroInputs) {
    Grid g = Grid::centered(256.0, 1024);
    const SampledFunction z(g);
    ExperimentReport r = limsup_bound(truncated_bht(), z, z, LimsupConfig{});
    for (double v : r.table("limsup").column("measurement")) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(r.pass());
}

TEST(Limsup, ProductDecaysLikeInverseLength) {
    Grid g = Grid::centered(256.0, 1024);
    SampledFunction f = make_bump(-1.0, 3.0, g), h = make_bump(1.0, 3.0, g);
    f = (1.0 / lp_norm(f, kInf)) * f;
    h = (1.0 / lp_norm(h, kInf)) * h;
    LimsupConfig c;
    for (double r : {1.0, 2.0}) {
        c.r = r;
        ExperimentReport rep = limsup_bound(product_symbol(), f, h, c);
        const Table& t = rep.table("limsup");
        // I = [-L/2, L/2) holds both supports from L = 8 on
        double ref = -1.0;
        for (const auto& row : t.rows) {
            if (row[0] < 8.0) continue;
            const double m = row[1] * std::pow(row[0], 1.0 / r);
            if (ref < 0.0) ref = m;
            EXPECT_NEAR(m, ref, 1e-12 * ref) << row[0];
        }
        EXPECT_TRUE(rep.pass());
    }
}

TEST(Limsup, CenterIndependentOnceEnclosing) {
    Grid g = Grid::centered(256.0, 1024);
    const SampledFunction f = make_bump(-1.0, 3.0, g), h = make_bump(1.0, 3.0, g);
    LimsupConfig c;
    c.lengths = {16, 32, 64};
    const RVec a = limsup_bound(product_symbol(), f, h, c).table("limsup").column("measurement");
    c.center = 3.0;
    const RVec b = limsup_bound(product_symbol(), f, h, c).table("limsup").column("measurement");
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(Limsup, TruncatedBhtBounded) {
    Grid g = Grid::centered(256.0, 1024);
    SampledFunction f = make_bump(-1.0, 3.0, g), h = make_bump(1.5, 4.0, g);
    f = (1.0 / lp_norm(f, kInf)) * f;
    h = (1.0 / lp_norm(h, kInf)) * h;
    ExperimentReport r = limsup_bound(truncated_bht(), f, h, LimsupConfig{});
    EXPECT_TRUE(r.pass()) << render_report(report_to_json(r));
}

// ---------------------------------------------------------------- local estimate

TEST(Local, CoronaTermsOfConstant) {
    Grid g = Grid::centered(64.0, 256);
    SampledFunction one(g);
    for (auto& v : one.values) v = 1.0;
    const Interval I(0.0, 1.0);
    const RVec t = corona_terms(one, I, 2.0, 1.0);
    ASSERT_EQ(static_cast<int>(t.size()), max_corona_index(I, g) + 1);
    for (std::size_t k = 0; k < t.size(); ++k) {
        // count the corona points directly
        double cnt = 0.0;
        for (std::size_t j = 0; j < g.count; ++j) {
            const double d = 1.0 + std::abs(g.x(j));
            cnt += d >= std::ldexp(1.0, k) && d < std::ldexp(1.0, k + 1);
        }
        EXPECT_NEAR(t[k], std::sqrt(cnt * g.spacing / std::ldexp(1.0, k + 1)) * std::ldexp(1.0, -static_cast<int>(k)), 1e-14);
    }
    const RVec z = corona_terms(SampledFunction(g), I, 2.0, 1.0);
    for (double v : z) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(hl_majorant(SampledFunction(g), I, 2.0), 0.0);
    EXPECT_NEAR(hl_majorant(one, I, 3.0), 1.0, 1e-15);
}

TEST(Local, TruncatedProductStable) {
    LocalConfig c;
    c.ensemble.size = 10;
    const Symbol s = truncate_near_line(product_symbol(), kLine, c.I.length);
    ExperimentReport r = local_estimate_check(s, c);
    EXPECT_TRUE(r.pass());
    const Table& k = r.table("constants");
    EXPECT_NEAR(k.rows[1][1] / k.rows[0][1], 1.0, 0.3);
    for (const auto& row : r.table("members").rows) EXPECT_GE(row[3], row[4]);
}
