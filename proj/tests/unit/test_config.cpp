#include "bilop/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace bilop;

namespace {

const char* kMinimal = "kind = holder_sweep\nsymbol.kind = product\ngrid.n = 128\nseed = 1\n";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("bilop_cfg_" + name);
    std::filesystem::remove_all(d);
    return d;
}

}  // namespace

TEST(ParseConfig, EmptyListsAllRequiredKeys) {
    const ConfigResult r = parse_config("");
    EXPECT_FALSE(r.ok());
    ASSERT_EQ(r.errors.size(), 4u);
    std::set<std::string> keys;
    for (const auto& e : r.errors) {
        keys.insert(e.key);
        EXPECT_EQ(e.message, "missing required key");
    }
    EXPECT_EQ(keys, (std::set<std::string>{"kind", "symbol.kind", "grid.n", "seed"}));
}

TEST(ParseConfig, MinimalRoundTrips) {
    const ConfigResult r = parse_config(kMinimal);
    ASSERT_TRUE(r.ok()) << (r.errors.empty() ? "" : to_string(r.errors[0]));
    const RunConfig& c = *r.config;
    EXPECT_EQ(c.kind, ExperimentKind::HolderSweep);
    EXPECT_EQ(c.symbol.kind, "product");
    EXPECT_EQ(c.n, 128u);
    EXPECT_EQ(c.seed, 1u);
    const std::string text = serialize_config(c);
    const ConfigResult back = parse_config(text);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back.config, c);
    EXPECT_EQ(serialize_config(*back.config), text);
}

TEST(ParseConfig, SectionsAndDottedKeysAgree) {
    const std::string sections =
        "kind = offdiag_decay\nseed = 3\n[symbol]\nkind = bht_sign\ntruncate = 1\n[grid]\nn = 256\nperiod = 192\n"
        "[exponents]\ntriples = 2, 2, 1\n";
    const std::string dotted =
        "kind = offdiag_decay\nseed = 3\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 256\n"
        "grid.period = 192\nexponents.triples = 2,2,1\n";
    const ConfigResult a = parse_config(sections), b = parse_config(dotted);
    ASSERT_TRUE(a.ok());
    ASSERT_TRUE(b.ok());
    EXPECT_EQ(*a.config, *b.config);
    EXPECT_EQ(a.config->period, 192.0);
}

TEST(ParseConfig, NonPowerOfTwoIsOneError) {
    const ConfigResult r = parse_config("kind = holder_sweep\nsymbol.kind = product\ngrid.n = 100\nseed = 1\n");
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 3);
    EXPECT_EQ(r.errors[0].key, "grid.n");
    EXPECT_NE(r.errors[0].message.find("power of two"), std::string::npos);
}

TEST(ParseConfig, ReportsEveryErrorWithLine) {
    const std::string text =
        "kind = holder_sweep\n"
        "colour = blue\n"             // unknown
        "[symbol]\n"
        "kind = sinc\n"               // bad value
        "[grid]\n"
        "n = 128\n"
        "period = -3\n"               // out of range
        "this line has no equals\n"   // syntax
        "[exponents]\n"
        "triples = 1, 2, 0.6\n";      // outside the region
    const ConfigResult r = parse_config(text);
    EXPECT_FALSE(r.ok());
    std::map<std::string, int> got;
    for (const auto& e : r.errors) got[e.key] = e.line;
    EXPECT_EQ(got.at("colour"), 2);
    EXPECT_EQ(got.at("symbol.kind"), 4);
    EXPECT_EQ(got.at("grid.period"), 7);
    EXPECT_EQ(got.at(""), 8);
    EXPECT_EQ(got.at("exponents.triples"), 10);
    EXPECT_EQ(got.at("seed"), 0);
    EXPECT_EQ(r.errors.size(), 6u);
}

TEST(ParseConfig, DuplicatesAndCrossChecks) {
    ConfigResult r = parse_config(std::string(kMinimal) + "seed = 2\n");
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 5);
    r = parse_config(std::string(kMinimal) + "symbol.kind = table\n");
    EXPECT_EQ(r.errors.size(), 1u);
    r = parse_config("kind = holder_sweep\nsymbol.kind = table\ngrid.n = 128\nseed = 1\n[ladder]\nk_min = 4\nk_max = 2\n");
    ASSERT_EQ(r.errors.size(), 2u);
    EXPECT_EQ(r.errors[0].key, "symbol.path");
    EXPECT_EQ(r.errors[1].line, 7);
    r = parse_config("kind = offdiag_decay\nsymbol.kind = product\ngrid.n = 256\nseed = 1\n"
                     "exponents.triples = 2,2,1; 4,4,2\n");
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].line, 5);
}

TEST(ParseConfig, CommentsAndInfinity) {
    const ConfigResult r = parse_config(
        "# a sweep\n; also a comment\nkind = holder_sweep  # trailing\nsymbol.kind = product\ngrid.n = 128\nseed = 1\n"
        "exponents.triples = 2, inf, 2; 4, 4, 2\n");
    ASSERT_TRUE(r.ok()) << to_string(r.errors[0]);
    ASSERT_EQ(r.config->triples.size(), 2u);
    EXPECT_TRUE(std::isinf(r.config->triples[0].q));
    EXPECT_EQ(*parse_config(serialize_config(*r.config)).config, *r.config);
}

TEST(ParseConfig, OverridesWinOverFile) {
    const ConfigResult r = parse_config(kMinimal, {{"seed", "9"}, {"grid.n", "256"}, {"ensemble.size", "7"}});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.config->seed, 9u);
    EXPECT_EQ(r.config->n, 256u);
    EXPECT_EQ(r.config->ensemble.size, 7);
    const ConfigResult bad = parse_config(kMinimal, {{"grid.q", "1"}});
    ASSERT_EQ(bad.errors.size(), 1u);
    EXPECT_EQ(bad.errors[0].line, 0);
    // overrides alone satisfy the required keys
    EXPECT_TRUE(parse_config("", {{"kind", "limsup_bound"}, {"symbol.kind", "product"}, {"grid.n", "64"}, {"seed", "0"}})
                    .ok());
}

TEST(ParseConfig, FullRoundTrip) {
    const std::string text =
        "kind = weighted_continuity\nseed = 12\noutput = somewhere\n"
        "[symbol]\nkind = bht_sign\nl1 = 1\nl2 = -1\ntruncate = 2.5\nscale = 0.5\n"
        "[grid]\nn = 64\nperiod = 32\n"
        "[exponents]\ntriples = 2,2,1; 3, 6, 2\n"
        "[weight]\nkind = poly\nalpha = 0.25\nsign = -1\ntheta = 1\nl = 2\n"
        "[ensemble]\nsize = 3\nspread = 4.5\n"
        "[restricted]\np = -4, 1.6, 1.6\n"
        "[ladder]\nlengths = 1, 3, 9\n";
    const ConfigResult r = parse_config(text);
    ASSERT_TRUE(r.ok()) << to_string(r.errors[0]);
    EXPECT_EQ(r.config->restricted.p[0], -4.0);
    EXPECT_EQ(r.config->weight.sign, -1);
    EXPECT_FALSE(r.config->ensemble.center.has_value());
    const ConfigResult back = parse_config(serialize_config(*r.config));
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back.config, *r.config);
    EXPECT_NE(serialize_config(*r.config).find("[ensemble]\nsize = 3\nspread = 4.5\n"), std::string::npos);
}

TEST(MakeSymbol, Kinds) {
    EXPECT_EQ(make_symbol({"product"})(0.0, 1.0, 2.0), cplx(1.0));
    const Symbol b = make_symbol({"bht_sign", 1.0, -1.0, 0.0, 2.0});
    EXPECT_NEAR(std::abs(b(0.0, 3.0, 1.0)), 2.0 * kPi, 1e-15);
    const Symbol t = make_symbol({"bht_sign", 1.0, -1.0, 1.0});
    EXPECT_EQ(t(0.0, 0.2, 0.0), cplx(0.0));
    EXPECT_THROW(make_symbol({"table"}), ParameterError);
    EXPECT_THROW(make_symbol({"sinc"}), ParameterError);
}

TEST(Run, ProductOffdiagExitsZero) {
    const auto dir = scratch("offdiag");
    ConfigResult r = parse_config("kind = offdiag_decay\nsymbol.kind = product\ngrid.n = 256\nseed = 1\n",
                                  {{"output", dir.string()}});
    ASSERT_TRUE(r.ok());
    std::ostringstream err;
    EXPECT_EQ(run(*r.config, err), 0) << err.str();
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    const ExperimentReport rep = report_from_json(j);
    for (double v : rep.table("decay").column("ratio")) EXPECT_LE(v, 1e-13);
    EXPECT_TRUE(std::filesystem::exists(dir / "decay.csv"));
    std::filesystem::remove_all(dir);
}

TEST(Run, HolderBaselineAndDeterminism) {
    const auto a = scratch("a"), b = scratch("b");
    ConfigResult r = parse_config(kMinimal, {{"ensemble.size", "6"}, {"output", a.string()}});
    ASSERT_TRUE(r.ok());
    std::ostringstream err;
    EXPECT_EQ(run(*r.config, err), 0) << err.str();
    RunConfig c2 = *r.config;
    c2.output = b.string();
    EXPECT_EQ(run(c2, err), 0);
    const ExperimentReport ra = report_from_json(nlohmann::json::parse(slurp(a / "report.json")));
    const ExperimentReport rb = report_from_json(nlohmann::json::parse(slurp(b / "report.json")));
    EXPECT_EQ(deterministic_dump(ra), deterministic_dump(rb));
    EXPECT_EQ(slurp(a / "bounds.csv"), slurp(b / "bounds.csv"));
    EXPECT_LE(ra.verdict("holder_baseline").value, 1.0 + 1e-9);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST(Run, ExitCodes) {
    std::ostringstream err;
    // the exponential weight is outside every class: execution error
    ConfigResult r = parse_config(kMinimal, {{"kind", "weighted_continuity"},
                                             {"weight.kind", "exp"},
                                             {"output", scratch("exp").string()}});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(run(*r.config, err), 2);
    EXPECT_NE(err.str().find("error:"), std::string::npos);
    // an output path below a regular file
    const auto blocker = scratch("file");
    std::ofstream(blocker.string()) << "x";
    r = parse_config(kMinimal, {{"ensemble.size", "2"}, {"output", (blocker / "sub").string()}});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(run(*r.config, err), 2);
    // a FAIL verdict: an impossible decay rate
    r = parse_config("kind = offdiag_decay\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 256\nseed = 1\n",
                     {{"offdiag.delta_min", "50"}, {"output", scratch("fail").string()}});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(run(*r.config, err), 1);
    std::filesystem::remove_all(blocker);
    std::filesystem::remove_all(scratch("exp"));
    std::filesystem::remove_all(scratch("fail"));
}
