#pragma once

#include "bilop/operator.hpp"
#include "bilop/signal.hpp"
#include "bilop/symbol.hpp"
#include "bilop/weights.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace bilop {

inline constexpr const char* kReportSchema = "bilop-report/1";
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<RVec> rows;
    RVec column(const std::string& c) const;
};

struct Fit {
    std::string name;
    double exponent = 0.0;   // minus the log-log slope
    double intercept = 0.0;
    double residual = 0.0;   // rms of the log fit
    std::size_t points = 0;
};

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string rule;
};

struct ExperimentReport {
    std::string id;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<Table> tables;
    std::vector<Fit> fits;
    std::vector<Verdict> verdicts;
    double wall_time = 0.0;
    std::string timestamp;

    bool pass() const;
    const Table& table(const std::string& name) const;
    const Verdict& verdict(const std::string& name) const;
    const Fit& fit(const std::string& name) const;
};

/// Keys: schema, id, config, seed, tables, fits, verdicts, and run (timestamp, wall time),
/// the only key that changes between identical runs. Non-finite numbers are written as strings.
nlohmann::json report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const nlohmann::json& j);
/// report_to_json without the run key, dumped with indent 2.
std::string deterministic_dump(const ExperimentReport& r);
/// report.json plus one <table>.csv per table in dir (created if missing).
void write_report(const ExperimentReport& r, const std::string& dir);
void write_table_csv(std::ostream& os, const Table& t);
std::string render_report(const nlohmann::json& j);

nlohmann::json num(double v);
double num_from(const nlohmann::json& j);

/// p, q in (1, inf], 1/r = 1/p + 1/q in (0, 3/2).
struct Exponents {
    double p = 2.0, q = 2.0, r = 1.0;
};
void check_exponents(const Exponents& e);
std::string to_string(const Exponents& e);

/// Random sums of 1..max_bumps modulated bumps; parameters are drawn once and
/// sampled on any grid.
struct EnsembleSpec {
    int size = 50;
    int max_bumps = 3;
    double center = 0.0;
    double spread = 16.0;      // centres in center +- spread
    double width_lo = 4.0, width_hi = 12.0;
    double max_freq = 0.25;    // modulation in cycles
};

struct BumpSum {
    std::vector<double> centers, widths, freqs;
    std::vector<cplx> amps;
    SampledFunction sample(const Grid& g) const;
};
BumpSum random_bump_sum(const EnsembleSpec& e, Rng& rng);

// ---- off-diagonal decay
struct OffdiagConfig {
    Interval I{0.0, 1.0};
    int k_min = 0, k_max = 6;
    double period = 192.0;
    std::size_t n = 256;
    double width = 8.0;        // |E| = |F|
    int probes = 5;            // bump positions per set
    double probe_width = 4.0;  // ignored when probes = 1 (one bump filling the set)
    double sharpness = 8.0;
    Exponents exps{2.0, 2.0, 1.0};
    double delta_min = 2.0;
    double floor = 1e-13;      // ratios below this count as zero
};
/// E sits left of I and F right of I, each at distance D = 2^k |I|. The ratio is the max of
/// |T(f,g)|_{r,I} / (|f|_p |g|_q) over probes x probes bump pairs with f in E and g in F;
/// ratio_single uses one bump filling each set. delta is minus the slope of log ratio
/// against log(1 + D/|I|), both sets moving together.
ExperimentReport offdiag_decay(const Symbol& s, const OffdiagConfig& cfg);

// ---- Holder sweep and its weighted version
struct HolderConfig {
    std::vector<Exponents> triples{{2.0, 2.0, 1.0}, {4.0, 4.0, 2.0}, {2.0, kInf, 2.0}};
    double period = 64.0;
    std::size_t n = 128;       // measured at n and 2n
    EnsembleSpec ensemble;
    std::uint64_t seed = 1;
    double growth_max = 2.0;
};
ExperimentReport holder_sweep(const Symbol& s, const HolderConfig& cfg);
/// |T|_{r,w} / (|f|_{p,w} |g|_{q,w}) with T = T(f,g) already evaluated and w sampled on the grid.
double holder_ratio(const SampledFunction& T, const SampledFunction& f, const SampledFunction& g, const Exponents& e,
                    const RVec& w);

struct WeightCheckSpec {
    double box = 64.0;
    double step = 0.125;
    int K = 6;
    double ceiling = 1e3;
};
/// Throws PreconditionError unless w passes weight_class_check for (w.theta, w.l).
ExperimentReport weighted_continuity(const Symbol& s, const Weight& w, const HolderConfig& cfg,
                                     const WeightCheckSpec& check = {});

// ---- restricted weak type
using TrilinearForm =
    std::function<cplx(const SampledFunction&, const SampledFunction&, const SampledFunction&)>;
/// h sum T(f1,f2) f3
TrilinearForm symbol_form(const Symbol& s);

struct ExceptionalSet {
    int alpha = 0;
    double eta = 0.0;
    Mask U;
    Mask E_alpha_prime;
    double measure_U = 0.0;
    double measure_E_alpha = 0.0;
    bool certified = false;    // |U| <= |E_alpha| / 2
};
/// U = {max_i M(1_{E_i}) |E_alpha| / |E_i| > eta} with the smallest eta giving |U| <= |E_alpha|/2.
ExceptionalSet exceptional_set(const std::array<Mask, 3>& E, const Grid& g, int alpha);

struct RestrictedConfig {
    std::array<double, 3> p{1.0 / 0.6, 1.0 / 0.6, -5.0};
    double period = 64.0;
    std::size_t n = 128;       // measured at n and 2n
    int set_triples = 100;
    int samples = 8;           // per family per triple
    int max_pieces = 3;
    double spread = 16.0;
    double cell = 0.5;         // set endpoints and pattern cells on cell Z
    double mollify = 2.0;      // width of the smoothing bump
    std::uint64_t seed = 1;
    double growth_max = 2.0;
};
/// Index of the negative exponent; ParameterError unless sum 1/p = 1 with exactly
/// one negative, -1/2 < 1/p_alpha < 0.
int restricted_alpha(const std::array<double, 3>& p);
ExperimentReport restricted_type_harness(const TrilinearForm& form, const RestrictedConfig& cfg);

// ---- large intervals
struct LimsupConfig {
    double r = 1.0;
    RVec lengths{1, 2, 4, 8, 16, 32, 64, 128};
    double center = 0.0;
    double ceiling = 10.0;
};
/// ((1/|I|) int_I |T(f,g)|^r)^{1/r} over intervals of the given lengths.
ExperimentReport limsup_bound(const Symbol& s, const SampledFunction& f, const SampledFunction& g,
                              const LimsupConfig& cfg);

// ---- local estimate
struct LocalConfig {
    Interval I{0.0, 1.0};
    Exponents exps{2.0, 2.0, 1.0};
    double delta = 1.0;
    double period = 64.0;
    std::size_t n = 256;       // measured at n and 2n
    EnsembleSpec ensemble{20, 2, 0.0, 2.0, 1.0, 4.0, 0.25};
    std::uint64_t seed = 1;
    double growth_max = 2.0;
};
/// Terms 2^{-k delta} ((1/|2^{k+1} I|) int_{C_k(I)} |f|^p)^{1/p}, k = 0..max corona index.
RVec corona_terms(const SampledFunction& f, const Interval& I, double p, double delta);
/// inf over I of M(|f|^p)^{1/p}; p = inf gives max |f|.
double hl_majorant(const SampledFunction& f, const Interval& I, double p);
ExperimentReport local_estimate_check(const Symbol& s, const LocalConfig& cfg);

}  // namespace bilop
