#pragma once

#include "bilop/experiments.hpp"
#include "bilop/symbol.hpp"
#include "bilop/weights.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bilop {

/// kind = product | bht_sign | table. truncate = L of truncate_near_line, 0 for none.
struct SymbolSpec {
    std::string kind;
    double l1 = 1.0;
    double l2 = -1.0;
    double truncate = 0.0;
    double scale = 1.0;
    std::string path;          // table file

    bool operator==(const SymbolSpec&) const = default;
};

Symbol make_symbol(const SymbolSpec& spec);

enum class ExperimentKind { OffdiagDecay, HolderSweep, WeightedContinuity, RestrictedType, LimsupBound, LocalEstimate };
const char* to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);

/// Ensemble keys that were set; the rest come from the experiment's own default.
struct EnsembleKeys {
    std::optional<int> size, max_bumps;
    std::optional<double> center, spread, width_lo, width_hi, max_freq;
    EnsembleSpec apply(EnsembleSpec base) const;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::HolderSweep;
    SymbolSpec symbol;
    std::size_t n = 0;
    std::optional<double> period;          // default depends on kind
    std::vector<Exponents> triples;        // empty: the experiment default
    Interval interval{0.0, 1.0};
    WeightSpec weight;
    int k_min = 0, k_max = 6;
    RVec lengths{1, 2, 4, 8, 16, 32, 64, 128};
    EnsembleKeys ensemble;
    std::uint64_t seed = 0;
    std::string output = "out";
    double growth_max = 2.0;
    OffdiagConfig offdiag;                 // width, sharpness, probes, probe_width, delta_min, floor
    RestrictedConfig restricted;           // p, set_triples, samples, max_pieces, spread, cell, mollify
    LimsupConfig limsup;                   // r, center, ceiling
    double local_delta = 1.0;
    std::string input_f, input_g;          // optional sampled inputs for limsup_bound

    bool operator==(const RunConfig& o) const;
};

struct ConfigIssue {
    int line = 0;              // 0 for a missing key or a command-line flag
    std::string key;
    std::string message;
};
std::string to_string(const ConfigIssue& e);

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<ConfigIssue> errors;
    bool ok() const { return config.has_value(); }
};

/// Lines of key = value with [section] headers; '#' and ';' start comments.
/// Keys inside a section are prefixed by it; dotted keys may also appear before any section.
/// overrides are applied after the text, in order.
ConfigResult parse_config(const std::string& text,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});
/// Canonical text; parse_config(serialize_config(c)) gives c back.
std::string serialize_config(const RunConfig& c);
/// Every accepted dotted key, in canonical order.
std::vector<std::string> config_keys();
std::vector<std::string> required_config_keys();

/// The experiment the config describes, without writing anything.
ExperimentReport run_experiment(const RunConfig& c);
/// Runs, writes report.json and CSV tables into c.output. 0 if every verdict passes,
/// 1 on any FAIL, 2 on an execution or IO error (diagnostic on err).
int run(const RunConfig& c, std::ostream& err);

}  // namespace bilop
