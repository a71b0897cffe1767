#include "bilop/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace bilop {

Symbol make_symbol(const SymbolSpec& spec) {
    Symbol s;
    if (spec.kind == "product") {
        s = product_symbol();
    } else if (spec.kind == "bht_sign") {
        s = bht_sign_symbol(SingularLine(spec.l1, spec.l2));
    } else if (spec.kind == "table") {
        if (spec.path.empty()) throw ParameterError("make_symbol: kind table needs a path");
        s = load_symbol_table(spec.path);
    } else {
        throw ParameterError("make_symbol: unknown kind '" + spec.kind + "'");
    }
    if (spec.truncate > 0.0) s = truncate_near_line(s, SingularLine(spec.l1, spec.l2), spec.truncate);
    if (spec.scale != 1.0) s = scaled_symbol(s, spec.scale);
    return s;
}

namespace {

const std::vector<std::pair<ExperimentKind, const char*>> kKinds{
    {ExperimentKind::OffdiagDecay, "offdiag_decay"},
    {ExperimentKind::HolderSweep, "holder_sweep"},
    {ExperimentKind::WeightedContinuity, "weighted_continuity"},
    {ExperimentKind::RestrictedType, "restricted_type"},
    {ExperimentKind::LimsupBound, "limsup_bound"},
    {ExperimentKind::LocalEstimate, "local_estimate"},
};

}  // namespace

const char* to_string(ExperimentKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "?";
}

std::optional<ExperimentKind> parse_kind(const std::string& s) {
    for (const auto& [kind, name] : kKinds)
        if (s == name) return kind;
    return std::nullopt;
}

EnsembleSpec EnsembleKeys::apply(EnsembleSpec b) const {
    if (size) b.size = *size;
    if (max_bumps) b.max_bumps = *max_bumps;
    if (center) b.center = *center;
    if (spread) b.spread = *spread;
    if (width_lo) b.width_lo = *width_lo;
    if (width_hi) b.width_hi = *width_hi;
    if (max_freq) b.max_freq = *max_freq;
    return b;
}

std::string to_string(const ConfigIssue& e) {
    std::string s = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "";
    if (!e.key.empty()) s += e.key + ": ";
    return s + e.message;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

// ---- scalar values

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty() || std::isnan(v)) return std::nullopt;
    return v;
}

template <class I>
std::optional<I> to_integer(const std::string& s) {
    I v{};
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
    return v;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string fmt_list(const RVec& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

std::optional<RVec> to_list(const std::string& s) {
    RVec out;
    for (const auto& part : split(s, ',')) {
        const auto v = to_double(part);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

// ---- key registry

using Setter = std::function<std::string(RunConfig&, const std::string&)>;  // error message or ""
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Field {
    std::string key;
    Setter set;
    Getter get;
};

using Check = std::function<std::string(double)>;

Check positive() {
    return [](double v) { return v > 0.0 && std::isfinite(v) ? "" : "must be a finite number > 0"; };
}
Check finite() {
    return [](double v) { return std::isfinite(v) ? "" : "must be finite"; };
}
Check nonnegative() {
    return [](double v) { return v >= 0.0 && std::isfinite(v) ? "" : "must be a finite number >= 0"; };
}

Field real(std::string key, std::function<double&(RunConfig&)> ref, Check check) {
    return {key,
            [ref, check](RunConfig& c, const std::string& s) -> std::string {
                const auto v = to_double(s);
                if (!v) return "expected a number, got '" + s + "'";
                if (const std::string e = check(*v); !e.empty()) return e;
                ref(c) = *v;
                return "";
            },
            [ref](const RunConfig& c) -> std::optional<std::string> {
                return fmt(ref(const_cast<RunConfig&>(c)));
            }};
}

template <class T>
Field optional_real(std::string key, std::function<std::optional<T>&(RunConfig&)> ref, Check check) {
    return {key,
            [ref, check](RunConfig& c, const std::string& s) -> std::string {
                if constexpr (std::is_integral_v<T>) {
                    const auto v = to_integer<T>(s);
                    if (!v) return "expected an integer, got '" + s + "'";
                    if (const std::string e = check(double(*v)); !e.empty()) return e;
                    ref(c) = *v;
                } else {
                    const auto v = to_double(s);
                    if (!v) return "expected a number, got '" + s + "'";
                    if (const std::string e = check(*v); !e.empty()) return e;
                    ref(c) = *v;
                }
                return "";
            },
            [ref](const RunConfig& c) -> std::optional<std::string> {
                const auto& v = ref(const_cast<RunConfig&>(c));
                if (!v) return std::nullopt;
                if constexpr (std::is_integral_v<T>) return std::to_string(*v);
                else return fmt(*v);
            }};
}

Field integer(std::string key, std::function<int&(RunConfig&)> ref, int lo, int hi) {
    return {key,
            [ref, lo, hi](RunConfig& c, const std::string& s) -> std::string {
                const auto v = to_integer<int>(s);
                if (!v) return "expected an integer, got '" + s + "'";
                if (*v < lo || *v > hi)
                    return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
                ref(c) = *v;
                return "";
            },
            [ref](const RunConfig& c) -> std::optional<std::string> {
                return std::to_string(ref(const_cast<RunConfig&>(c)));
            }};
}

Field text(std::string key, std::function<std::string&(RunConfig&)> ref, std::vector<std::string> allowed = {},
           bool emit_empty = false) {
    return {key,
            [ref, allowed](RunConfig& c, const std::string& s) -> std::string {
                if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
                    std::string list;
                    for (const auto& a : allowed) list += (list.empty() ? "" : " | ") + a;
                    return "expected one of " + list + ", got '" + s + "'";
                }
                if (s.empty()) return "must not be empty";
                ref(c) = s;
                return "";
            },
            [ref, emit_empty](const RunConfig& c) -> std::optional<std::string> {
                const std::string& v = ref(const_cast<RunConfig&>(c));
                if (v.empty() && !emit_empty) return std::nullopt;
                return v;
            }};
}

std::string triples_text(const std::vector<Exponents>& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i)
        s += (i ? "; " : "") + fmt(t[i].p) + ", " + fmt(t[i].q) + ", " + fmt(t[i].r);
    return s;
}

const std::vector<Field>& registry() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back({"kind",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         const auto k = parse_kind(s);
                         if (!k) {
                             std::string list;
                             for (const auto& [kind, name] : kKinds) list += (list.empty() ? "" : " | ") + std::string(name);
                             return "expected one of " + list + ", got '" + s + "'";
                         }
                         c.kind = *k;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return std::string(to_string(c.kind)); }});
        f.push_back({"seed",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         const auto v = to_integer<std::uint64_t>(s);
                         if (!v) return "expected a nonnegative integer, got '" + s + "'";
                         c.seed = *v;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }});
        f.push_back(text("output", [](RunConfig& c) -> std::string& { return c.output; }, {}, true));

        f.push_back(text("symbol.kind", [](RunConfig& c) -> std::string& { return c.symbol.kind; },
                         {"product", "bht_sign", "table"}));
        f.push_back(real("symbol.l1", [](RunConfig& c) -> double& { return c.symbol.l1; }, finite()));
        f.push_back(real("symbol.l2", [](RunConfig& c) -> double& { return c.symbol.l2; }, finite()));
        f.push_back(real("symbol.truncate", [](RunConfig& c) -> double& { return c.symbol.truncate; }, nonnegative()));
        f.push_back(real("symbol.scale", [](RunConfig& c) -> double& { return c.symbol.scale; }, finite()));
        f.push_back(text("symbol.path", [](RunConfig& c) -> std::string& { return c.symbol.path; }));

        f.push_back({"grid.n",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         const auto v = to_integer<std::size_t>(s);
                         if (!v) return "expected a positive integer, got '" + s + "'";
                         if (!is_pow2(*v) || *v < 8) return "must be a power of two >= 8, got " + s;
                         c.n = *v;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.n); }});
        f.push_back(optional_real<double>("grid.period",
                                          [](RunConfig& c) -> std::optional<double>& { return c.period; }, positive()));

        f.push_back({"exponents.triples",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         std::vector<Exponents> out;
                         for (const auto& part : split(s, ';')) {
                             const auto v = to_list(part);
                             if (!v || v->size() != 3) return "expected 'p, q, r; ...', got '" + part + "'";
                             const Exponents e{(*v)[0], (*v)[1], (*v)[2]};
                             try {
                                 check_exponents(e);
                             } catch (const ParameterError& err) {
                                 return err.what();
                             }
                             out.push_back(e);
                         }
                         if (out.empty()) return "expected at least one triple";
                         c.triples = out;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (c.triples.empty()) return std::nullopt;
                         return triples_text(c.triples);
                     }});

        f.push_back(real("interval.center", [](RunConfig& c) -> double& { return c.interval.center; }, finite()));
        f.push_back(real("interval.length", [](RunConfig& c) -> double& { return c.interval.length; }, positive()));

        f.push_back(text("weight.kind", [](RunConfig& c) -> std::string& { return c.weight.kind; },
                         {"const", "poly", "exp"}, true));
        f.push_back(real("weight.value", [](RunConfig& c) -> double& { return c.weight.value; }, positive()));
        f.push_back(real("weight.alpha", [](RunConfig& c) -> double& { return c.weight.alpha; }, finite()));
        f.push_back(integer("weight.sign", [](RunConfig& c) -> int& { return c.weight.sign; }, -1, 1));
        f.push_back(real("weight.rate", [](RunConfig& c) -> double& { return c.weight.rate; }, finite()));
        f.push_back(real("weight.theta", [](RunConfig& c) -> double& { return c.weight.theta; }, nonnegative()));
        f.push_back(real("weight.l", [](RunConfig& c) -> double& { return c.weight.l; }, positive()));

        f.push_back(integer("ladder.k_min", [](RunConfig& c) -> int& { return c.k_min; }, 0, 30));
        f.push_back(integer("ladder.k_max", [](RunConfig& c) -> int& { return c.k_max; }, 0, 30));
        f.push_back({"ladder.lengths",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         const auto v = to_list(s);
                         if (!v) return "expected a comma-separated list of numbers, got '" + s + "'";
                         for (double x : *v)
                             if (!(x > 0.0) || !std::isfinite(x)) return "lengths must be finite and > 0";
                         if (!std::is_sorted(v->begin(), v->end())) return "lengths must be increasing";
                         c.lengths = *v;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return fmt_list(c.lengths); }});

        const auto at_least_one = [](double v) { return v >= 1.0 ? "" : "must be >= 1"; };
        f.push_back(optional_real<int>("ensemble.size",
                                       [](RunConfig& c) -> std::optional<int>& { return c.ensemble.size; }, at_least_one));
        f.push_back(optional_real<int>("ensemble.max_bumps",
                                       [](RunConfig& c) -> std::optional<int>& { return c.ensemble.max_bumps; },
                                       at_least_one));
        f.push_back(optional_real<double>("ensemble.center",
                                          [](RunConfig& c) -> std::optional<double>& { return c.ensemble.center; },
                                          finite()));
        f.push_back(optional_real<double>("ensemble.spread",
                                          [](RunConfig& c) -> std::optional<double>& { return c.ensemble.spread; },
                                          nonnegative()));
        f.push_back(optional_real<double>("ensemble.width_lo",
                                          [](RunConfig& c) -> std::optional<double>& { return c.ensemble.width_lo; },
                                          positive()));
        f.push_back(optional_real<double>("ensemble.width_hi",
                                          [](RunConfig& c) -> std::optional<double>& { return c.ensemble.width_hi; },
                                          positive()));
        f.push_back(optional_real<double>("ensemble.max_freq",
                                          [](RunConfig& c) -> std::optional<double>& { return c.ensemble.max_freq; },
                                          nonnegative()));

        f.push_back(real("stability.growth_max", [](RunConfig& c) -> double& { return c.growth_max; },
                         [](double v) { return v > 1.0 && std::isfinite(v) ? "" : "must be a finite number > 1"; }));

        f.push_back(real("offdiag.width", [](RunConfig& c) -> double& { return c.offdiag.width; }, positive()));
        f.push_back(real("offdiag.sharpness", [](RunConfig& c) -> double& { return c.offdiag.sharpness; }, positive()));
        f.push_back(integer("offdiag.probes", [](RunConfig& c) -> int& { return c.offdiag.probes; }, 1, 64));
        f.push_back(real("offdiag.probe_width", [](RunConfig& c) -> double& { return c.offdiag.probe_width; },
                         positive()));
        f.push_back(real("offdiag.delta_min", [](RunConfig& c) -> double& { return c.offdiag.delta_min; }, finite()));
        f.push_back(real("offdiag.floor", [](RunConfig& c) -> double& { return c.offdiag.floor; }, nonnegative()));

        f.push_back({"restricted.p",
                     [](RunConfig& c, const std::string& s) -> std::string {
                         const auto v = to_list(s);
                         if (!v || v->size() != 3) return "expected three exponents, got '" + s + "'";
                         const std::array<double, 3> p{(*v)[0], (*v)[1], (*v)[2]};
                         try {
                             restricted_alpha(p);
                         } catch (const ParameterError& e) {
                             return e.what();
                         }
                         c.restricted.p = p;
                         return "";
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return fmt_list({c.restricted.p[0], c.restricted.p[1], c.restricted.p[2]});
                     }});
        f.push_back(integer("restricted.set_triples", [](RunConfig& c) -> int& { return c.restricted.set_triples; },
                            1, 100000));
        f.push_back(integer("restricted.samples", [](RunConfig& c) -> int& { return c.restricted.samples; }, 1, 10000));
        f.push_back(integer("restricted.max_pieces", [](RunConfig& c) -> int& { return c.restricted.max_pieces; }, 1,
                            64));
        f.push_back(real("restricted.spread", [](RunConfig& c) -> double& { return c.restricted.spread; }, positive()));
        f.push_back(real("restricted.cell", [](RunConfig& c) -> double& { return c.restricted.cell; }, positive()));
        f.push_back(real("restricted.mollify", [](RunConfig& c) -> double& { return c.restricted.mollify; },
                         positive()));

        f.push_back(real("limsup.r", [](RunConfig& c) -> double& { return c.limsup.r; }, positive()));
        f.push_back(real("limsup.center", [](RunConfig& c) -> double& { return c.limsup.center; }, finite()));
        f.push_back(real("limsup.ceiling", [](RunConfig& c) -> double& { return c.limsup.ceiling; }, positive()));

        f.push_back(real("local.delta", [](RunConfig& c) -> double& { return c.local_delta; }, positive()));

        f.push_back(text("input.f", [](RunConfig& c) -> std::string& { return c.input_f; }));
        f.push_back(text("input.g", [](RunConfig& c) -> std::string& { return c.input_g; }));
        return f;
    }();
    return fields;
}

const Field* find_field(const std::string& key) {
    for (const auto& f : registry())
        if (f.key == key) return &f;
    return nullptr;
}

// checks that involve several keys
void cross_check(const RunConfig& c, std::vector<ConfigIssue>& errors, const std::map<std::string, int>& lines) {
    const auto line_of = [&](const std::string& k) {
        const auto it = lines.find(k);
        return it == lines.end() ? 0 : it->second;
    };
    if (c.symbol.kind == "table" && c.symbol.path.empty())
        errors.push_back({line_of("symbol.kind"), "symbol.path", "required when symbol.kind = table"});
    if (c.k_min > c.k_max) errors.push_back({line_of("ladder.k_max"), "ladder.k_max", "must be >= ladder.k_min"});
    const bool single = c.kind == ExperimentKind::OffdiagDecay || c.kind == ExperimentKind::LocalEstimate;
    if (single && c.triples.size() > 1)
        errors.push_back({line_of("exponents.triples"), "exponents.triples",
                          std::string(to_string(c.kind)) + " takes a single triple"});
    if (c.offdiag.probes > 1 && c.offdiag.probe_width > c.offdiag.width)
        errors.push_back({line_of("offdiag.probe_width"), "offdiag.probe_width", "must be <= offdiag.width"});
    const EnsembleSpec e = c.ensemble.apply({});
    if (e.width_lo > e.width_hi)
        errors.push_back({line_of("ensemble.width_hi"), "ensemble.width_hi", "must be >= ensemble.width_lo"});
    if (c.input_f.empty() != c.input_g.empty())
        errors.push_back({line_of(c.input_f.empty() ? "input.g" : "input.f"), "input",
                          "input.f and input.g must be given together"});
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : registry()) keys.push_back(f.key);
    return keys;
}

std::vector<std::string> required_config_keys() { return {"kind", "symbol.kind", "grid.n", "seed"}; }

ConfigResult parse_config(const std::string& text,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigResult res;
    RunConfig c;
    std::map<std::string, int> lines;   // key -> line where it was set
    std::set<std::string> seen, present;

    const auto apply = [&](const std::string& key, const std::string& value, int line, bool file) {
        const Field* f = find_field(key);
        if (!f) {
            res.errors.push_back({line, key, "unknown key"});
            return;
        }
        present.insert(key);
        if (file && seen.count(key)) {
            res.errors.push_back({line, key, "duplicate key (first set on line " + std::to_string(lines[key]) + ")"});
            return;
        }
        if (const std::string e = f->set(c, value); !e.empty()) {
            res.errors.push_back({line, key, e});
            return;
        }
        seen.insert(key);
        lines[key] = line;
    };

    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = raw;
        if (const auto hash = s.find_first_of("#;"); hash != std::string::npos) {
            // ';' only opens a comment at the start of a line
            if (s[hash] == '#' || trim(s.substr(0, hash)).empty()) s = s.substr(0, hash);
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                res.errors.push_back({line, "", "malformed section header '" + s + "'"});
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            res.errors.push_back({line, "", "expected key = value, got '" + s + "'"});
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) {
            res.errors.push_back({line, "", "missing key before '='"});
            continue;
        }
        apply(section.empty() ? key : section + "." + key, trim(s.substr(eq + 1)), line, true);
    }
    for (const auto& [k, v] : overrides) apply(k, trim(v), 0, false);

    for (const auto& k : required_config_keys())
        if (!present.count(k)) res.errors.push_back({0, k, "missing required key"});
    if (res.errors.empty()) cross_check(c, res.errors, lines);
    if (res.errors.empty()) res.config = c;
    return res;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    std::string section;
    for (const auto& f : registry()) {
        const auto v = f.get(c);
        if (!v) continue;
        const auto dot = f.key.find('.');
        const std::string sec = dot == std::string::npos ? "" : f.key.substr(0, dot);
        const std::string name = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
        if (sec != section) {
            os << "\n[" << sec << "]\n";
            section = sec;
        }
        os << name << " = " << *v << "\n";
    }
    return os.str();
}

bool RunConfig::operator==(const RunConfig& o) const { return serialize_config(*this) == serialize_config(o); }

// ---------------------------------------------------------------- running

namespace {

double default_period(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::OffdiagDecay: return OffdiagConfig{}.period;
        case ExperimentKind::LimsupBound: return 256.0;
        default: return 64.0;
    }
}

SampledFunction load_input(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    return ext == ".csv" ? load_csv(path) : load_binary(path);
}

HolderConfig holder_config(const RunConfig& c) {
    HolderConfig h;
    if (!c.triples.empty()) h.triples = c.triples;
    h.period = c.period.value_or(default_period(c.kind));
    h.n = c.n;
    h.ensemble = c.ensemble.apply(h.ensemble);
    h.seed = c.seed;
    h.growth_max = c.growth_max;
    return h;
}

}  // namespace

ExperimentReport run_experiment(const RunConfig& c) {
    const Symbol s = make_symbol(c.symbol);
    const double period = c.period.value_or(default_period(c.kind));
    ExperimentReport r;
    switch (c.kind) {
        case ExperimentKind::OffdiagDecay: {
            OffdiagConfig o = c.offdiag;
            o.I = c.interval;
            o.k_min = c.k_min;
            o.k_max = c.k_max;
            o.period = period;
            o.n = c.n;
            if (!c.triples.empty()) o.exps = c.triples.front();
            r = offdiag_decay(s, o);
            break;
        }
        case ExperimentKind::HolderSweep: r = holder_sweep(s, holder_config(c)); break;
        case ExperimentKind::WeightedContinuity: r = weighted_continuity(s, make_weight(c.weight), holder_config(c)); break;
        case ExperimentKind::RestrictedType: {
            RestrictedConfig o = c.restricted;
            o.period = period;
            o.n = c.n;
            o.seed = c.seed;
            o.growth_max = c.growth_max;
            r = restricted_type_harness(symbol_form(s), o);
            r.config["symbol"] = nlohmann::json{{"name", s.name}};
            break;
        }
        case ExperimentKind::LimsupBound: {
            LimsupConfig o = c.limsup;
            o.lengths = c.lengths;
            const Grid g = Grid::centered(period, c.n);
            SampledFunction f(g), h(g);
            if (!c.input_f.empty()) {
                f = load_input(c.input_f);
                h = load_input(c.input_g);
                if (f.grid.count != g.count || h.grid.count != g.count || f.grid.period() != g.period() ||
                    h.grid.period() != g.period())
                    throw ParameterError("limsup_bound: input grids must match grid.n and grid.period");
            } else {
                f = make_bump(-1.0, 3.0, g);
                h = make_bump(1.5, 4.0, g);
                f = (1.0 / lp_norm(f, kInf)) * f;
                h = (1.0 / lp_norm(h, kInf)) * h;
            }
            r = limsup_bound(s, f, h, o);
            break;
        }
        case ExperimentKind::LocalEstimate: {
            LocalConfig o;
            o.I = c.interval;
            if (!c.triples.empty()) o.exps = c.triples.front();
            o.delta = c.local_delta;
            o.period = period;
            o.n = c.n;
            o.ensemble = c.ensemble.apply(o.ensemble);
            o.seed = c.seed;
            o.growth_max = c.growth_max;
            r = local_estimate_check(s, o);
            break;
        }
    }
    r.seed = c.seed;
    return r;
}

int run(const RunConfig& c, std::ostream& err) {
    try {
        const ExperimentReport r = run_experiment(c);
        write_report(r, c.output);
        return r.pass() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace bilop
