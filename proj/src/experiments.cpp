#include "bilop/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace bilop {

using nlohmann::json;

// ---------------------------------------------------------------- reports

RVec Table::column(const std::string& c) const {
    const auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw ParameterError("table " + name + ": no column " + c);
    const auto i = static_cast<std::size_t>(it - columns.begin());
    RVec out;
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
}

bool ExperimentReport::pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Table& ExperimentReport::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return t;
    throw ParameterError("report " + id + ": no table " + name);
}

const Verdict& ExperimentReport::verdict(const std::string& name) const {
    for (const auto& v : verdicts)
        if (v.name == name) return v;
    throw ParameterError("report " + id + ": no verdict " + name);
}

const Fit& ExperimentReport::fit(const std::string& name) const {
    for (const auto& f : fits)
        if (f.name == name) return f;
    throw ParameterError("report " + id + ": no fit " + name);
}

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ShapeError("report: bad number '" + s + "'");
}

json report_to_json(const ExperimentReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["id"] = r.id;
    j["config"] = r.config;
    j["seed"] = r.seed;
    json tabs = json::array();
    for (const auto& t : r.tables) {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json jr = json::array();
            for (double v : row) jr.push_back(num(v));
            rows.push_back(jr);
        }
        tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["tables"] = tabs;
    json fits = json::array();
    for (const auto& f : r.fits)
        fits.push_back({{"name", f.name},
                        {"exponent", num(f.exponent)},
                        {"intercept", num(f.intercept)},
                        {"residual", num(f.residual)},
                        {"points", f.points}});
    j["fits"] = fits;
    json vs = json::array();
    for (const auto& v : r.verdicts)
        vs.push_back({{"name", v.name},
                      {"pass", v.pass},
                      {"value", num(v.value)},
                      {"threshold", num(v.threshold)},
                      {"rule", v.rule}});
    j["verdicts"] = vs;
    j["pass"] = r.pass();
    j["run"] = {{"timestamp", r.timestamp}, {"wall_time_s", r.wall_time}};
    return j;
}

ExperimentReport report_from_json(const json& j) {
    if (!j.contains("schema") || j["schema"] != kReportSchema) throw ShapeError("report: unknown schema");
    ExperimentReport r;
    r.id = j.at("id").get<std::string>();
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("tables")) {
        Table tab{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
        for (const auto& row : t.at("rows")) {
            RVec v;
            for (const auto& x : row) v.push_back(num_from(x));
            tab.rows.push_back(std::move(v));
        }
        r.tables.push_back(std::move(tab));
    }
    for (const auto& f : j.at("fits"))
        r.fits.push_back({f.at("name").get<std::string>(), num_from(f.at("exponent")), num_from(f.at("intercept")),
                          num_from(f.at("residual")), f.at("points").get<std::size_t>()});
    for (const auto& v : j.at("verdicts"))
        r.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(), num_from(v.at("value")),
                              num_from(v.at("threshold")), v.at("rule").get<std::string>()});
    if (j.contains("run")) {
        r.timestamp = j["run"].value("timestamp", "");
        r.wall_time = j["run"].value("wall_time_s", 0.0);
    }
    return r;
}

std::string deterministic_dump(const ExperimentReport& r) {
    json j = report_to_json(r);
    j.erase("run");
    return j.dump(2);
}

void write_table_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n" << std::setprecision(17);
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

void write_report(const ExperimentReport& r, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw EvaluationError("write_report: cannot create " + dir + ": " + ec.message());
    {
        std::ofstream os(fs::path(dir) / "report.json");
        if (!os) throw EvaluationError("write_report: cannot write report.json in " + dir);
        os << report_to_json(r).dump(2) << "\n";
    }
    for (const auto& t : r.tables) {
        std::ofstream os(fs::path(dir) / (t.name + ".csv"));
        if (!os) throw EvaluationError("write_report: cannot write " + t.name + ".csv");
        write_table_csv(os, t);
    }
}

std::string render_report(const json& j) {
    const ExperimentReport r = report_from_json(j);
    std::ostringstream os;
    os << std::setprecision(6);
    os << "experiment " << r.id << "  seed " << r.seed << "  " << (r.pass() ? "PASS" : "FAIL") << "\n";
    if (!r.timestamp.empty()) os << "run " << r.timestamp << "  " << r.wall_time << " s\n";
    os << "config " << r.config.dump() << "\n";
    for (const auto& v : r.verdicts)
        os << (v.pass ? "  PASS " : "  FAIL ") << v.name << ": " << v.value << " (" << v.rule << ", threshold "
           << v.threshold << ")\n";
    for (const auto& f : r.fits)
        os << "  fit " << f.name << ": exponent " << f.exponent << ", residual " << f.residual << ", " << f.points
           << " points\n";
    for (const auto& t : r.tables) {
        os << "table " << t.name << " (" << t.rows.size() << " rows)\n";
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "  " : "  ") << std::setw(12) << t.columns[i];
        os << "\n";
        const std::size_t shown = std::min<std::size_t>(t.rows.size(), 20);
        for (std::size_t k = 0; k < shown; ++k) {
            for (double v : t.rows[k]) os << "  " << std::setw(12) << v;
            os << "\n";
        }
        if (shown < t.rows.size()) os << "  ... " << t.rows.size() - shown << " more rows\n";
    }
    return os.str();
}

namespace {

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void stamp(ExperimentReport& r, const Stopwatch& sw) {
    r.wall_time = sw.seconds();
    r.timestamp = utc_now();
}

json symbol_json(const Symbol& s) {
    json j{{"name", s.name}, {"x_dependent", s.x_dependent}, {"truncation", s.truncation}};
    if (s.line) j["line"] = {s.line->l1, s.line->l2};
    return j;
}

json exps_json(const Exponents& e) { return {{"p", num(e.p)}, {"q", num(e.q)}, {"r", num(e.r)}}; }

json ensemble_json(const EnsembleSpec& e) {
    return {{"size", e.size},         {"max_bumps", e.max_bumps}, {"center", e.center}, {"spread", e.spread},
            {"width_lo", e.width_lo}, {"width_hi", e.width_hi},   {"max_freq", e.max_freq}};
}

Fit loglog_fit(const std::string& name, const RVec& x, const RVec& y) {
    Fit f;
    f.name = name;
    f.points = x.size();
    if (x.size() < 2) {
        f.exponent = kInf;
        return f;
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    f.exponent = -slope;
    f.intercept = my - slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + slope * x[i]);
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

}  // namespace

void check_exponents(const Exponents& e) {
    if (!(e.p > 1.0) || !(e.q > 1.0))
        throw ParameterError("exponents: need 1 < p, q <= inf (got " + to_string(e) + ")");
    const double ir = 1.0 / e.p + 1.0 / e.q;
    if (!(ir > 0.0 && ir < 1.5)) throw ParameterError("exponents: need 0 < 1/p + 1/q < 3/2 (got " + to_string(e) + ")");
    if (!(e.r > 0.0) || std::abs(1.0 / e.r - ir) > 1e-12)
        throw ParameterError("exponents: need 1/r = 1/p + 1/q (got " + to_string(e) + ")");
}

std::string to_string(const Exponents& e) {
    auto s = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        std::ostringstream os;
        os << v;
        return os.str();
    };
    return "(" + s(e.p) + "," + s(e.q) + "," + s(e.r) + ")";
}

SampledFunction BumpSum::sample(const Grid& g) const {
    SampledFunction out(g);
    for (std::size_t b = 0; b < centers.size(); ++b) {
        const SampledFunction v = make_bump(centers[b], widths[b], g);
        for (std::size_t j = 0; j < g.count; ++j)
            out[j] += amps[b] * v[j] * std::polar(1.0, kTwoPi * freqs[b] * g.x(j));
    }
    return out;
}

BumpSum random_bump_sum(const EnsembleSpec& e, Rng& rng) {
    BumpSum s;
    const int k = rng.integer(1, std::max(1, e.max_bumps));
    for (int i = 0; i < k; ++i) {
        s.centers.push_back(e.center + rng.uniform(-e.spread, e.spread));
        s.widths.push_back(rng.uniform(e.width_lo, e.width_hi));
        s.freqs.push_back(rng.uniform(-e.max_freq, e.max_freq));
        s.amps.push_back(std::polar(rng.uniform(0.25, 1.0), rng.uniform(0.0, kTwoPi)));
    }
    return s;
}

// ---------------------------------------------------------------- off-diagonal decay

ExperimentReport offdiag_decay(const Symbol& s, const OffdiagConfig& cfg) {
    Stopwatch sw;
    check_exponents(cfg.exps);
    if (cfg.k_min < 0 || cfg.k_max < cfg.k_min) throw ParameterError("offdiag_decay: need 0 <= k_min <= k_max");
    if (cfg.probes < 1 || (cfg.probes > 1 && !(cfg.probe_width > 0.0 && cfg.probe_width <= cfg.width)))
        throw ParameterError("offdiag_decay: need probes >= 1 and 0 < probe_width <= width");
    const Grid g = Grid::centered(cfg.period, cfg.n);
    const Interval& I = cfg.I;
    const double reach = std::ldexp(I.length, cfg.k_max) + cfg.width + 0.5 * I.length;
    if (std::abs(I.center) + reach > 0.5 * cfg.period)
        throw ResolutionError("offdiag_decay: period too short for the largest separation");
    const Mask mI = interval_mask(I, g);

    ExperimentReport rep;
    rep.id = "offdiag_decay";
    rep.config = {{"symbol", symbol_json(s)}, {"interval", {I.center, I.length}}, {"k_min", cfg.k_min},
                  {"k_max", cfg.k_max},       {"period", cfg.period},          {"n", cfg.n},
                  {"width", cfg.width},       {"sharpness", cfg.sharpness},    {"probes", cfg.probes},
                  {"probe_width", cfg.probe_width},    {"exponents", exps_json(cfg.exps)},
                  {"delta_min", cfg.delta_min}, {"floor", cfg.floor}};
    Table t{"decay", {"k", "distance", "ratio", "lhs", "norm_f", "norm_g", "best_f", "best_g", "ratio_single"}, {}};
    const auto pair_ratio = [&](double cf, double cg, double w, RVec& out) {
        const SampledFunction f = make_bump(cf, w, g, cfg.sharpness);
        const SampledFunction h = make_bump(cg, w, g, cfg.sharpness);
        const double lhs = lp_norm(eval_direct(s, f, h), cfg.exps.r, mI);
        const double nf = lp_norm(f, cfg.exps.p), ng = lp_norm(h, cfg.exps.q);
        out = {lhs / (nf * ng), lhs, nf, ng, cf, cg};
        return out[0];
    };
    const double pw = cfg.probes == 1 ? cfg.width : cfg.probe_width;
    const double step = cfg.probes == 1 ? 0.0 : (cfg.width - pw) / (cfg.probes - 1);
    RVec ratios, xs, ys;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        const double D = std::ldexp(I.length, k);
        const double e0 = I.left() - D - cfg.width, f0 = I.right() + D;  // left ends of E and F
        RVec best{-1.0}, cur;
        for (int a = 0; a < cfg.probes; ++a)
            for (int b = 0; b < cfg.probes; ++b)
                if (pair_ratio(e0 + 0.5 * pw + a * step, f0 + 0.5 * pw + b * step, pw, cur) > best[0]) best = cur;
        RVec single;
        pair_ratio(e0 + 0.5 * cfg.width, f0 + 0.5 * cfg.width, cfg.width, single);
        t.rows.push_back({double(k), D, best[0], best[1], best[2], best[3], best[4], best[5], single[0]});
        ratios.push_back(best[0]);
        if (best[0] > cfg.floor) {
            xs.push_back(std::log(1.0 + D / I.length));
            ys.push_back(std::log(best[0]));
        }
    }
    rep.tables.push_back(std::move(t));
    const Fit fit = loglog_fit("delta", xs, ys);
    rep.fits.push_back(fit);

    bool mono = true;
    double worst = 0.0;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        const bool both_zero = ratios[i] <= cfg.floor && ratios[i - 1] <= cfg.floor;
        if (!both_zero) {
            mono = mono && ratios[i] < ratios[i - 1];
            worst = std::max(worst, ratios[i] / ratios[i - 1]);
        }
    }
    rep.verdicts.push_back({"monotone", mono, worst, 1.0, "ratio(k+1)/ratio(k) < 1 unless both below floor"});
    rep.verdicts.push_back({"decay_rate", fit.exponent >= cfg.delta_min, fit.exponent, cfg.delta_min,
                            "fitted delta >= delta_min"});
    stamp(rep, sw);
    return rep;
}

// ---------------------------------------------------------------- Holder sweep

double holder_ratio(const SampledFunction& T, const SampledFunction& f, const SampledFunction& g, const Exponents& e,
                    const RVec& w) {
    const Mask all = full_mask(T.grid);
    return weighted_lp_norm(T, e.r, w, all) / (weighted_lp_norm(f, e.p, w, all) * weighted_lp_norm(g, e.q, w, all));
}

namespace {

ExperimentReport sweep(const Symbol& s, const HolderConfig& cfg, const Weight* w, const std::string& id) {
    Stopwatch sw;
    if (cfg.triples.empty()) throw ParameterError(id + ": no exponent triples");
    for (const auto& e : cfg.triples) check_exponents(e);
    if (cfg.ensemble.size < 1) throw ParameterError(id + ": ensemble size must be >= 1");
    const std::array<Grid, 2> grids{Grid::centered(cfg.period, cfg.n), Grid::centered(cfg.period, 2 * cfg.n)};

    ExperimentReport rep;
    rep.id = id;
    rep.seed = cfg.seed;
    json triples = json::array();
    for (const auto& e : cfg.triples) triples.push_back(exps_json(e));
    rep.config = {{"symbol", symbol_json(s)},  {"triples", triples},         {"period", cfg.period},
                  {"n", cfg.n},                {"ensemble", ensemble_json(cfg.ensemble)},
                  {"growth_max", cfg.growth_max}};
    if (w) rep.config["weight"] = {{"name", w->name}, {"theta", w->theta}, {"l", w->l}};

    Rng rng(cfg.seed);
    std::vector<std::pair<BumpSum, BumpSum>> members;
    for (int m = 0; m < cfg.ensemble.size; ++m) {
        BumpSum f = random_bump_sum(cfg.ensemble, rng);
        BumpSum h = random_bump_sum(cfg.ensemble, rng);
        members.emplace_back(std::move(f), std::move(h));
    }
    Table mt{"members", {"member", "triple", "n", "ratio"}, {}};
    std::vector<std::array<double, 2>> bound(cfg.triples.size(), {0.0, 0.0});
    for (std::size_t gi = 0; gi < 2; ++gi) {
        const Grid& g = grids[gi];
        const RVec wv = w ? w->sample(g) : RVec(g.count, 1.0);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const SampledFunction f = members[m].first.sample(g), h = members[m].second.sample(g);
            const SampledFunction T = eval_direct(s, f, h);
            for (std::size_t ti = 0; ti < cfg.triples.size(); ++ti) {
                const Exponents& e = cfg.triples[ti];
                const double ratio = holder_ratio(T, f, h, e, wv);
                mt.rows.push_back({double(m), double(ti), double(g.count), ratio});
                bound[ti][gi] = std::max(bound[ti][gi], ratio);
            }
        }
    }
    Table bt{"bounds", {"p", "q", "r", "bound_n", "bound_2n", "growth"}, {}};
    double maxbound = 0.0;
    for (std::size_t ti = 0; ti < cfg.triples.size(); ++ti) {
        const Exponents& e = cfg.triples[ti];
        const double growth = bound[ti][1] / bound[ti][0];
        bt.rows.push_back({e.p, e.q, e.r, bound[ti][0], bound[ti][1], growth});
        rep.verdicts.push_back({"stable " + to_string(e), growth < cfg.growth_max, growth, cfg.growth_max,
                                "bound(2n)/bound(n) < growth_max"});
        maxbound = std::max({maxbound, bound[ti][0], bound[ti][1]});
    }
    if (s.name == "product" && !w)
        rep.verdicts.push_back({"holder_baseline", maxbound <= 1.0 + 1e-9, maxbound, 1.0 + 1e-9,
                                "product symbol bound <= 1 + 1e-9"});
    rep.tables.push_back(std::move(bt));
    rep.tables.push_back(std::move(mt));
    stamp(rep, sw);
    return rep;
}

}  // namespace

ExperimentReport holder_sweep(const Symbol& s, const HolderConfig& cfg) { return sweep(s, cfg, nullptr, "holder_sweep"); }

ExperimentReport weighted_continuity(const Symbol& s, const Weight& w, const HolderConfig& cfg,
                                     const WeightCheckSpec& check) {
    const WeightClassReport wc = weight_class_check(w, w.theta, w.l, check.box, check.step, check.K, check.ceiling);
    if (!wc.pass) {
        std::ostringstream os;
        os << "weighted_continuity: weight " << w.name << " fails the class check for theta = " << w.theta
           << ", l = " << w.l << " (C = " << wc.C << " at I = [" << wc.witness.left() << ", " << wc.witness.right()
           << "), k = " << wc.witness_k << ")";
        throw PreconditionError(os.str());
    }
    ExperimentReport rep = sweep(s, cfg, &w, "weighted_continuity");
    rep.config["weight_check"] = {{"box", check.box}, {"step", check.step}, {"K", check.K}, {"C", num(wc.C)}};
    return rep;
}

// ---------------------------------------------------------------- restricted weak type

TrilinearForm symbol_form(const Symbol& s) {
    return [s](const SampledFunction& f1, const SampledFunction& f2, const SampledFunction& f3) {
        const SampledFunction T = eval_direct(s, f1, f2);
        cplx acc = 0.0;
        for (std::size_t j = 0; j < T.size(); ++j) acc += T[j] * f3[j];
        return acc * T.grid.spacing;
    };
}

int restricted_alpha(const std::array<double, 3>& p) {
    double sum = 0.0;
    int alpha = -1, neg = 0;
    for (int i = 0; i < 3; ++i) {
        if (p[i] == 0.0 || !std::isfinite(p[i])) throw ParameterError("restricted: exponents must be finite and nonzero");
        sum += 1.0 / p[i];
        if (p[i] < 0.0) {
            ++neg;
            alpha = i;
        }
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("restricted: need 1/p1 + 1/p2 + 1/p3 = 1");
    if (neg != 1) throw ParameterError("restricted: need exactly one negative exponent");
    if (!(1.0 / p[alpha] > -0.5)) throw ParameterError("restricted: need -1/2 < 1/p_alpha < 0");
    return alpha;
}

ExceptionalSet exceptional_set(const std::array<Mask, 3>& E, const Grid& g, int alpha) {
    if (alpha < 0 || alpha > 2) throw ParameterError("exceptional_set: alpha in 0..2");
    std::array<double, 3> cnt{};
    for (int i = 0; i < 3; ++i) {
        if (E[i].size() != g.count) throw ShapeError("exceptional_set: mask not aligned with grid");
        cnt[i] = static_cast<double>(std::count(E[i].begin(), E[i].end(), 1));
        if (cnt[i] == 0.0) throw ParameterError("exceptional_set: empty set");
    }
    RVec v(g.count, 0.0);
    for (int i = 0; i < 3; ++i) {
        SampledFunction ind(g);
        for (std::size_t j = 0; j < g.count; ++j) ind[j] = E[i][j] ? 1.0 : 0.0;
        const SampledFunction M = hardy_littlewood_max(ind);
        for (std::size_t j = 0; j < g.count; ++j) v[j] = std::max(v[j], M[j].real() * cnt[alpha] / cnt[i]);
    }
    // smallest eta with #{v > eta} <= |E_alpha| / (2h)
    const auto m = static_cast<std::size_t>(std::floor(0.5 * cnt[alpha]));
    RVec sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    ExceptionalSet X;
    X.alpha = alpha;
    X.eta = m < sorted.size() ? sorted[m] : 0.0;
    X.U.assign(g.count, 0);
    X.E_alpha_prime.assign(g.count, 0);
    std::size_t nu = 0;
    for (std::size_t j = 0; j < g.count; ++j) {
        X.U[j] = v[j] > X.eta;
        nu += X.U[j];
        X.E_alpha_prime[j] = E[alpha][j] && !X.U[j];
    }
    X.measure_U = static_cast<double>(nu) * g.spacing;
    X.measure_E_alpha = cnt[alpha] * g.spacing;
    X.certified = X.measure_U <= 0.5 * X.measure_E_alpha;
    if (!X.certified) throw InvariantViolation("exceptional_set: |U| > |E_alpha|/2");
    return X;
}

namespace {

struct SetTriple {
    std::array<std::vector<std::pair<double, double>>, 3> pieces;
};

Mask set_mask(const std::vector<std::pair<double, double>>& pieces, const Grid& g) {
    Mask m(g.count, 0);
    for (std::size_t j = 0; j < g.count; ++j)
        for (const auto& [a, b] : pieces) m[j] = m[j] || (g.x(j) >= a && g.x(j) < b);
    return m;
}

/// Values in {-1, 0, 1} on cells [c k, c (k+1)).
struct Pattern {
    double cell = 0.5;
    long k0 = 0;
    std::vector<int> v;
    double at(double x) const {
        const long k = static_cast<long>(std::floor(x / cell)) - k0;
        return (k >= 0 && k < static_cast<long>(v.size())) ? v[static_cast<std::size_t>(k)] : 0.0;
    }
};

Pattern random_pattern(double spread, double cell, Rng& rng) {
    Pattern p;
    p.cell = cell;
    p.k0 = static_cast<long>(std::floor(-spread / cell));
    const long k1 = static_cast<long>(std::ceil(spread / cell));
    for (long k = p.k0; k < k1; ++k) p.v.push_back(rng.integer(-1, 1));
    return p;
}

SampledFunction pattern_function(const Pattern& p, const Mask& E, const Grid& g, double mollify) {
    SampledFunction f(g);
    for (std::size_t j = 0; j < g.count; ++j) f[j] = p.at(g.x(j));
    if (mollify > 0.0) {
        // circular convolution with a unit-mass bump keeps |f| <= 1
        SampledFunction k = make_bump(0.0, mollify, g);
        double mass = 0.0;
        for (auto& v : k.values) mass += v.real();
        CVec kv(g.count), fv = f.values;
        const long n = static_cast<long>(g.count);
        const long zero = static_cast<long>(std::lround(-g.origin / g.spacing));
        for (long j = 0; j < n; ++j) kv[static_cast<std::size_t>(((j - zero) % n + n) % n)] = k[static_cast<std::size_t>(j)] / mass;
        const CVec a = fft_raw(fv, -1), b = fft_raw(kv, -1);
        CVec c(a.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] * b[i];
        const CVec r = fft_raw(c, 1);
        for (std::size_t j = 0; j < g.count; ++j) {
            const double re = r[j].real() / static_cast<double>(n);
            f[j] = std::clamp(re, -1.0, 1.0);
        }
    }
    for (std::size_t j = 0; j < g.count; ++j)
        if (!E[j]) f[j] = 0.0;
    return f;
}

}  // namespace

ExperimentReport restricted_type_harness(const TrilinearForm& form, const RestrictedConfig& cfg) {
    Stopwatch sw;
    const int alpha = restricted_alpha(cfg.p);
    if (cfg.set_triples < 1 || cfg.samples < 1 || cfg.max_pieces < 1)
        throw ParameterError("restricted: set_triples, samples and max_pieces must be >= 1");
    const std::array<Grid, 2> grids{Grid::centered(cfg.period, cfg.n), Grid::centered(cfg.period, 2 * cfg.n)};
    const double cellh = cfg.cell / grids[0].spacing;
    if (std::abs(cellh - std::round(cellh)) > 1e-9 || cellh < 1.0)
        throw ParameterError("restricted: cell must be a positive multiple of the coarse spacing");

    ExperimentReport rep;
    rep.id = "restricted_type";
    rep.seed = cfg.seed;
    rep.config = {{"p", {cfg.p[0], cfg.p[1], cfg.p[2]}}, {"alpha", alpha + 1},       {"period", cfg.period},
                  {"n", cfg.n},                         {"set_triples", cfg.set_triples}, {"samples", cfg.samples},
                  {"max_pieces", cfg.max_pieces},       {"spread", cfg.spread},      {"cell", cfg.cell},
                  {"mollify", cfg.mollify},             {"growth_max", cfg.growth_max}};

    Rng rng(cfg.seed);
    const long ncell = static_cast<long>(std::floor(cfg.spread / cfg.cell));
    Table st{"sets", {"triple", "n", "E1", "E2", "E3", "eta", "U", "half_E_alpha", "C_pattern", "C_smooth"}, {}};
    std::array<double, 2> Cmax{0.0, 0.0};
    bool certified = true, finite = true;
    for (int t = 0; t < cfg.set_triples; ++t) {
        SetTriple S;
        for (int i = 0; i < 3; ++i) {
            const int np = rng.integer(1, cfg.max_pieces);
            for (int q = 0; q < np; ++q) {
                const long a = rng.integer(static_cast<int>(-ncell), static_cast<int>(ncell) - 1);
                const long len = rng.integer(1, static_cast<int>(std::max(1L, ncell / 2)));
                S.pieces[i].emplace_back(a * cfg.cell, std::min(a + len, ncell) * cfg.cell);
            }
        }
        std::vector<std::array<Pattern, 3>> pats;
        for (int k = 0; k < cfg.samples; ++k)
            pats.push_back({random_pattern(cfg.spread, cfg.cell, rng), random_pattern(cfg.spread, cfg.cell, rng),
                            random_pattern(cfg.spread, cfg.cell, rng)});
        for (std::size_t gi = 0; gi < 2; ++gi) {
            const Grid& g = grids[gi];
            std::array<Mask, 3> E;
            std::array<double, 3> meas{};
            for (int i = 0; i < 3; ++i) {
                E[i] = set_mask(S.pieces[i], g);
                meas[i] = static_cast<double>(std::count(E[i].begin(), E[i].end(), 1)) * g.spacing;
            }
            const ExceptionalSet X = exceptional_set(E, g, alpha);
            certified = certified && X.certified;
            std::array<Mask, 3> Ep = E;
            Ep[alpha] = X.E_alpha_prime;
            double denom = 1.0;
            for (int i = 0; i < 3; ++i) denom *= std::pow(meas[i], 1.0 / cfg.p[i]);
            double cp = 0.0, cs = 0.0;
            for (const auto& pt : pats) {
                std::array<SampledFunction, 3> fp, fs;
                for (int i = 0; i < 3; ++i) {
                    fp[i] = pattern_function(pt[i], Ep[i], g, 0.0);
                    fs[i] = pattern_function(pt[i], Ep[i], g, cfg.mollify);
                }
                cp = std::max(cp, std::abs(form(fp[0], fp[1], fp[2])) / denom);
                cs = std::max(cs, std::abs(form(fs[0], fs[1], fs[2])) / denom);
            }
            finite = finite && std::isfinite(cp) && std::isfinite(cs);
            Cmax[gi] = std::max({Cmax[gi], cp, cs});
            st.rows.push_back({double(t), double(g.count), meas[0], meas[1], meas[2], X.eta, X.measure_U,
                               0.5 * X.measure_E_alpha, cp, cs});
        }
    }
    const double growth = Cmax[1] / Cmax[0];
    rep.tables.push_back({"constants", {"n", "C"}, {{double(cfg.n), Cmax[0]}, {double(2 * cfg.n), Cmax[1]}}});
    rep.tables.push_back(std::move(st));
    rep.verdicts.push_back({"exceptional_set", certified, double(cfg.set_triples), 0.0, "|U| <= |E_alpha|/2 for every triple"});
    rep.verdicts.push_back({"finite", finite, Cmax[1], 0.0, "restricted constant finite"});
    rep.verdicts.push_back({"stable", growth < cfg.growth_max, growth, cfg.growth_max, "C(2n)/C(n) < growth_max"});
    stamp(rep, sw);
    return rep;
}

// ---------------------------------------------------------------- limsup

ExperimentReport limsup_bound(const Symbol& s, const SampledFunction& f, const SampledFunction& g,
                              const LimsupConfig& cfg) {
    Stopwatch sw;
    require_same_grid(f, g, "limsup_bound");
    if (!(cfg.r > 0.0)) throw ParameterError("limsup_bound: r must be positive");
    if (cfg.lengths.empty()) throw ParameterError("limsup_bound: empty interval ladder");
    for (std::size_t i = 0; i < cfg.lengths.size(); ++i)
        if (!(cfg.lengths[i] > 0.0) || (i && cfg.lengths[i] <= cfg.lengths[i - 1]) || cfg.lengths[i] > f.grid.period())
            throw ParameterError("limsup_bound: lengths must increase within (0, period]");
    const Grid& G = f.grid;
    double lo = kInf, hi = -kInf;
    for (std::size_t j = 0; j < G.count; ++j)
        if (f[j] != 0.0 || g[j] != 0.0) {
            lo = std::min(lo, G.x(j));
            hi = std::max(hi, G.x(j));
        }
    const double support = hi >= lo ? hi - lo + G.spacing : 0.0;
    const double scale = lp_norm(f, kInf) * lp_norm(g, kInf);

    ExperimentReport rep;
    rep.id = "limsup";
    rep.config = {{"symbol", symbol_json(s)}, {"r", cfg.r},       {"lengths", cfg.lengths},
                  {"center", cfg.center},     {"ceiling", cfg.ceiling}, {"n", G.count}, {"period", G.period()}};
    const SampledFunction T = eval_direct(s, f, g);
    Table t{"limsup", {"length", "measurement", "normalized"}, {}};
    RVec m;
    for (double L : cfg.lengths) {
        const Mask mk = interval_mask(Interval(cfg.center, L), G);
        const double v = lp_norm(T, cfg.r, mk) / std::pow(L, 1.0 / cfg.r);
        m.push_back(v);
        t.rows.push_back({L, v, scale > 0.0 ? v / scale : 0.0});
    }
    rep.tables.push_back(std::move(t));
    bool mono = true;
    for (std::size_t i = 1; i < m.size(); ++i)
        if (cfg.lengths[i - 1] >= 4.0 * support) mono = mono && m[i] <= m[i - 1];
    rep.verdicts.push_back({"below_ceiling", m.back() <= cfg.ceiling * scale, m.back(), cfg.ceiling * scale,
                            "last measurement <= ceiling |f|_inf |g|_inf"});
    rep.verdicts.push_back({"non_increasing", mono, support, 4.0 * support, "non-increasing for |I| >= 4 x support"});
    stamp(rep, sw);
    return rep;
}

// ---------------------------------------------------------------- local estimate

RVec corona_terms(const SampledFunction& f, const Interval& I, double p, double delta) {
    const int K = max_corona_index(I, f.grid);
    RVec out;
    for (int k = 0; k <= K; ++k) {
        const CoronaMask c = corona(I, k, f.grid);
        double v;
        if (std::isinf(p)) {
            v = lp_norm(f, kInf, c.mask);
        } else {
            const double s = std::pow(lp_norm(f, p, c.mask), p);
            v = std::pow(s / (std::ldexp(I.length, k + 1)), 1.0 / p);
        }
        out.push_back(v * std::pow(2.0, -k * delta));
    }
    return out;
}

double hl_majorant(const SampledFunction& f, const Interval& I, double p) {
    if (std::isinf(p)) return lp_norm(f, kInf);
    SampledFunction a(f.grid);
    for (std::size_t j = 0; j < f.size(); ++j) a[j] = std::pow(std::abs(f[j]), p);
    const SampledFunction M = hardy_littlewood_max(a);
    const Mask mI = interval_mask(I, f.grid);
    double inf = kInf;
    for (std::size_t j = 0; j < f.size(); ++j)
        if (mI[j]) inf = std::min(inf, M[j].real());
    if (!std::isfinite(inf)) throw ResolutionError("hl_majorant: interval holds no grid point");
    return std::pow(inf, 1.0 / p);
}

ExperimentReport local_estimate_check(const Symbol& s, const LocalConfig& cfg) {
    Stopwatch sw;
    check_exponents(cfg.exps);
    if (cfg.ensemble.size < 1) throw ParameterError("local_estimate: ensemble size must be >= 1");
    const std::array<Grid, 2> grids{Grid::centered(cfg.period, cfg.n), Grid::centered(cfg.period, 2 * cfg.n)};
    ExperimentReport rep;
    rep.id = "local_estimate";
    rep.seed = cfg.seed;
    rep.config = {{"symbol", symbol_json(s)}, {"interval", {cfg.I.center, cfg.I.length}},
                  {"exponents", exps_json(cfg.exps)}, {"delta", cfg.delta}, {"period", cfg.period}, {"n", cfg.n},
                  {"ensemble", ensemble_json(cfg.ensemble)}, {"growth_max", cfg.growth_max}};
    Rng rng(cfg.seed);
    std::vector<std::pair<BumpSum, BumpSum>> members;
    for (int m = 0; m < cfg.ensemble.size; ++m) {
        BumpSum f = random_bump_sum(cfg.ensemble, rng);
        BumpSum h = random_bump_sum(cfg.ensemble, rng);
        members.emplace_back(std::move(f), std::move(h));
    }
    Table t{"members", {"member", "n", "lhs", "corona", "corona_k0", "hl", "ratio_corona", "ratio_hl"}, {}};
    std::array<double, 2> Cc{0.0, 0.0}, Ch{0.0, 0.0};
    for (std::size_t gi = 0; gi < 2; ++gi) {
        const Grid& g = grids[gi];
        const Mask mI = interval_mask(cfg.I, g);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const SampledFunction f = members[m].first.sample(g), h = members[m].second.sample(g);
            const SampledFunction T = eval_direct(s, f, h);
            double lhs = lp_norm(T, cfg.exps.r, mI);
            if (std::isfinite(cfg.exps.r)) lhs /= std::pow(cfg.I.length, 1.0 / cfg.exps.r);
            const RVec cf = corona_terms(f, cfg.I, cfg.exps.p, cfg.delta);
            const RVec cg = corona_terms(h, cfg.I, cfg.exps.q, cfg.delta);
            const double sf = std::accumulate(cf.begin(), cf.end(), 0.0), sg = std::accumulate(cg.begin(), cg.end(), 0.0);
            const double cor = sf * sg, k0 = cf[0] * cg[0];
            const double hl = hl_majorant(f, cfg.I, cfg.exps.p) * hl_majorant(h, cfg.I, cfg.exps.q);
            const double rc = cor > 0.0 ? lhs / cor : 0.0, rh = hl > 0.0 ? lhs / hl : 0.0;
            Cc[gi] = std::max(Cc[gi], rc);
            Ch[gi] = std::max(Ch[gi], rh);
            t.rows.push_back({double(m), double(g.count), lhs, cor, k0, hl, rc, rh});
        }
    }
    rep.tables.push_back({"constants", {"n", "C_corona", "C_hl"},
                          {{double(cfg.n), Cc[0], Ch[0]}, {double(2 * cfg.n), Cc[1], Ch[1]}}});
    rep.tables.push_back(std::move(t));
    auto stable = [&](double a, double b) { return std::isfinite(a) && std::isfinite(b) && b < cfg.growth_max * a && a < cfg.growth_max * b; };
    rep.verdicts.push_back({"corona_stable", stable(Cc[0], Cc[1]), Cc[1] / Cc[0], cfg.growth_max,
                            "corona constant finite, refinement factor within growth_max"});
    rep.verdicts.push_back({"hl_stable", stable(Ch[0], Ch[1]), Ch[1] / Ch[0], cfg.growth_max,
                            "maximal-function constant finite, refinement factor within growth_max"});
    stamp(rep, sw);
    return rep;
}

}  // namespace bilop
