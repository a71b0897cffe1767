// Acceptance run: one PASS/FAIL line per criterion.

#include "bilop/config.hpp"
#include "bilop/experiments.hpp"
#include "bilop/operator.hpp"
#include "bilop/tilemodel.hpp"
#include "bilop/weights.hpp"
#include "bilop/whitney.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace bilop;
namespace fs = std::filesystem;

namespace {

const SingularLine kLine(1.0, -1.0);

Symbol truncated_bht() { return truncate_near_line(bht_sign_symbol(kLine), kLine, 1.0); }

SampledFunction random_function(const Grid& g, Rng& rng) {
    SampledFunction f(g);
    for (auto& v : f.values) v = {rng.normal(), rng.normal()};
    return f;
}

SampledFunction random_bandlimited(const Grid& g, Rng& rng, long kmax) {
    Spectrum s{g, CVec(g.count, 0.0)};
    for (std::size_t j = 0; j < g.count; ++j)
        if (std::abs(g.bin(j)) <= kmax) s.values[j] = {rng.normal(), rng.normal()};
    return dft_inverse(s);
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream time;
    time.precision(3);
    time << std::fixed << dt << " s";
    if (limit_s > 0.0) {
        time << " / limit " << limit_s << " s";
        if (dt >= limit_s) {
            o.pass = false;
            o.detail += "; over the time limit";
        }
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (id < 10 ? " " : "") << id << "  " << name << ": " << o.detail
              << " (" << time.str() << ")" << std::endl;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ---- 6
double powerset_oracle(const Collection& Q, const SampledFunction& f, int j) {
    const auto e = packet_energies(Q, f);
    double best = 0.0;
    const std::size_t n = Q.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask)
        for (int k = 1; k <= 3; ++k) {
            if (k == j) continue;
            for (std::size_t t = 0; t < n; ++t) {
                bool ok = true;
                double acc = 0.0;
                for (std::size_t s = 0; s < n && ok; ++s)
                    if (mask >> s & 1) {
                        ok = is_tree_member(Q.tiles[t], k, Q.tiles[s]);
                        acc += e[k - 1][s];
                    }
                if (ok) best = std::max(best, std::sqrt(acc / Q.tiles[t].time.length));
            }
        }
    return best;
}

// ---- 13
std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string without_run_key(const std::string& report_json) {
    nlohmann::json j = nlohmann::json::parse(report_json);
    j.erase("run");
    return j.dump(2);
}

}  // namespace

int main() {
    std::cout << "bilop acceptance\n";

    criterion(1, "product identity", 5.0, [] {
        double worst = 0.0;
        Rng rng(1);
        for (std::size_t n : {64, 128, 256}) {
            const Grid g = Grid::centered(16.0, n);
            for (int t = 0; t < 5; ++t) {
                const SampledFunction f = random_function(g, rng), h = random_function(g, rng);
                worst = std::max(worst, max_abs_diff(eval_direct(product_symbol(), f, h), pointwise_product(f, h)));
            }
        }
        return Outcome{worst <= 1e-10, "max |T(f,g) - fg| = " + sci(worst) + " <= 1e-10 on n = 64, 128, 256"};
    });

    criterion(2, "fast path matches O(n^3) reference", 60.0, [] {
        const Grid g = Grid::centered(8.0, 32);
        Rng rng(2);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            Symbol s;
            switch (t % 4) {
                case 0: {
                    CVec table(g.count * g.count);
                    for (auto& v : table) v = {rng.normal(), rng.normal()};
                    s = tabulated_symbol(g, table);
                    break;
                }
                case 1: {
                    const double l1 = rng.uniform(0.5, 2.0), l2 = -rng.uniform(0.5, 2.0);
                    s = truncate_near_line(bht_sign_symbol(SingularLine(l1, l2)), SingularLine(l1, l2),
                                           rng.uniform(0.5, 4.0));
                    break;
                }
                case 2: s = modulate_symbol(truncated_bht(), rng.uniform(-2.0, 2.0)); break;
                default: {
                    const double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1), w = rng.uniform(0.05, 0.5);
                    s = product_symbol();
                    s.fn = [u, v, w](double, double a, double b) {
                        return std::polar(std::exp(-w * (a * a + b * b) / 10.0), u * a + v * b);
                    };
                    s.name = "gauss_phase";
                }
            }
            const SampledFunction f = random_function(g, rng), h = random_function(g, rng);
            const SampledFunction fast = eval_direct(s, f, h, EvalPath::Fast);
            const SampledFunction ref = eval_direct(s, f, h, EvalPath::Reference);
            worst = std::max(worst, max_abs_diff(fast, ref) / std::max(lp_norm(ref, kInf), 1e-300));
        }
        return Outcome{worst <= 1e-10, "max relative difference " + sci(worst) + " <= 1e-10 over 20 symbols, n = 32"};
    });

    criterion(3, "wave-packet contract", 0.0, [] {
        Rng rng(3);
        double norm_err = 0.0, outside = 0.0;
        for (int t = 0; t < 200; ++t) {
            const Grid g = Grid::centered(t % 3 ? 64.0 : 16.0, t % 2 ? 128 : 512);
            const Tile P = random_admissible_tile(g, rng);
            const SampledFunction p = wave_packet(P, WavePacketProfile::standard(), g);
            norm_err = std::max(norm_err, std::abs(lp_norm(p, 2.0) - 1.0));
            const Spectrum s = dft_forward(p);
            double out = 0.0, all = 0.0;
            for (std::size_t k = 0; k < g.count; ++k) {
                const double m = std::norm(s.values[k]);
                all += m;
                if (!(std::abs(g.freq(k) - P.freq.center) < 0.5 * P.freq.length)) out += m;
            }
            outside = std::max(outside, out / all);
        }
        return Outcome{norm_err <= 1e-8 && outside < 1e-8,
                       "max | |Phi_P|_2 - 1 | = " + sci(norm_err) + " <= 1e-8, max spectral mass outside w = " +
                           sci(outside) + " < 1e-8 over 200 tiles"};
    });

    criterion(4, "corona partition", 0.0, [] {
        Rng rng(4);
        std::size_t bad_partition = 0, bad_c0 = 0;
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = std::size_t(1) << rng.integer(5, 10);
            const Grid g(rng.uniform(-20, 0), rng.uniform(0.01, 0.2), n);
            const Interval I(rng.uniform(-10, 10), rng.uniform(0.05, 3.0));
            const int K = max_corona_index(I, g);
            std::vector<int> hits(n, 0);
            for (int k = 0; k <= K; ++k) {
                const CoronaMask c = corona(I, k, g);
                for (std::size_t j = 0; j < n; ++j) hits[j] += c.mask[j];
            }
            bad_partition += std::count_if(hits.begin(), hits.end(), [](int h) { return h != 1; });
            bad_c0 += corona(I, 0, g).mask != interval_mask(I.dilate(2.0), g);
        }
        return Outcome{bad_partition == 0 && bad_c0 == 0, std::to_string(bad_partition) +
                                                              " points not covered exactly once, " +
                                                              std::to_string(bad_c0) + " pairs with C_0(I) != 2I (50 pairs)"};
    });

    criterion(5, "decomposition reconstruction", 0.0, [] {
        Rng rng(5);
        const Grid g = Grid::centered(16.0, 128);
        double worst = 0.0;
        std::size_t max_tiles = 0;
        for (int t = 0; t < 20; ++t) {
            const Collection S = random_collection(g, 8 + rng.integer(0, 56), rng, 0.5, 2.0);
            max_tiles = std::max(max_tiles, S.size());
            ModelSum M;
            for (const auto& s : S.tiles) M.add(s, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
            const Interval I(rng.uniform(-4, 4), 2.0);
            const SampledFunction f = random_function(g, rng), h = random_function(g, rng);
            const Decomposition d = model_sum_decompose(M, I, f, h);
            worst = std::max(worst, max_abs_diff(d.sum, model_sum_eval(M, f, h)));
        }
        return Outcome{worst <= 1e-10, "max |sum of pieces - T_S(f,g)| = " + sci(worst) +
                                           " <= 1e-10 over 20 collections (largest " + std::to_string(max_tiles) +
                                           " tri-tiles)"};
    });

    criterion(6, "size_star against the powerset oracle", 0.0, [] {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator("data/corpus"))
            if (e.path().extension() == ".txt") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) return Outcome{false, "no corpus found in data/corpus"};
        const Grid g = Grid::centered(64.0, 512);
        Rng rng(6);
        std::size_t cases = 0, mismatches = 0, skipped = 0;
        for (const auto& p : files) {
            const Collection Q = load_collection(p.string());
            if (Q.size() > 12) {
                ++skipped;
                continue;
            }
            for (int trial = 0; trial < 2; ++trial) {
                const SampledFunction f = random_function(g, rng);
                for (int j = 1; j <= 3; ++j) {
                    ++cases;
                    mismatches += size_star(Q, f, j).value != powerset_oracle(Q, f, j);
                }
            }
        }
        return Outcome{mismatches == 0 && cases > 0,
                       std::to_string(mismatches) + " mismatches in " + std::to_string(cases) + " cases over " +
                           std::to_string(files.size() - skipped) + " collections (exact equality)"};
    });

    criterion(7, "off-diagonal decay", 180.0, [] {
        const ExperimentReport r = offdiag_decay(truncated_bht(), OffdiagConfig{});
        const RVec ratio = r.table("decay").column("ratio");
        std::string seq;
        for (double v : ratio) seq += (seq.empty() ? "" : ", ") + sci(v);
        const Verdict& m = r.verdict("monotone");
        const Fit& fit = r.fit("delta");
        return Outcome{m.pass && fit.exponent >= 2.0,
                       "ratios over k = 0..6: " + seq + "; strictly decreasing " + (m.pass ? "yes" : "no") +
                           ", delta-hat = " + sci(fit.exponent) + " >= 2"};
    });

    criterion(8, "Holder stability", 0.0, [] {
        HolderConfig c;
        c.n = 128;
        const ExperimentReport r = holder_sweep(truncated_bht(), c);
        std::string detail;
        bool ok = true;
        for (const auto& v : r.verdicts) {
            ok = ok && v.pass;
            detail += v.name + " growth " + sci(v.value) + ", ";
        }
        const ExperimentReport base = holder_sweep(product_symbol(), c);
        const Verdict& b = base.verdict("holder_baseline");
        ok = ok && b.pass;
        return Outcome{ok, detail + "all < 2 for n = 128 -> 256, 50 members; sigma = 1 bound " + sci(b.value) +
                               " <= 1 + 1e-9"};
    });

    criterion(9, "Whitney probe convergence", 0.0, [] {
        const Grid g = Grid::centered(64.0, 512);
        const Symbol s = truncated_bht();
        std::vector<RVec> rem;
        bool remarque = true;
        double min_freq = kInf;
        const auto probes = standard_probes(g);
        for (int depth : {3, 4, 5}) {
            WhitneyConfig cfg;
            cfg.depth = depth;
            cfg.u_max = 4;
            const WhitneyResult w = whitney_decompose(s, g, cfg, probes);
            rem.push_back(w.report.remainder);
            remarque = remarque && w.report.remarque_ok;
            min_freq = std::min(min_freq, w.report.min_freq_length);
        }
        bool mono = !rem[0].empty();
        std::string seq;
        for (std::size_t p = 0; p < rem[0].size(); ++p) {
            seq += (p ? "; " : "") + std::string("probe ") + std::to_string(p + 1) + ": ";
            for (std::size_t d = 0; d < rem.size(); ++d) {
                seq += (d ? " > " : "") + sci(rem[d][p]);
                if (d > 0) mono = mono && rem[d][p] < rem[d - 1][p];
            }
        }
        return Outcome{mono && remarque, "remainders over depths 3,4,5 (" + seq + "), decreasing " +
                                             (mono ? "yes" : "no") + "; min 2 pi |w_s| = " + sci(min_freq) +
                                             " >= 1/(2L) = 0.5"};
    });

    criterion(10, "restricted-type construction", 0.0, [] {
        RestrictedConfig c;
        c.set_triples = 100;
        const ExperimentReport r = restricted_type_harness(symbol_form(truncated_bht()), c);
        const Verdict& e = r.verdict("exceptional_set");
        const Verdict& f = r.verdict("finite");
        const Verdict& s = r.verdict("stable");
        return Outcome{e.pass && f.pass && s.pass, "|U| <= |E_alpha|/2 on " +
                                                       std::to_string(r.table("sets").rows.size() / 2) +
                                                       " triples at both resolutions: " + (e.pass ? "yes" : "no") +
                                                       "; constants finite: " + (f.pass ? "yes" : "no") +
                                                       "; growth n = 128 -> 256: " + sci(s.value) + " < 2"};
    });

    criterion(11, "weight classes", 0.0, [] {
        const std::vector<std::pair<Weight, bool>> cases{{constant_weight(1.0, 1.0, 1.0), true},
                                                         {power_weight(0.5, 1.0, 1.0), true},
                                                         {power_weight(-0.5, 1.0, 1.0), true},
                                                         {exponential_weight(1.0, 1.0, 1.0), false}};
        const auto pairs = lattice_pairs(64.0, 0.25);
        bool ok = true;
        std::string detail;
        for (const auto& [w, expect] : cases) {
            const WeightClassReport c = weight_class_check(w, 1.0, 1.0, 64.0, 0.125);
            const WeightEquivReport q = weight_equiv_check(w, 1.0, 1.0, pairs);
            ok = ok && c.pass == expect && q.pass == c.pass;
            if (!expect) ok = ok && c.witness_k > 0;
            detail += w.name + " " + (c.pass ? "PASS" : "FAIL") + "/" + (q.pass ? "PASS" : "FAIL") + " (C = " +
                      sci(c.C) + (expect ? "" : ", witness I = [" + sci(c.witness.left()) + ", " +
                                                    sci(c.witness.right()) + "), k = " + std::to_string(c.witness_k)) +
                      "); ";
        }
        return Outcome{ok, detail + "theta = 1, l = 1"};
    });

    criterion(12, "derivation identity", 0.0, [] {
        Rng rng(12);
        double worst = 0.0;
        // x-independent truncated BHT
        {
            const Grid g = Grid::centered(16.0, 128);
            const SampledFunction f = random_bandlimited(g, rng, 16), h = random_bandlimited(g, rng, 16);
            for (int n : {1, 2}) worst = std::max(worst, derivation_identity_check(truncated_bht(), f, h, n).max_abs_discrepancy);
        }
        // e^{ix} times the truncated BHT
        {
            const Grid g = Grid::centered(16.0 * kPi, 128);
            const SampledFunction f = random_bandlimited(g, rng, 14), h = random_bandlimited(g, rng, 14);
            const Symbol tau = truncated_bht();
            Symbol s = tau;
            s.fn = [tau](double x, double a, double b) { return std::polar(1.0, x) * tau(x, a, b); };
            s.x_dependent = true;
            for (int n : {1, 2}) worst = std::max(worst, derivation_identity_check(s, f, h, n).max_abs_discrepancy);
        }
        // (1 + cos(x)/2) times a Gaussian symbol
        {
            const Grid g = Grid::centered(8.0 * kPi, 128);
            const SampledFunction f = random_bandlimited(g, rng, 12), h = random_bandlimited(g, rng, 12);
            Symbol s = product_symbol();
            s.fn = [](double x, double a, double b) { return (1.0 + 0.5 * std::cos(x)) * std::exp(-(a * a + b * b) / 20.0); };
            s.x_dependent = true;
            s.name = "cos_gauss";
            for (int n : {1, 2}) worst = std::max(worst, derivation_identity_check(s, f, h, n).max_abs_discrepancy);
        }
        return Outcome{worst <= 1e-8, "max discrepancy " + sci(worst) + " <= 1e-8 at orders 1, 2, three combinations"};
    });

    criterion(13, "determinism", 0.0, [] {
        const fs::path root = fs::temp_directory_path() / "bilop_acceptance";
        fs::remove_all(root);
        const std::vector<std::string> configs{
            "kind = offdiag_decay\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 256\nseed = 1\n",
            "kind = holder_sweep\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 128\nseed = 7\nensemble.size = 8\n",
            "kind = weighted_continuity\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 128\nseed = 3\n"
            "ensemble.size = 6\nweight.kind = poly\n",
            "kind = restricted_type\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 128\nseed = 5\n"
            "restricted.set_triples = 6\nrestricted.samples = 3\n",
            "kind = limsup_bound\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 1024\nseed = 2\n",
            "kind = local_estimate\nsymbol.kind = bht_sign\nsymbol.truncate = 1\ngrid.n = 256\nseed = 4\n"
            "ensemble.size = 6\n"};
        std::size_t identical = 0, files = 0;
        std::string differing;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            std::array<fs::path, 2> dirs{root / ("a" + std::to_string(i)), root / ("b" + std::to_string(i))};
            for (const auto& d : dirs) {
                const ConfigResult r = parse_config(configs[i], {{"output", d.string()}});
                if (!r.ok()) return Outcome{false, "config " + std::to_string(i) + ": " + to_string(r.errors[0])};
                std::ostringstream err;
                if (run(*r.config, err) == 2) return Outcome{false, "run failed: " + err.str()};
            }
            for (const auto& e : fs::directory_iterator(dirs[0])) {
                ++files;
                std::string a = slurp(e.path()), b = slurp(dirs[1] / e.path().filename());
                if (e.path().filename() == "report.json") {
                    a = without_run_key(a);
                    b = without_run_key(b);
                }
                if (a == b) ++identical;
                else differing += " " + e.path().string();
            }
        }
        fs::remove_all(root);
        return Outcome{identical == files && files > 0,
                       std::to_string(identical) + "/" + std::to_string(files) +
                           " report and table files byte-identical across reruns of 6 experiment kinds" +
                           (differing.empty() ? "" : "; differing:" + differing)};
    });

    std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
