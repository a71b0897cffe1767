#include "bilop/whitney.hpp"

#include "bilop/operator.hpp"
#include "bilop/smooth.hpp"

#include <cmath>
#include <string>

namespace bilop {

std::vector<ProbePair> standard_probes(const Grid& g) {
    auto mod = [&g](SampledFunction f, double cycles) {
        for (std::size_t j = 0; j < g.count; ++j) f[j] *= std::polar(1.0, kTwoPi * cycles * g.x(j));
        return f;
    };
    return {
        {make_bump(-2.0, 1.5, g), make_bump(2.5, 2.0, g)},
        {mod(make_bump(0.0, 1.5, g), 0.5), mod(make_bump(1.0, 2.0, g), -0.5)},
        {make_bump(-1.0, 1.2, g), mod(make_bump(-0.5, 1.4, g), 0.3)},
    };
}

namespace {

struct Cell {
    double c = 0.0;
    std::vector<std::size_t> slots;
    RVec w;
};

std::vector<Cell> cells_at(double s, double B, const Grid& g) {
    const double P = g.period();
    const double half = 0.5 * s;
    std::vector<Cell> out;
    const long mlo = static_cast<long>(std::ceil((-B + half) / half - 1e-9));
    const long mhi = static_cast<long>(std::floor((B - half) / half + 1e-9));
    const long nh = static_cast<long>(g.count / 2);
    for (long m = mlo; m <= mhi; ++m) {
        Cell cell;
        cell.c = m * half;
        for (long k = static_cast<long>(std::floor((cell.c - half) * P)); k <= (cell.c + half) * P; ++k) {
            if (k < -nh || k >= nh) continue;
            const double w = packet_window((k / P - cell.c) / s);
            if (w > 0.0) {
                cell.slots.push_back(g.slot(k));
                cell.w.push_back(w);
            }
        }
        if (!cell.slots.empty()) out.push_back(std::move(cell));
    }
    return out;
}

std::vector<int> translations(int U, int count) {
    std::vector<int> u;
    if (2 * U + 1 <= count)
        for (int i = -U; i <= U; ++i) u.push_back(i);
    else
        for (int i = -(count / 2); i < count - count / 2; ++i) u.push_back(i);
    return u;
}

/// Packet spectrum translated by u time lengths.
CVec translated(const PacketSpectrum& p, const Grid& g, double fc, double len, int u) {
    CVec v(p.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double dxi = g.freq(p.slots[i]) - fc;
        v[i] = p.values[i] * std::polar(1.0, -kTwoPi * dxi * u * len);
    }
    return v;
}

}  // namespace

WhitneyResult whitney_decompose(const Symbol& sym, const Grid& g, const WhitneyConfig& cfg,
                                const std::vector<ProbePair>& probes) {
    if (sym.x_dependent) throw PreconditionError("whitney_decompose: symbol must be x-independent");
    if (!sym.line || !(sym.truncation > 0.0))
        throw PreconditionError("whitney_decompose: symbol must be truncated away from its line");
    if (sym.line->l1 != -sym.line->l2)
        throw ParameterError("whitney_decompose: only lines with l1 = -l2 are supported");
    if (cfg.depth < 1 || cfg.u_max < 0) throw ParameterError("whitney_decompose: depth >= 1 and u_max >= 0");

    const double L = sym.truncation;
    const double P = g.period();
    const std::size_t n = g.count;
    const double nyq = g.nyquist();
    const double B = cfg.box > 0.0 ? std::min(cfg.box, nyq) : nyq;

    // finest side: the cubes of the first scale reach down to |xi - eta| = 2.5 s0
    const double dmin = std::sqrt(2.0) / (4.0 * kPi * L);
    double s0 = 2.0 / P;
    while (5.0 * s0 <= dmin) s0 *= 2.0;
    if (2.5 * s0 > dmin)
        throw ResolutionError("whitney_decompose: period " + std::to_string(P) + " too short to cover |xi - eta| >= " +
                              std::to_string(dmin) + " (need P >= " + std::to_string(5.0 / dmin) + ")");
    WhitneyResult res;
    WhitneyReport& rep = res.report;
    rep.L = L;
    for (int j = 0; j < cfg.depth; ++j) rep.scales.push_back(std::ldexp(s0, j));
    const double slast = rep.scales.back();
    if (0.5 / slast < 4.0 * g.spacing)
        throw ResolutionError("whitney_decompose: depth " + std::to_string(cfg.depth) + " needs a finer grid");

    // sigma chi on the bin lattice, chi a cutoff at |xi - eta| ~ 5..7.5 s_last
    CVec sc(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double xi = g.freq(a), eta = g.freq(b);
            const double chi = 1.0 - smooth_step((std::abs(xi - eta) - 5.0 * slast) / (2.5 * slast));
            if (chi > 0.0) sc[a * n + b] = chi * sym(0.0, kTwoPi * xi, kTwoPi * eta);
        }

    struct Pair {
        double s;
        const Cell* c1;
        const Cell* c2;
    };
    std::vector<std::vector<Cell>> cells;
    for (double s : rep.scales) cells.push_back(cells_at(s, B, g));
    std::vector<Pair> pairs;
    RVec Gt(n * n, 0.0);
    for (std::size_t j = 0; j < rep.scales.size(); ++j) {
        const double s = rep.scales[j];
        for (const auto& c1 : cells[j])
            for (const auto& c2 : cells[j]) {
                const double d = std::abs(c1.c - c2.c);
                if (d < cfg.pair_min * s - 1e-12 || d > cfg.pair_max * s + 1e-12) continue;
                pairs.push_back({s, &c1, &c2});
                for (std::size_t a = 0; a < c1.slots.size(); ++a)
                    for (std::size_t b = 0; b < c2.slots.size(); ++b)
                        Gt[c1.slots[a] * n + c2.slots[b]] += c1.w[a] * c2.w[b];
            }
    }
    CVec st(n * n, 0.0);
    for (std::size_t i = 0; i < n * n; ++i) {
        if (Gt[i] > 0.0)
            st[i] = sc[i] / Gt[i];
        else if (std::abs(sc[i]) > 0.0)
            ++rep.gaps;
    }

    ModelSum& M = res.model;
    M.kappa = {1.0, 1.0, 2.0};
    M.damping = cfg.damping;
    M.collection.area_bound = 8.0;
    const WavePacketProfile prof = WavePacketProfile::standard();
    const double P2 = P * P;
    const long nh = static_cast<long>(n / 2);
    rep.min_freq_length = std::numeric_limits<double>::infinity();

    for (const Pair& pr : pairs) {
        const double s = pr.s, Is = 1.0 / s, c1 = pr.c1->c, c2 = pr.c2->c;
        bool any = false;
        for (std::size_t a : pr.c1->slots)
            for (std::size_t b : pr.c2->slots) any = any || st[a * n + b] != 0.0;
        if (!any) continue;
        ++rep.pairs;
        const int nt = static_cast<int>(std::lround(P * s));
        const PacketSpectrum p1 = packet_spectrum(Tile(Interval(0.0, Is), Interval(c1, s)), prof, g);
        const PacketSpectrum p2 = packet_spectrum(Tile(Interval(0.0, Is), Interval(c2, s)), prof, g);
        const std::vector<int> u2s = translations(cfg.u_max, nt), u3s = translations(cfg.u_max, 2 * nt);

        // antidiagonal sums A_u2[m] = sum_{k_a + k_b = m} st P1 P2_u2, m offset by n
        std::vector<CVec> A;
        for (int u2 : u2s) {
            CVec acc(2 * n, 0.0);
            const CVec v2 = translated(p2, g, c2, Is, u2);
            for (std::size_t a = 0; a < p1.slots.size(); ++a)
                for (std::size_t b = 0; b < p2.slots.size(); ++b) {
                    const cplx v = st[p1.slots[a] * n + p2.slots[b]];
                    if (v == 0.0) continue;
                    const long m = g.bin(p1.slots[a]) + g.bin(p2.slots[b]);
                    acc[static_cast<std::size_t>(m + static_cast<long>(n))] += v * p1.values[a] * v2[b];
                }
            A.push_back(std::move(acc));
        }

        const double mid = 0.5 * (c1 + c2);
        const long mlo = static_cast<long>(std::floor((mid - s) / (0.5 * s))) - 1;
        const long mhi = static_cast<long>(std::ceil((mid + s) / (0.5 * s))) + 1;
        for (long m3 = mlo; m3 <= mhi; ++m3) {
            const double c3 = 0.5 * s * m3;
            if (std::abs(c3 - mid) >= s - 1e-12) continue;
            if (std::abs(c3 - c1) < s - 1e-12 || std::abs(c3 - c2) < s - 1e-12) continue;
            if (2.0 * c3 - s < -nyq || 2.0 * c3 + s > nyq) continue;
            const PacketSpectrum p3 = packet_spectrum(Tile(Interval(0.0, 0.5 * Is), Interval(2.0 * c3, 2.0 * s)), prof, g);
            TermTable tab;
            double mx = 0.0;
            for (std::size_t q2 = 0; q2 < u2s.size(); ++q2)
                for (int u3 : u3s) {
                    const CVec v3 = translated(p3, g, 2.0 * c3, 0.5 * Is, u3);
                    cplx acc = 0.0;
                    for (std::size_t i = 0; i < p3.slots.size(); ++i) {
                        const long m = g.bin(p3.slots[i]);
                        if (m < -nh || m >= nh) continue;
                        acc += A[q2][static_cast<std::size_t>(m + static_cast<long>(n))] * std::conj(v3[i]);
                    }
                    const cplx coef = acc / P2 / 8.0;
                    const double uu = 1.0 + double(u2s[q2]) * u2s[q2] + double(u3) * u3;
                    tab.us.push_back({0, u2s[q2], u3});
                    tab.eps.push_back(coef * std::sqrt(Is) * std::pow(uu, cfg.damping));
                    mx = std::max(mx, std::abs(coef));
                }
            if (!(mx > 0.0)) continue;
            ++rep.triples;
            const double lo = std::min({c1, c2, c3}) - 0.5 * s, hi = std::max({c1, c2, c3}) + 0.5 * s;
            const Interval hull = Interval::from_endpoints(lo, hi);
            const std::array<Interval, 3> subs{Interval(c1, s), Interval(c2, s), Interval(c3, s)};
            M.tables.push_back(std::move(tab));
            const auto tid = static_cast<std::uint32_t>(M.tables.size() - 1);
            for (int k = 0; k < nt; ++k) {
                double xc = k * Is;
                if (xc >= 0.5 * P) xc -= P;
                M.collection.tiles.emplace_back(Interval(xc, Is), hull, subs);
                M.terms.push_back({tid, std::polar(1.0, kTwoPi * (c1 + c2 - 2.0 * c3) * k * Is)});
            }
            rep.min_freq_length = std::min(rep.min_freq_length, kTwoPi * hull.length);
            rep.max_time_length = std::max(rep.max_time_length, Is);
        }
    }
    M.normalize();
    rep.tiles = M.collection.size();
    if (rep.tiles == 0) rep.min_freq_length = 0.0;
    rep.remarque_ok = rep.tiles == 0 || rep.min_freq_length >= 0.5 / L;

    const Symbol cut = tabulated_symbol(g, sc);
    for (const auto& [f, h] : probes) {
        const double nf = lp_norm(f, 2.0) * lp_norm(h, 2.0);
        const SampledFunction mo = model_sum_eval(M, f, h);
        rep.remainder.push_back(lp_norm(mo - eval_direct(sym, f, h), 1.0) / nf);
        rep.cutoff_remainder.push_back(lp_norm(mo - eval_direct(cut, f, h), 1.0) / nf);
    }
    return res;
}

}  // namespace bilop
