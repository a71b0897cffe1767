#include "bilop/tilemodel.hpp"

#include "bilop/smooth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace bilop {

namespace {

constexpr double kAreaTol = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt(const Interval& I) { return "[" + fmt(I.left()) + ", " + fmt(I.right()) + ")"; }

bool interval_eq(const Interval& a, const Interval& b) { return a.center == b.center && a.length == b.length; }

}  // namespace

Tile::Tile(const Interval& I, const Interval& w) : time(I), freq(w) {
    if (std::abs(I.length * w.length - 1.0) > kAreaTol)
        throw InvariantViolation("tile area " + fmt(I.length * w.length) + " differs from 1");
}

TriTile::TriTile(const Interval& I, const Interval& w, const std::array<Interval, 3>& subs)
    : time(I), freq(w), sub(subs) {
    for (int i = 0; i < 3; ++i) {
        Tile(I, subs[i]);
        if (!w.contains(subs[i])) throw InvariantViolation("sub-frequency " + fmt(subs[i]) + " not inside " + fmt(w));
        for (int j = i + 1; j < 3; ++j)
            if (!subs[i].disjoint(subs[j]))
                throw InvariantViolation("sub-frequencies " + fmt(subs[i]) + " and " + fmt(subs[j]) + " overlap");
    }
}

bool TriTile::operator==(const TriTile& o) const {
    return interval_eq(time, o.time) && interval_eq(freq, o.freq) && interval_eq(sub[0], o.sub[0]) &&
           interval_eq(sub[1], o.sub[1]) && interval_eq(sub[2], o.sub[2]);
}

bool operator<(const Interval& a, const Interval& b) {
    return std::tie(a.center, a.length) < std::tie(b.center, b.length);
}

bool operator<(const TriTile& a, const TriTile& b) {
    return std::tie(a.time, a.freq, a.sub[0], a.sub[1], a.sub[2]) <
           std::tie(b.time, b.freq, b.sub[0], b.sub[1], b.sub[2]);
}

namespace {

std::vector<Interval> sorted_unique(std::vector<Interval> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), interval_eq), v.end());
    return v;
}

/// Max over dyadic scales k of the pointwise count of members with length in [2^{k-1}, 2^{k+1}].
GridOverlap grid_overlap(const std::vector<Interval>& family) {
    std::map<int, std::vector<std::size_t>> by_scale;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const double lg = std::log2(family[i].length);
        const int lo = static_cast<int>(std::ceil(lg - 1.0));
        const int hi = static_cast<int>(std::floor(lg + 1.0));
        for (int k = lo; k <= hi; ++k) {
            const double len = family[i].length;
            if (len >= std::ldexp(1.0, k - 1) && len <= std::ldexp(1.0, k + 1)) by_scale[k].push_back(i);
        }
    }
    GridOverlap best;
    for (const auto& [k, idx] : by_scale) {
        // half-open intervals: closing events sort before opening ones at equal abscissa
        std::vector<std::pair<double, int>> ev;
        ev.reserve(2 * idx.size());
        for (std::size_t i : idx) {
            ev.emplace_back(family[i].left(), +1);
            ev.emplace_back(family[i].right(), -1);
        }
        std::sort(ev.begin(), ev.end());
        int cur = 0;
        for (const auto& [x, d] : ev) {
            cur += d;
            if (cur > best.overlap) {
                best.overlap = cur;
                best.scale = k;
                best.witness = x;
            }
        }
    }
    return best;
}

}  // namespace

std::vector<Interval> Collection::time_family() const {
    std::vector<Interval> v;
    v.reserve(tiles.size());
    for (const auto& s : tiles) v.push_back(s.time);
    return sorted_unique(std::move(v));
}

std::vector<Interval> Collection::freq_family() const {
    std::vector<Interval> v;
    v.reserve(4 * tiles.size());
    for (const auto& s : tiles) {
        v.push_back(s.freq);
        for (const auto& w : s.sub) v.push_back(w);
    }
    return sorted_unique(std::move(v));
}

Collection Collection::subset(const std::vector<std::size_t>& idx) const {
    Collection c;
    c.area_bound = area_bound;
    for (std::size_t i : idx) c.tiles.push_back(tiles.at(i));
    return c;
}

ValidationReport collection_validate(const Collection& S, double overlap_bound) {
    ValidationReport r;
    r.tiles = S.size();
    r.overlap_bound = overlap_bound;
    auto witness = [&r](std::string w) {
        if (r.witnesses.size() < 32) r.witnesses.push_back(std::move(w));
    };

    for (std::size_t t = 0; t < S.size(); ++t) {
        const auto& s = S.tiles[t];
        if (s.area() > S.area_bound * (1.0 + kAreaTol)) {
            r.area_ok = false;
            witness("tri-tile " + std::to_string(t) + ": area " + fmt(s.area()) + " exceeds " + fmt(S.area_bound));
        }
        for (int i = 0; i < 3; ++i) {
            if (std::abs(s.time.length * s.sub[i].length - 1.0) > kAreaTol) {
                r.area_ok = false;
                witness("tri-tile " + std::to_string(t) + ": sub-tile " + std::to_string(i + 1) + " has area " +
                        fmt(s.time.length * s.sub[i].length));
            }
            if (!s.freq.contains(s.sub[i])) {
                r.disjoint_ok = false;
                witness("tri-tile " + std::to_string(t) + ": w_s" + std::to_string(i + 1) + " not inside w_s");
            }
            for (int j = i + 1; j < 3; ++j)
                if (!s.sub[i].disjoint(s.sub[j])) {
                    r.disjoint_ok = false;
                    witness("tri-tile " + std::to_string(t) + ": w_s" + std::to_string(i + 1) + " meets w_s" +
                            std::to_string(j + 1));
                }
        }
    }

    // repeated tri-tiles stack their time intervals
    std::vector<std::size_t> order(S.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&S](std::size_t a, std::size_t b) { return S.tiles[a] < S.tiles[b]; });
    std::size_t worst_rep = 0;
    for (std::size_t a = 0; a < order.size();) {
        std::size_t b = a;
        while (b < order.size() && S.tiles[order[b]] == S.tiles[order[a]]) ++b;
        if (b - a > r.max_multiplicity) {
            r.max_multiplicity = b - a;
            worst_rep = order[a];
        }
        a = b;
    }

    r.time = grid_overlap(S.time_family());
    r.freq = grid_overlap(S.freq_family());
    if (r.max_multiplicity > 1) {
        r.distinct_ok = false;
        const auto& s = S.tiles[worst_rep];
        witness("tri-tile " + std::to_string(worst_rep) + " repeated " + std::to_string(r.max_multiplicity) +
                " times");
        if (static_cast<double>(r.max_multiplicity) > r.time.overlap) {
            r.time.overlap = static_cast<double>(r.max_multiplicity);
            r.time.witness = s.time.center;
            r.time.scale = static_cast<int>(std::lround(std::log2(s.time.length)));
        }
    }
    if (r.time.overlap > overlap_bound) {
        r.time_grid_ok = false;
        witness("time grid: overlap " + fmt(r.time.overlap) + " at x = " + fmt(r.time.witness) + " (scale 2^" +
                std::to_string(r.time.scale) + ")");
    }
    if (r.freq.overlap > overlap_bound) {
        r.freq_grid_ok = false;
        witness("frequency grid: overlap " + fmt(r.freq.overlap) + " at xi = " + fmt(r.freq.witness) +
                " (scale 2^" + std::to_string(r.freq.scale) + ")");
    }

    // nesting: w_si strictly inside some member of J forces all three w_sj inside it
    std::vector<Interval> J = S.freq_family();
    std::sort(J.begin(), J.end(), [](const Interval& a, const Interval& b) { return a.left() < b.left(); });
    double maxlen = 0.0;
    for (const auto& w : J) maxlen = std::max(maxlen, w.length);
    std::vector<std::array<Interval, 3>> triples;
    triples.reserve(S.size());
    for (const auto& s : S.tiles) triples.push_back(s.sub);
    std::sort(triples.begin(), triples.end(), [](const auto& a, const auto& b) {
        return std::tie(a[0], a[1], a[2]) < std::tie(b[0], b[1], b[2]);
    });
    triples.erase(std::unique(triples.begin(), triples.end(),
                              [](const auto& a, const auto& b) {
                                  return interval_eq(a[0], b[0]) && interval_eq(a[1], b[1]) &&
                                         interval_eq(a[2], b[2]);
                              }),
                  triples.end());
    for (const auto& tr : triples) {
        for (int i = 0; i < 3; ++i) {
            const Interval& w = tr[i];
            auto first = std::lower_bound(J.begin(), J.end(), w.right() - maxlen,
                                          [](const Interval& a, double v) { return a.left() < v; });
            for (auto it = first; it != J.end() && it->left() <= w.left(); ++it) {
                if (!it->contains(w) || interval_eq(*it, w)) continue;
                bool all = it->contains(tr[0]) && it->contains(tr[1]) && it->contains(tr[2]);
                if (!all) {
                    if (r.nesting_failures == 0)
                        witness("nesting: " + fmt(w) + " inside " + fmt(*it) + " but not all sub-frequencies are");
                    ++r.nesting_failures;
                }
            }
        }
    }
    r.nesting_ok = r.nesting_failures == 0;
    r.pass = r.area_ok && r.disjoint_ok && r.time_grid_ok && r.freq_grid_ok && r.nesting_ok && r.distinct_ok;
    return r;
}

void write_collection(std::ostream& os, const Collection& S, const ValidationReport* report) {
    os << "# bilop-collection 1\n";
    os << "# tiles " << S.size() << " area_bound " << fmt(S.area_bound) << "\n";
    if (report)
        os << "# time_overlap " << fmt(report->time.overlap) << " freq_overlap " << fmt(report->freq.overlap) << "\n";
    os << "# I_center I_len w_center w_len w1_center w1_len w2_center w2_len w3_center w3_len\n";
    for (const auto& s : S.tiles) {
        os << fmt(s.time.center) << ' ' << fmt(s.time.length) << ' ' << fmt(s.freq.center) << ' '
           << fmt(s.freq.length);
        for (const auto& w : s.sub) os << ' ' << fmt(w.center) << ' ' << fmt(w.length);
        os << '\n';
    }
}

Collection read_collection(std::istream& is) {
    Collection S;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        if (line[line.find_first_not_of(" \t")] == '#') {
            std::string tok;
            ls >> tok;
            while (ls >> tok)
                if (tok == "area_bound" && !(ls >> S.area_bound))
                    throw ShapeError("line " + std::to_string(lineno) + ": bad area_bound");
            continue;
        }
        double v[10];
        for (double& x : v)
            if (!(ls >> x)) throw ShapeError("line " + std::to_string(lineno) + ": expected 10 numbers");
        std::string extra;
        if (ls >> extra) throw ShapeError("line " + std::to_string(lineno) + ": trailing field '" + extra + "'");
        try {
            S.tiles.emplace_back(Interval(v[0], v[1]), Interval(v[2], v[3]),
                                 std::array<Interval, 3>{Interval(v[4], v[5]), Interval(v[6], v[7]),
                                                         Interval(v[8], v[9])});
        } catch (const InvariantViolation& e) {
            throw InvariantViolation("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return S;
}

void save_collection(const std::string& path, const Collection& S) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    ValidationReport r = collection_validate(S);
    write_collection(os, S, &r);
}

Collection load_collection(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    return read_collection(is);
}

WavePacketProfile WavePacketProfile::standard() {
    return {[](double t) { return std::sqrt(2.0 * packet_window(t)); }, "sqrt(2g)"};
}

SampledFunction WavePacketProfile::sample(const Grid& g) const {
    return wave_packet(Tile(Interval(0.0, 1.0), Interval(0.0, 1.0)), *this, g);
}

PacketSpectrum packet_spectrum(const Tile& P, const WavePacketProfile& phi, const Grid& g) {
    const double period = g.period();
    const double h = g.spacing;
    const double len = P.time.length;
    if (len < 4.0 * h * (1.0 - 1e-12))
        throw ResolutionError("tile time length " + fmt(len) + " below 4h = " + fmt(4.0 * h));
    if (len > 0.5 * period * (1.0 + 1e-12))
        throw ResolutionError("tile time length " + fmt(len) + " above half the period " + fmt(0.5 * period));
    const double nyq = g.nyquist();
    if (P.freq.left() < -nyq * (1.0 + 1e-12) || P.freq.right() > nyq * (1.0 + 1e-12))
        throw ResolutionError("tile frequency " + fmt(P.freq) + " outside the band [-" + fmt(nyq) + ", " +
                              fmt(nyq) + ")");
    const long half = static_cast<long>(g.count / 2);
    const long klo = std::max(-half, static_cast<long>(std::ceil(P.freq.left() * period)));
    const long khi = std::min(half - 1, static_cast<long>(std::floor(P.freq.right() * period)));
    PacketSpectrum p;
    double norm2 = 0.0;
    const double amp = std::sqrt(len);
    for (long k = klo; k <= khi; ++k) {
        const double dxi = static_cast<double>(k) / period - P.freq.center;
        const double t = len * dxi;
        if (std::abs(t) >= 0.5) continue;
        const double a = phi.hat(t);
        if (a == 0.0) continue;
        const cplx v = amp * a * std::polar(1.0, -kTwoPi * P.time.center * dxi);
        p.slots.push_back(g.slot(k));
        p.values.push_back(v);
        norm2 += std::norm(v);
    }
    norm2 /= period;
    if (!(norm2 > 0.0)) throw ResolutionError("tile frequency " + fmt(P.freq) + " contains no grid bin");
    const double s = 1.0 / std::sqrt(norm2);
    for (auto& v : p.values) v *= s;
    return p;
}

CVec continuous_ft(const SampledFunction& f) {
    const Grid& g = f.grid;
    CVec raw = fft_raw(f.values, -1);
    for (std::size_t k = 0; k < raw.size(); ++k)
        raw[k] *= g.spacing * std::polar(1.0, -kTwoPi * g.freq(k) * g.origin);
    return raw;
}

SampledFunction from_continuous_ft(const Grid& g, const CVec& F) {
    if (F.size() != g.count) throw ShapeError("spectrum length does not match the grid");
    CVec c(F.size());
    for (std::size_t k = 0; k < F.size(); ++k) c[k] = F[k] * std::polar(1.0, kTwoPi * g.freq(k) * g.origin);
    CVec raw = fft_raw(c, +1);
    const double inv = 1.0 / g.period();
    for (auto& v : raw) v *= inv;
    return SampledFunction(g, std::move(raw));
}

SampledFunction wave_packet(const Tile& P, const WavePacketProfile& phi, const Grid& g) {
    PacketSpectrum p = packet_spectrum(P, phi, g);
    CVec F(g.count, 0.0);
    for (std::size_t i = 0; i < p.slots.size(); ++i) F[p.slots[i]] = p.values[i];
    return from_continuous_ft(g, F);
}

cplx packet_coefficient(const CVec& F, const PacketSpectrum& p, double period) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < p.slots.size(); ++i) acc += F[p.slots[i]] * std::conj(p.values[i]);
    return acc / period;
}

void ModelSum::add(const TriTile& s, cplx e) { add(s, TermTable{{{0, 0, 0}}, {e}}); }

void ModelSum::add(const TriTile& s, TermTable table) {
    if (table.us.size() != table.eps.size()) throw ShapeError("term table: u list and coefficients differ in length");
    collection.tiles.push_back(s);
    tables.push_back(std::move(table));
    terms.push_back({static_cast<std::uint32_t>(tables.size() - 1), 1.0});
}

cplx ModelSum::eps(std::size_t tile, std::size_t q) const {
    const TileTerm& t = terms[tile];
    return t.factor * tables[t.table].eps[q];
}

double ModelSum::max_abs_eps() const {
    std::vector<double> tmax(tables.size(), 0.0);
    for (std::size_t i = 0; i < tables.size(); ++i)
        for (const auto& e : tables[i].eps) tmax[i] = std::max(tmax[i], std::abs(e));
    double m = 0.0;
    for (const auto& t : terms) m = std::max(m, std::abs(t.factor) * tmax[t.table]);
    return m;
}

void ModelSum::normalize() {
    const double m = max_abs_eps();
    if (!(m > 0.0)) return;
    for (auto& t : tables)
        for (auto& e : t.eps) e /= m;
    amplitude *= m;
}

namespace {

Tile family_tile(const TriTile& s, int family, double kappa, int u) {
    const double k = std::abs(kappa);
    const double len = s.time.length / k;
    return Tile(Interval(s.time.center + u * len, len),
                Interval(kappa * s.sub[family].center, k * s.sub[family].length));
}

/// Packet spectra of one family of a tri-tile for the translations needed.
struct PacketBank {
    PacketSpectrum base;
    std::vector<int> us;
    std::vector<CVec> shifted;   // values of the packet translated by u
};

PacketBank make_bank(const Tile& base_tile, const WavePacketProfile& prof, const Grid& g, std::vector<int> us) {
    PacketBank b;
    b.base = packet_spectrum(base_tile, prof, g);
    std::sort(us.begin(), us.end());
    us.erase(std::unique(us.begin(), us.end()), us.end());
    b.us = us;
    const std::size_t m = b.base.slots.size();
    const double period = g.period();
    CVec tw(m), cur(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double dxi = static_cast<double>(g.bin(b.base.slots[i])) / period - base_tile.freq.center;
        const double theta = -kTwoPi * base_tile.time.length * dxi;
        tw[i] = std::polar(1.0, theta);
        if (!us.empty()) cur[i] = std::polar(1.0, theta * us.front());
    }
    int at = us.empty() ? 0 : us.front();
    for (int u : us) {
        for (; at < u; ++at)
            for (std::size_t i = 0; i < m; ++i) cur[i] *= tw[i];
        CVec v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = b.base.values[i] * cur[i];
        b.shifted.push_back(std::move(v));
    }
    return b;
}

std::size_t bank_index(const PacketBank& b, int u) {
    return static_cast<std::size_t>(std::lower_bound(b.us.begin(), b.us.end(), u) - b.us.begin());
}

cplx bank_coefficient(const PacketBank& b, std::size_t q, const CVec& F, double period) {
    cplx acc = 0.0;
    const CVec& v = b.shifted[q];
    for (std::size_t i = 0; i < v.size(); ++i) acc += F[b.base.slots[i]] * std::conj(v[i]);
    return acc / period;
}

}  // namespace

Tile packet_tile(const ModelSum& M, std::size_t tile, int family, int u) {
    return family_tile(M.collection.tiles.at(tile), family, M.kappa[family], u);
}

SampledFunction model_sum_eval(const ModelSum& M, const SampledFunction& f, const SampledFunction& g) {
    std::vector<std::size_t> all(M.collection.size());
    std::iota(all.begin(), all.end(), 0);
    return model_sum_eval(M, f, g, all);
}

SampledFunction model_sum_eval(const ModelSum& M, const SampledFunction& f, const SampledFunction& g,
                               const std::vector<std::size_t>& subset) {
    require_same_grid(f, g, "model_sum_eval");
    if (M.terms.size() != M.collection.size()) throw ShapeError("model sum: one term entry per tri-tile required");
    const Grid& grid = f.grid;
    const double period = grid.period();
    CVec out(grid.count, 0.0);
    if (subset.empty()) return SampledFunction(grid, out);
    const CVec F = continuous_ft(f);
    const CVec G = continuous_ft(g);
    for (std::size_t t : subset) {
        const TriTile& s = M.collection.tiles.at(t);
        const TileTerm& term = M.terms[t];
        const TermTable& tab = M.tables.at(term.table);
        if (tab.us.empty()) continue;
        std::array<std::vector<int>, 3> need;
        for (const auto& u : tab.us)
            for (int i = 0; i < 3; ++i) need[i].push_back(u[i]);
        std::array<PacketBank, 3> bank;
        for (int i = 0; i < 3; ++i)
            bank[i] = make_bank(family_tile(s, i, M.kappa[i], 0), M.profiles[i], grid, need[i]);
        CVec a1(bank[0].us.size()), a2(bank[1].us.size());
        for (std::size_t q = 0; q < a1.size(); ++q) a1[q] = bank_coefficient(bank[0], q, F, period);
        for (std::size_t q = 0; q < a2.size(); ++q) a2[q] = bank_coefficient(bank[1], q, G, period);
        CVec B(bank[2].us.size(), 0.0);
        const cplx pre = M.amplitude * term.factor / std::sqrt(s.time.length);
        for (std::size_t q = 0; q < tab.us.size(); ++q) {
            const auto& u = tab.us[q];
            const double u2 = double(u[0]) * u[0] + double(u[1]) * u[1] + double(u[2]) * u[2];
            const double damp = std::pow(1.0 + u2, -M.damping);
            B[bank_index(bank[2], u[2])] +=
                pre * damp * tab.eps[q] * a1[bank_index(bank[0], u[0])] * a2[bank_index(bank[1], u[1])];
        }
        for (std::size_t q = 0; q < B.size(); ++q) {
            if (B[q] == 0.0) continue;
            const CVec& v = bank[2].shifted[q];
            for (std::size_t i = 0; i < v.size(); ++i) out[bank[2].base.slots[i]] += B[q] * v[i];
        }
    }
    return from_continuous_ft(grid, out);
}

ScalePartition scale_partition(const ModelSum& M, const Interval& I) {
    ScalePartition p;
    const Interval twoI = I.dilate(2.0);
    std::map<int, std::vector<std::size_t>> outer;
    for (std::size_t t = 0; t < M.collection.size(); ++t) {
        const Interval& Is = M.collection.tiles[t].time;
        if (twoI.contains(Is)) {
            p.inner.push_back(t);
            continue;
        }
        if (Is.length >= 2.0 * I.length)
            throw PreconditionError("tri-tile " + std::to_string(t) + ": I_s = " + fmt(Is) + " lies outside 2I = " +
                                    fmt(twoI) + " with |I_s| >= 2|I|");
        int l = static_cast<int>(std::floor(std::log2(Is.length / I.length)));
        while (std::ldexp(I.length, l) > Is.length) --l;
        while (std::ldexp(I.length, l + 1) <= Is.length) ++l;
        outer[l].push_back(t);
    }
    for (auto& [l, v] : outer) p.outer.emplace_back(l, std::move(v));
    return p;
}

Decomposition model_sum_decompose(const ModelSum& M, const Interval& I, const SampledFunction& f,
                                  const SampledFunction& g) {
    require_same_grid(f, g, "model_sum_decompose");
    const Grid& grid = f.grid;
    ScalePartition part = scale_partition(M, I);
    Decomposition d;
    d.interval = I;
    d.max_corona = max_corona_index(I, grid);
    d.sum = SampledFunction(grid);
    std::vector<SampledFunction> fk, gk;
    for (int k = 0; k <= d.max_corona; ++k) {
        const Mask m = corona(I, k, grid).mask;
        fk.push_back(masked(f, m));
        gk.push_back(masked(g, m));
    }
    auto emit = [&](int kind, int k1, int k2, int l, const std::vector<std::size_t>& tiles) {
        DecompositionPiece p;
        p.kind = kind;
        p.k1 = k1;
        p.k2 = k2;
        p.l = l;
        p.tiles = tiles.size();
        p.value = model_sum_eval(M, fk[k1], gk[k2], tiles);
        d.sum = d.sum + p.value;
        d.pieces.push_back(std::move(p));
    };
    for (int k1 = 0; k1 <= d.max_corona; ++k1)
        for (int k2 = 0; k2 <= d.max_corona; ++k2) {
            if (!part.inner.empty()) emit(0, k1, k2, 0, part.inner);
            for (const auto& [l, tiles] : part.outer) emit(1, k1, k2, l, tiles);
        }
    return d;
}

bool is_tree_member(const TriTile& top, int j, const TriTile& s) {
    return top.time.contains(s.time) && s.sub[j - 1].contains(top.sub[j - 1]);
}

void validate_tree(const Collection& Q, const Tree& T) {
    if (T.j < 1 || T.j > 3) throw InvariantViolation("tree index must be 1, 2 or 3");
    for (std::size_t m : T.members) {
        if (m >= Q.size()) throw InvariantViolation("tree member " + std::to_string(m) + " not in the collection");
        const TriTile& s = Q.tiles[m];
        if (!T.top.time.contains(s.time))
            throw InvariantViolation("tree member " + std::to_string(m) + ": I_s = " + fmt(s.time) +
                                     " not inside I_top = " + fmt(T.top.time));
        if (!s.sub[T.j - 1].contains(T.top.sub[T.j - 1]))
            throw InvariantViolation("tree member " + std::to_string(m) + ": w_top," + std::to_string(T.j) +
                                     " not inside w_s," + std::to_string(T.j));
    }
}

namespace {

double energy(const TriTile& s, int k, const CVec& F, const Grid& g, const PacketFamily& fam) {
    PacketSpectrum p = packet_spectrum(family_tile(s, k, fam.kappa, 0), fam.profile, g);
    return std::norm(packet_coefficient(F, p, g.period()));
}

}  // namespace

double size_tree(const Collection& Q, const Tree& T, const SampledFunction& f, const PacketFamily& fam) {
    validate_tree(Q, T);
    if (T.members.empty()) return 0.0;
    const CVec F = continuous_ft(f);
    double acc = 0.0;
    for (std::size_t m : T.members) acc += energy(Q.tiles[m], T.j - 1, F, f.grid, fam);
    return std::sqrt(acc / T.top.time.length);
}

std::array<RVec, 3> packet_energies(const Collection& Q, const SampledFunction& f, const PacketFamily& fam) {
    const CVec F = continuous_ft(f);
    std::array<RVec, 3> e;
    for (int k = 0; k < 3; ++k) {
        e[k].resize(Q.size());
        for (std::size_t s = 0; s < Q.size(); ++s) e[k][s] = energy(Q.tiles[s], k, F, f.grid, fam);
    }
    return e;
}

namespace {

void scan_top(const Collection& Q, const std::array<RVec, 3>& e, int j, std::size_t t, SizeStar& best) {
    for (int k = 1; k <= 3; ++k) {
        if (k == j) continue;
        double acc = 0.0;
        for (std::size_t s = 0; s < Q.size(); ++s)
            if (is_tree_member(Q.tiles[t], k, Q.tiles[s])) acc += e[k - 1][s];
        const double v = std::sqrt(acc / Q.tiles[t].time.length);
        ++best.trees_examined;
        if (v > best.value || !best.top) {
            best.value = v;
            best.tree_index = k;
            best.top = t;
        }
    }
}

}  // namespace

SizeStar size_star(const Collection& Q, const SampledFunction& f, int j, const PacketFamily& fam,
                   std::size_t max_tiles) {
    if (j < 1 || j > 3) throw ParameterError("size_star: j must be 1, 2 or 3");
    if (Q.size() > max_tiles)
        throw SizeError("size_star: " + std::to_string(Q.size()) + " tri-tiles exceed the exhaustive limit " +
                        std::to_string(max_tiles) + "; use size_star_sampled");
    SizeStar best;
    if (Q.empty()) return best;
    const auto e = packet_energies(Q, f, fam);
    for (std::size_t t = 0; t < Q.size(); ++t) scan_top(Q, e, j, t, best);
    return best;
}

SizeStar size_star_sampled(const Collection& Q, const SampledFunction& f, int j, std::size_t tops, Rng& rng,
                           const PacketFamily& fam) {
    if (j < 1 || j > 3) throw ParameterError("size_star_sampled: j must be 1, 2 or 3");
    SizeStar best;
    best.exhaustive = false;
    if (Q.empty()) return best;
    const auto e = packet_energies(Q, f, fam);
    for (std::size_t i = 0; i < tops; ++i) {
        const auto t = static_cast<std::size_t>(rng.integer(0, static_cast<int>(Q.size()) - 1));
        scan_top(Q, e, j, t, best);
    }
    return best;
}

SizeBoundReport size_bound_check(const Collection& Q, const SampledFunction& f, int j, double N,
                                 const PacketFamily& fam) {
    SizeBoundReport r;
    r.N = N;
    r.size_star = size_star(Q, f, j, fam).value;
    const Grid& g = f.grid;
    for (const auto& s : Q.tiles) {
        const double len = s.time.length;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.count; ++i) {
            const double d = std::max(0.0, std::abs(g.x(i) - s.time.center) - 0.5 * len);
            acc += std::pow(1.0 + d / len, -N) * std::abs(f[i]);
        }
        r.majorant = std::max(r.majorant, acc * g.spacing / len);
    }
    if (r.majorant > 0.0)
        r.ratio = r.size_star / r.majorant;
    else
        r.ratio = r.size_star > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.finite = std::isfinite(r.ratio);
    return r;
}

double profile_seminorm(const SampledFunction& phi, int M) {
    if (M < 0) throw ParameterError("profile_seminorm: M must be nonnegative");
    std::vector<SampledFunction> d;
    d.push_back(phi);
    for (int k = 1; k <= M; ++k) d.push_back(spectral_derivative(phi, k));
    double best = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double acc = 0.0;
        for (const auto& dk : d) acc += std::abs(dk[i]);
        best = std::max(best, std::pow(1.0 + std::abs(phi.grid.x(i)), M) * acc);
    }
    return best;
}

cplx trilinear_form(const ModelSum& M, const SampledFunction& f1, const SampledFunction& f2,
                    const SampledFunction& f3, const Interval& I) {
    require_same_grid(f1, f3, "trilinear_form");
    SampledFunction T = model_sum_eval(M, f1, f2);
    return inner(T, masked(f3, interval_mask(I, f3.grid)));
}

PropositionReport tree_proposition_diagnostic(const Collection& Q, const SampledFunction& f1,
                                              const SampledFunction& f2, const SampledFunction& f3,
                                              const std::array<double, 3>& theta) {
    double sum = 0.0;
    for (double t : theta) {
        if (!(t >= 0.0 && t < 1.0)) throw ParameterError("theta_i must lie in [0, 1)");
        sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("theta_1 + theta_2 + theta_3 must equal 1");
    require_same_grid(f1, f2, "tree_proposition_diagnostic");
    require_same_grid(f1, f3, "tree_proposition_diagnostic");
    const Grid& g = f1.grid;
    const std::array<const SampledFunction*, 3> fs{&f1, &f2, &f3};
    std::array<CVec, 3> F;
    for (int i = 0; i < 3; ++i) F[i] = continuous_ft(*fs[i]);
    const WavePacketProfile prof = WavePacketProfile::standard();
    cplx acc = 0.0;
    for (const auto& s : Q.tiles) {
        cplx term = 1.0 / std::sqrt(s.time.length);
        for (int i = 0; i < 3; ++i)
            term *= packet_coefficient(F[i], packet_spectrum(s.tile(i), prof, g), g.period());
        acc += term;
    }
    PropositionReport r;
    r.lhs = std::abs(acc);
    r.rhs = 1.0;
    for (int i = 0; i < 3; ++i) {
        r.sizes[i] = size_star(Q, *fs[i], i + 1).value;
        r.norms[i] = lp_norm(*fs[i], 2.0);
        r.rhs *= std::pow(r.sizes[i], theta[i]) * std::pow(r.norms[i], 1.0 - theta[i]);
    }
    if (r.rhs > 0.0)
        r.ratio = r.lhs / r.rhs;
    else
        r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return r;
}

}  // namespace bilop

namespace bilop {

Tile random_admissible_tile(const Grid& g, Rng& rng) {
    const double lo = std::log(4.0 * g.spacing), hi = std::log(0.5 * g.period());
    const double len = std::exp(rng.uniform(lo, hi));
    const double w = 1.0 / len;
    const double nyq = g.nyquist();
    const double c = rng.uniform(-nyq + 0.5 * w, nyq - 0.5 * w);
    const double x = rng.uniform(-0.5 * g.period(), 0.5 * g.period());
    return Tile(Interval(x, len), Interval(c, w));
}

Collection random_collection(const Grid& g, std::size_t count, Rng& rng, double min_len, double max_len) {
    const int amin = static_cast<int>(std::ceil(std::log2(min_len) - 1e-12));
    const int amax = static_cast<int>(std::floor(std::log2(max_len) + 1e-12));
    if (amin > amax) throw ParameterError("random_collection: no dyadic length in range");
    const double period = g.period();
    const double nyq = g.nyquist();
    Collection S;
    while (S.size() < count) {
        const double len = std::ldexp(1.0, rng.integer(amin, amax));
        const double w = 1.0 / len;
        const long slots = static_cast<long>(std::floor(period / len));
        const long cells = static_cast<long>(std::floor(2.0 * nyq / w)) - 3;
        if (slots < 1 || cells < 1) throw ParameterError("random_collection: length " + std::to_string(len) +
                                                         " does not fit the grid");
        const double x = -0.5 * period + (rng.integer(0, static_cast<int>(slots) - 1) + 0.5) * len;
        const double base = -nyq + rng.integer(0, static_cast<int>(cells) - 1) * w;
        const int skip = rng.integer(0, 3);
        std::array<Interval, 3> subs;
        for (int c = 0, i = 0; c < 4; ++c)
            if (c != skip) subs[i++] = Interval(base + (c + 0.5) * w, w);
        S.tiles.emplace_back(Interval(x, len), Interval(base + 2.0 * w, 4.0 * w), subs);
    }
    return S;
}

}  // namespace bilop
