#pragma once

#include "bilop/signal.hpp"
#include "bilop/symbol.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bilop {

/// Time interval I and frequency interval w (cycles) with |I| |w| = 1.
struct Tile {
    Interval time;
    Interval freq;

    Tile() = default;
    Tile(const Interval& I, const Interval& w);
};

struct TriTile {
    Interval time;
    Interval freq;
    std::array<Interval, 3> sub;

    TriTile() = default;
    /// Checks the area-one sub-tiles, disjointness and containment in freq.
    TriTile(const Interval& I, const Interval& w, const std::array<Interval, 3>& subs);
    Tile tile(int i) const { return Tile(time, sub[i]); }
    double area() const { return time.length * freq.length; }
    bool operator==(const TriTile& o) const;
};

bool operator<(const Interval& a, const Interval& b);
bool operator<(const TriTile& a, const TriTile& b);

struct Collection {
    std::vector<TriTile> tiles;
    double area_bound = 4.0;

    std::size_t size() const { return tiles.size(); }
    bool empty() const { return tiles.empty(); }
    /// Distinct {I_s}, sorted.
    std::vector<Interval> time_family() const;
    /// Distinct J = {w_s} u {w_si}, sorted.
    std::vector<Interval> freq_family() const;
    Collection subset(const std::vector<std::size_t>& idx) const;
};

struct GridOverlap {
    double overlap = 0.0;   // max pointwise count over scales
    int scale = 0;          // k of the witness (lengths in [2^{k-1}, 2^{k+1}])
    double witness = 0.0;   // point achieving the max
};

struct ValidationReport {
    bool pass = true;
    std::size_t tiles = 0;
    double overlap_bound = 4.0;
    GridOverlap time;
    GridOverlap freq;
    bool area_ok = true;
    bool disjoint_ok = true;
    bool time_grid_ok = true;
    bool freq_grid_ok = true;
    bool nesting_ok = true;
    bool distinct_ok = true;
    std::size_t nesting_failures = 0;
    std::size_t max_multiplicity = 1;
    std::vector<std::string> witnesses;
    double overlap_constant() const { return std::max(time.overlap, freq.overlap); }
};

ValidationReport collection_validate(const Collection& S, double overlap_bound = 4.0);

// text format
void write_collection(std::ostream& os, const Collection& S, const ValidationReport* report = nullptr);
Collection read_collection(std::istream& is);
void save_collection(const std::string& path, const Collection& S);
Collection load_collection(const std::string& path);

/// Packet profile given by its Fourier transform on [-1/2, 1/2].
struct WavePacketProfile {
    std::function<double(double)> hat;
    std::string name;

    /// hat = sqrt(2 g) with g the packet window: |hat|^2 translates by 1/2 sum to 2.
    static WavePacketProfile standard();
    /// Phi itself on the grid (the packet of the unit tile at the origin).
    SampledFunction sample(const Grid& g) const;
};

/// Packet transform on the bins inside w, continuous scaling
/// Phi_P^(xi) = |I|^{1/2} e^{-2 pi i c(I)(xi - c(w))} hat(|I|(xi - c(w))), normalized
/// so that (1/P) sum |values|^2 = 1.
struct PacketSpectrum {
    std::vector<std::size_t> slots;
    CVec values;
};

/// Throws ResolutionError unless 4h <= |I| <= P/2 and w lies inside the band.
PacketSpectrum packet_spectrum(const Tile& P, const WavePacketProfile& phi, const Grid& g);
SampledFunction wave_packet(const Tile& P, const WavePacketProfile& phi, const Grid& g);

/// F(xi_k) = h sum_j f_j e^{-2 pi i xi_k x_j} in slot order, and its inverse.
CVec continuous_ft(const SampledFunction& f);
SampledFunction from_continuous_ft(const Grid& g, const CVec& F);
/// <f, phi> = h sum f conj(phi) = (1/P) sum F conj(phi^)
cplx packet_coefficient(const CVec& F, const PacketSpectrum& p, double period);

/// Log-uniform |I| in [4h, P/2], w inside the band.
Tile random_admissible_tile(const Grid& g, Rng& rng);
/// Dyadic tri-tiles: |I_s| = 2^a in [min_len, max_len] on the dyadic grid of the
/// torus, w_s four aligned cells of width 1/|I_s| inside the band, three of them kept.
Collection random_collection(const Grid& g, std::size_t count, Rng& rng, double min_len, double max_len);

/// Coefficients shared by several tri-tiles: eps_s(u) = factor_s * eps[q] for u = us[q].
struct TermTable {
    std::vector<std::array<int, 3>> us;
    CVec eps;
};

struct TileTerm {
    std::uint32_t table = 0;
    cplx factor = 1.0;
};

/// T_S(f,g) = amplitude sum_s sum_u (1+|u|^2)^{-N} |I_s|^{-1/2} eps_s(u) <f,phi1> <g,phi2> phi3
/// with phi_i the packet on time c(I_s) + u_i |I_s|/|kappa_i|, length |I_s|/|kappa_i|,
/// frequency kappa_i c(w_si), width |kappa_i| |w_si|.
struct ModelSum {
    Collection collection;
    std::vector<TermTable> tables;
    std::vector<TileTerm> terms;   // one per tri-tile
    std::array<WavePacketProfile, 3> profiles{WavePacketProfile::standard(), WavePacketProfile::standard(),
                                               WavePacketProfile::standard()};
    std::array<double, 3> kappa{1.0, 1.0, 1.0};
    double damping = 8.0;   // N
    double amplitude = 1.0;

    /// Appends a tri-tile with a single u = 0 coefficient.
    void add(const TriTile& s, cplx eps);
    /// Appends a tri-tile with its own coefficient table.
    void add(const TriTile& s, TermTable table);
    cplx eps(std::size_t tile, std::size_t q) const;
    /// Scales every eps into the unit disc, moving the factor into amplitude.
    void normalize();
    double max_abs_eps() const;
};

Tile packet_tile(const ModelSum& M, std::size_t tile, int family, int u);

SampledFunction model_sum_eval(const ModelSum& M, const SampledFunction& f, const SampledFunction& g);
/// The same sum restricted to a subset of tri-tiles.
SampledFunction model_sum_eval(const ModelSum& M, const SampledFunction& f, const SampledFunction& g,
                               const std::vector<std::size_t>& subset);

struct DecompositionPiece {
    int kind = 0;   // 0: I_s inside 2I, 1: outside at scale l
    int k1 = 0, k2 = 0, l = 0;
    std::size_t tiles = 0;
    SampledFunction value;
};

struct ScalePartition {
    std::vector<std::size_t> inner;                             // I_s in 2I
    std::vector<std::pair<int, std::vector<std::size_t>>> outer; // (l, tiles), l <= 0
};

/// Throws PreconditionError for a tri-tile outside 2I with |I_s| >= 2|I|.
ScalePartition scale_partition(const ModelSum& M, const Interval& I);

struct Decomposition {
    Interval interval;
    int max_corona = 0;
    std::vector<DecompositionPiece> pieces;
    SampledFunction sum;   // re-summed pieces
};

/// Pieces T0[k1,k2] and T1[k1,k2,l] applied to (f 1_{C_k1(I)}, g 1_{C_k2(I)}).
Decomposition model_sum_decompose(const ModelSum& M, const Interval& I, const SampledFunction& f,
                                  const SampledFunction& g);

struct Tree {
    int j = 1;   // 1..3
    TriTile top;
    std::vector<std::size_t> members;
};

/// Throws InvariantViolation naming the first offending member.
void validate_tree(const Collection& Q, const Tree& T);
bool is_tree_member(const TriTile& top, int j, const TriTile& s);

struct PacketFamily {
    WavePacketProfile profile = WavePacketProfile::standard();
    double kappa = 1.0;
};

double size_tree(const Collection& Q, const Tree& T, const SampledFunction& f,
                 const PacketFamily& fam = {});

struct SizeStar {
    double value = 0.0;
    int tree_index = 0;                 // k of the maximizing tree
    std::optional<std::size_t> top;     // index in Q of its top
    std::size_t trees_examined = 0;
    bool exhaustive = true;
};

/// |<f, phi^k_{s_k}>|^2 for k = 0, 1, 2 and every tri-tile of Q.
std::array<RVec, 3> packet_energies(const Collection& Q, const SampledFunction& f, const PacketFamily& fam = {});

/// sup over k-trees (k != j) in Q of size_k, tops drawn from Q, maximal trees per top.
SizeStar size_star(const Collection& Q, const SampledFunction& f, int j, const PacketFamily& fam = {},
                   std::size_t max_tiles = 64);
/// Non-exhaustive variant over randomly chosen tops.
SizeStar size_star_sampled(const Collection& Q, const SampledFunction& f, int j, std::size_t tops, Rng& rng,
                           const PacketFamily& fam = {});

struct SizeBoundReport {
    double size_star = 0.0;
    double majorant = 0.0;   // sup_s (1/|I_s|) int (1 + d(x,I_s)/|I_s|)^{-N} |f|
    double ratio = 0.0;
    double N = 0.0;
    bool finite = true;
};
SizeBoundReport size_bound_check(const Collection& Q, const SampledFunction& f, int j, double N,
                                 const PacketFamily& fam = {});

/// sup_x sum_{k<=M} (1+|x|)^M |phi^(k)(x)|
double profile_seminorm(const SampledFunction& phi, int M);

/// <T_S(f1,f2), f3 1_I>
cplx trilinear_form(const ModelSum& M, const SampledFunction& f1, const SampledFunction& f2,
                    const SampledFunction& f3, const Interval& I);

struct PropositionReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::array<double, 3> sizes{};
    std::array<double, 3> norms{};
};
/// |sum_s |I_s|^{-1/2} prod <f_i, phi^i>| against prod size_i^*^{theta_i} |f_i|_2^{1-theta_i}.
PropositionReport tree_proposition_diagnostic(const Collection& Q, const SampledFunction& f1,
                                              const SampledFunction& f2, const SampledFunction& f3,
                                              const std::array<double, 3>& theta);

}  // namespace bilop
