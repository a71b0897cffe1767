#pragma once

#include "bilop/common.hpp"

#include <iosfwd>
#include <string>

namespace bilop {

/// Interval given by center and length (spatial or frequency units).
struct Interval {
    double center = 0.0;
    double length = 1.0;

    Interval() = default;
    Interval(double c, double len);
    static Interval from_endpoints(double a, double b);

    double left() const { return center - 0.5 * length; }
    double right() const { return center + 0.5 * length; }
    Interval dilate(double lambda) const { return {center, lambda * length}; }

    // half-open [left, right)
    bool contains_point(double x) const { return x >= left() && x < right(); }
    bool contains(const Interval& o) const { return o.left() >= left() && o.right() <= right(); }
    bool disjoint(const Interval& o) const { return o.right() <= left() || right() <= o.left(); }
    bool operator==(const Interval& o) const { return center == o.center && length == o.length; }
};

/// Uniform periodic grid x_j = origin + j*spacing, j < count.
struct Grid {
    double origin = 0.0;
    double spacing = 1.0;
    std::size_t count = 0;

    Grid() = default;
    Grid(double origin, double spacing, std::size_t count);
    static Grid centered(double period, std::size_t count);  // origin = -period/2

    double x(std::size_t j) const { return origin + spacing * static_cast<double>(j); }
    double period() const { return spacing * static_cast<double>(count); }
    /// Signed FFT bin index of slot j: j for j < n/2, j-n otherwise.
    long bin(std::size_t j) const;
    /// Frequency of slot j in cycles per unit length.
    double freq(std::size_t j) const { return static_cast<double>(bin(j)) / period(); }
    double nyquist() const { return 0.5 / spacing; }
    /// Slot holding signed bin k (k taken modulo n).
    std::size_t slot(long k) const;
    bool operator==(const Grid& o) const;
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct SampledFunction {
    Grid grid;
    CVec values;

    SampledFunction() = default;
    explicit SampledFunction(const Grid& g);
    SampledFunction(const Grid& g, CVec v);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t j) { return values[j]; }
    const cplx& operator[](std::size_t j) const { return values[j]; }
};

/// Unitary DFT coefficients in FFT slot order; spectrum.grid is the
/// spatial grid of the transformed function.
struct Spectrum {
    Grid grid;
    CVec values;
};

struct CoronaMask {
    Interval interval;
    int k = 0;
    Mask mask;
};

// transforms
Spectrum dft_forward(const SampledFunction& f);
SampledFunction dft_inverse(const Spectrum& s);
/// Raw unnormalized FFT helpers (sign -1 forward, +1 backward).
CVec fft_raw(const CVec& in, int sign);

// pointwise helpers
SampledFunction operator+(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator-(const SampledFunction& a, const SampledFunction& b);
SampledFunction operator*(cplx c, const SampledFunction& a);
SampledFunction pointwise_product(const SampledFunction& a, const SampledFunction& b);
SampledFunction masked(const SampledFunction& f, const Mask& m);
SampledFunction abs_values(const SampledFunction& f);
SampledFunction conj(const SampledFunction& f);
double max_abs_diff(const SampledFunction& a, const SampledFunction& b);
void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* what);

/// Full mask, or the mask of points with |x - c(I)| < |I|/2.
Mask full_mask(const Grid& g);
Mask interval_mask(const Interval& I, const Grid& g);

/// Riemann-sum (sum |f|^p h)^{1/p} over the region; p = inf gives the max.
/// An empty region yields 0 and sets *empty.
double lp_norm(const SampledFunction& f, double p, const Mask& region, bool* empty = nullptr);
double lp_norm(const SampledFunction& f, double p);
double lp_norm(const Spectrum& s, double p);
/// h * sum a conj(b)
cplx inner(const SampledFunction& a, const SampledFunction& b);

/// C_k(I): points with 2^k <= 1 + |x - c(I)|/|I| < 2^{k+1}.
CoronaMask corona(const Interval& I, int k, const Grid& g);
/// Corona index of the point x (the unique k with x in C_k(I)).
int corona_index(const Interval& I, double x);
/// Largest corona index met on the grid.
int max_corona_index(const Interval& I, const Grid& g);

SampledFunction hardy_littlewood_max(const SampledFunction& f);

/// Multiply by (2 pi i xi)^order; the Nyquist slot is zeroed for odd orders.
SampledFunction spectral_derivative(const SampledFunction& f, int order);
/// Multiply the spectrum by m(xi) (xi in cycles).
template <class F>
SampledFunction fourier_multiplier(const SampledFunction& f, F&& m) {
    Spectrum s = dft_forward(f);
    for (std::size_t j = 0; j < s.values.size(); ++j) s.values[j] *= m(f.grid.freq(j), j);
    return dft_inverse(s);
}

/// exp(-a/(1-u^2)) bump of the given full width (a = sharpness), wrapped on
/// the torus, unit L2 norm.
SampledFunction make_bump(double center, double width, const Grid& g, double sharpness = 1.0);
/// Frequency (cycles) beyond which the spectrum of the sharpness-1 bump stays
/// below 1e-8 of its peak.
double bump_bandwidth(double width);

// IO
/// Little-endian float64 record helpers.
void write_f64_le(std::ostream& os, double v);
double read_f64_le(std::istream& is);
void write_csv(std::ostream& os, const SampledFunction& f);
SampledFunction read_csv(std::istream& is);
void write_binary(std::ostream& os, const SampledFunction& f);
SampledFunction read_binary(std::istream& is);
void save_csv(const std::string& path, const SampledFunction& f);
SampledFunction load_csv(const std::string& path);
void save_binary(const std::string& path, const SampledFunction& f);
SampledFunction load_binary(const std::string& path);

}  // namespace bilop
