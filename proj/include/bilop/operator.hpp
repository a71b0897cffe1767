#pragma once

#include "bilop/signal.hpp"
#include "bilop/symbol.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace bilop {

enum class EvalPath { Auto, Reference, Fast };

/// T(f,g)(x_j) = sum_{a,b} e^{i x_j (al_a + al_b)} sigma(x_j, al_a, al_b) F_a G_b with
/// F_a = (1/n) sum_m f_m e^{-i x_m al_a}, al_a = 2 pi k_a / P.
/// Reference is the O(n^3) double sum; Fast (x-independent symbols only)
/// folds anti-diagonals and uses one inverse FFT.
SampledFunction eval_direct(const Symbol& s, const SampledFunction& f, const SampledFunction& g,
                            EvalPath path = EvalPath::Auto);

/// Discrete kernel slice K(x; u, v) with u = x - y, v = x - z.
struct BilinearKernel {
    double x = 0.0;
    Grid u_axis;
    Grid v_axis;
    RVec abs_values;     // row-major u x v, |K|
    CVec values;
    double freq_half_width = 0.0;
    int freq_points = 0;
    std::string window;
    cplx at(std::size_t iu, std::size_t iv) const { return values[iu * v_axis.count + iv]; }
};

struct KernelBox {
    double freq_half_width = 16.0;  // angular
    int freq_points = 256;
    double rolloff = 0.25;          // fraction of the half width used by the taper
    double space_half_width = 16.0;
    int space_points = 129;
    double x = 0.0;
};

BilinearKernel kernel_from_symbol(const Symbol& s, const KernelBox& box);

struct DecayFit {
    double exponent = 0.0;   // M in (1 + |u| + |v|)^{-M}
    double residual = 0.0;   // rms of the log fit
    std::size_t points = 0;
};

/// Fit on shell maxima of |K| over r = |u| + |v| in [r_min, r_max].
DecayFit fit_kernel_decay(const BilinearKernel& K, double r_min, double r_max);
/// Fit of |K(t d1, t d2)| along the direction (d1, d2), t in [t_min, t_max].
DecayFit fit_kernel_decay_along(const BilinearKernel& K, double d1, double d2, double t_min, double t_max);

/// 8-point Gauss-Legendre panels on [eps, R]: geometric up to h, then of length at most h.
struct Quadrature {
    RVec nodes;
    RVec weights;
};
Quadrature truncation_quadrature(double eps, double R, double h);

/// Translate by t (f(x - t)) through the spectrum; band-limited interpolation.
SampledFunction shift(const SampledFunction& f, double t);

/// Truncated integral over eps <= |y| <= R of f(x - l1 y) g(x - l2 y) dy / y,
/// +y and -y nodes paired.
SampledFunction bht_truncated(const SampledFunction& f, const SampledFunction& g, const SingularLine& line,
                              double eps, double R);

struct TruncationLadder {
    RVec radii;
    TruncationLadder() = default;
    explicit TruncationLadder(RVec r);
    static TruncationLadder geometric(double r_min, double r_max, int count);
};

struct PairLadder {
    std::vector<std::pair<double, double>> pairs;  // (eps, r), eps < r
};

/// max_r |T_{sigma (1 - phi(r form))}(f,g)|
SampledFunction maximal_freq(const Symbol& s, const SingularLine& line, const std::function<double(double)>& phi,
                             const SampledFunction& f, const SampledFunction& g, const TruncationLadder& ladder);

/// max over the ladder of (1/r) int_{|t|<=r} |f(x-t) g(x+t)| dt, integral of
/// the piecewise-linear interpolant in t.
SampledFunction maximal_avg(const SampledFunction& f, const SampledFunction& g, double L,
                            const TruncationLadder& ladder);
/// int_{|t|<=r} |f(x-t) g(x+t)| dt at every grid point (same quadrature).
RVec symmetric_integral(const SampledFunction& f, const SampledFunction& g, double r);

using Kernel1D = std::function<double(double)>;

/// max over pairs of |int_{eps<=|y|<=r} f(x-y) g(x+y) K(y) dy|
SampledFunction maximal_kernel(const SampledFunction& f, const SampledFunction& g, const Kernel1D& K, double L,
                               const PairLadder& ladder);

/// Hormander-type bounds of K on [y_min, y_max]: sup |y K(y)| and sup y^2 |K'(y)|.
struct KernelBounds {
    double size = 0.0;
    double smoothness = 0.0;
};
KernelBounds kernel_bounds(const Kernel1D& K, double y_min, double y_max, int samples = 2001);

struct DerivationReport {
    int order = 0;
    SampledFunction lhs;
    SampledFunction rhs;
    double max_abs_discrepancy = 0.0;
    double lhs_scale = 0.0;  // max |lhs|
};

/// D^n T(f,g) against sum_{i+j+k=n} n!/(i! j! k!) T_{d_x^k sigma}(D^i f, D^j g).
DerivationReport derivation_identity_check(const Symbol& s, const SampledFunction& f, const SampledFunction& g,
                                           int order);

}  // namespace bilop
