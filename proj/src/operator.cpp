#include "bilop/operator.hpp"

#include "bilop/smooth.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bilop {

namespace {

// e^{i x_j al_a} with the phase reduced exactly: x_j al_a = 2 pi (x0 k / P + j k / n)
cplx grid_phase(const Grid& g, std::size_t j, long k, double sign) {
    const long n = static_cast<long>(g.count);
    long jk = (static_cast<long>(j) * k) % n;
    if (jk < 0) jk += n;
    const double ang = kTwoPi * (g.origin * static_cast<double>(k) / g.period() +
                                 static_cast<double>(jk) / static_cast<double>(n));
    return std::polar(1.0, sign * ang);
}

CVec naive_coefficients(const SampledFunction& f) {
    const std::size_t n = f.size();
    CVec F(n);
    for (std::size_t a = 0; a < n; ++a) {
        const long k = f.grid.bin(a);
        cplx s = 0.0;
        for (std::size_t m = 0; m < n; ++m) s += f[m] * grid_phase(f.grid, m, k, -1.0);
        F[a] = s / static_cast<double>(n);
    }
    return F;
}

CVec fft_coefficients(const SampledFunction& f) {
    const std::size_t n = f.size();
    CVec F = fft_raw(f.values, -1);
    for (std::size_t a = 0; a < n; ++a) {
        const double ang = -kTwoPi * f.grid.origin * static_cast<double>(f.grid.bin(a)) / f.grid.period();
        F[a] *= std::polar(1.0 / static_cast<double>(n), ang);
    }
    return F;
}

double angular(const Grid& g, std::size_t a) { return kTwoPi * g.freq(a); }

SampledFunction eval_reference(const Symbol& s, const SampledFunction& f, const SampledFunction& g) {
    const Grid& gr = f.grid;
    const std::size_t n = f.size();
    const CVec F = naive_coefficients(f);
    const CVec G = naive_coefficients(g);
    RVec al(n);
    for (std::size_t a = 0; a < n; ++a) al[a] = angular(gr, a);
    CVec table;
    if (!s.x_dependent) {
        table.resize(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) table[a * n + b] = s(0.0, al[a], al[b]);
    }
    SampledFunction out(gr);
    CVec E(n), EG(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = gr.x(j);
        for (std::size_t a = 0; a < n; ++a) {
            E[a] = grid_phase(gr, j, gr.bin(a), 1.0);
            EG[a] = E[a] * G[a];
        }
        cplx acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            cplx inner = 0.0;
            if (s.x_dependent) {
                for (std::size_t b = 0; b < n; ++b) inner += s(x, al[a], al[b]) * EG[b];
            } else {
                const cplx* row = &table[a * n];
                for (std::size_t b = 0; b < n; ++b) inner += row[b] * EG[b];
            }
            acc += E[a] * F[a] * inner;
        }
        out[j] = acc;
    }
    return out;
}

SampledFunction eval_fast(const Symbol& s, const SampledFunction& f, const SampledFunction& g) {
    const Grid& gr = f.grid;
    const std::size_t n = f.size();
    const CVec F = fft_coefficients(f);
    const CVec G = fft_coefficients(g);
    RVec al(n);
    CVec ph(n);
    for (std::size_t a = 0; a < n; ++a) {
        al[a] = angular(gr, a);
        ph[a] = std::polar(1.0, kTwoPi * gr.origin * static_cast<double>(gr.bin(a)) / gr.period());
    }
    CVec A(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        const cplx fa = F[a] * ph[a];
        const long ka = gr.bin(a);
        for (std::size_t b = 0; b < n; ++b) {
            const cplx v = s(0.0, al[a], al[b]);
            if (v == cplx(0.0, 0.0)) continue;
            A[gr.slot(ka + gr.bin(b))] += v * fa * G[b] * ph[b];
        }
    }
    return SampledFunction(gr, fft_raw(A, +1));
}

}  // namespace

SampledFunction eval_direct(const Symbol& s, const SampledFunction& f, const SampledFunction& g, EvalPath path) {
    require_same_grid(f, g, "eval_direct");
    if (!is_pow2(f.size())) throw SizeError("eval_direct: sample count must be a power of two");
    if (!s.fn) throw ParameterError("eval_direct: empty symbol");
    if (path == EvalPath::Fast && s.x_dependent)
        throw ParameterError("eval_direct: fast path needs an x-independent symbol");
    if (path == EvalPath::Reference || s.x_dependent) return eval_reference(s, f, g);
    return eval_fast(s, f, g);
}

BilinearKernel kernel_from_symbol(const Symbol& s, const KernelBox& box) {
    if (box.freq_points < 2 || box.space_points < 2) throw ParameterError("kernel_from_symbol: box too small");
    if (!(box.rolloff > 0.0 && box.rolloff <= 1.0)) throw ParameterError("kernel_from_symbol: rolloff in (0,1]");
    const int M = box.freq_points;
    const double B = box.freq_half_width;
    const double da = 2.0 * B / M;
    RVec al(M), w(M);
    for (int a = 0; a < M; ++a) {
        al[a] = -B + (a + 0.5) * da;
        w[a] = 1.0 - smooth_step((std::abs(al[a]) / B - (1.0 - box.rolloff)) / box.rolloff);
    }
    const int S = box.space_points;
    const double R = box.space_half_width;
    BilinearKernel K;
    K.x = box.x;
    K.u_axis = Grid(-R, 2.0 * R / (S - 1), static_cast<std::size_t>(S));
    K.v_axis = K.u_axis;
    K.freq_half_width = B;
    K.freq_points = M;
    K.window = "midpoint sum on [-B,B]^2, taper 1-S((|a|/B-(1-rho))/rho), rho=" + std::to_string(box.rolloff);
    // K = Eu * (sigma w w) * Ev^T
    CVec Msig(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) Msig[a * M + b] = s(box.x, al[a], al[b]) * w[a] * w[b] * da * da;
    CVec Ev(static_cast<std::size_t>(S) * M);
    for (int i = 0; i < S; ++i)
        for (int b = 0; b < M; ++b) Ev[i * M + b] = std::polar(1.0, al[b] * K.v_axis.x(i));
    CVec tmp(static_cast<std::size_t>(M) * S);  // (sigma w w) Ev^T : M x S
    for (int a = 0; a < M; ++a)
        for (int i = 0; i < S; ++i) {
            cplx acc = 0.0;
            for (int b = 0; b < M; ++b) acc += Msig[a * M + b] * Ev[i * M + b];
            tmp[a * S + i] = acc;
        }
    K.values.assign(static_cast<std::size_t>(S) * S, 0.0);
    for (int iu = 0; iu < S; ++iu) {
        const double u = K.u_axis.x(iu);
        for (int a = 0; a < M; ++a) {
            const cplx e = std::polar(1.0, al[a] * u);
            for (int iv = 0; iv < S; ++iv) K.values[iu * S + iv] += e * tmp[a * S + iv];
        }
    }
    K.abs_values.resize(K.values.size());
    for (std::size_t i = 0; i < K.values.size(); ++i) K.abs_values[i] = std::abs(K.values[i]);
    return K;
}

namespace {

DecayFit fit_shells(const std::vector<std::pair<double, double>>& pts, double r_min, double r_max) {
    constexpr int kShells = 12;
    RVec best(kShells, 0.0);
    const double lr0 = std::log(r_min), lr1 = std::log(r_max);
    for (const auto& [r, v] : pts) {
        if (r < r_min || r > r_max) continue;
        int k = static_cast<int>((std::log(r) - lr0) / (lr1 - lr0) * kShells);
        k = std::clamp(k, 0, kShells - 1);
        best[k] = std::max(best[k], v);
    }
    RVec X, Y;
    for (int k = 0; k < kShells; ++k) {
        if (!(best[k] > 0.0)) continue;
        const double rc = std::exp(lr0 + (k + 0.5) * (lr1 - lr0) / kShells);
        X.push_back(std::log(1.0 + rc));
        Y.push_back(std::log(best[k]));
    }
    DecayFit fit;
    fit.points = X.size();
    if (X.size() < 2) return fit;
    const double mx = std::accumulate(X.begin(), X.end(), 0.0) / X.size();
    const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / Y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxy += (X[i] - mx) * (Y[i] - my);
        sxx += (X[i] - mx) * (X[i] - mx);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double e = Y[i] - (my + slope * (X[i] - mx));
        ss += e * e;
    }
    fit.exponent = -slope;
    fit.residual = std::sqrt(ss / X.size());
    return fit;
}

}  // namespace

DecayFit fit_kernel_decay(const BilinearKernel& K, double r_min, double r_max) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t iu = 0; iu < K.u_axis.count; ++iu)
        for (std::size_t iv = 0; iv < K.v_axis.count; ++iv)
            pts.emplace_back(std::abs(K.u_axis.x(iu)) + std::abs(K.v_axis.x(iv)),
                             K.abs_values[iu * K.v_axis.count + iv]);
    return fit_shells(pts, r_min, r_max);
}

DecayFit fit_kernel_decay_along(const BilinearKernel& K, double d1, double d2, double t_min, double t_max) {
    const double nrm = std::hypot(d1, d2);
    d1 /= nrm;
    d2 /= nrm;
    std::vector<std::pair<double, double>> pts;
    const double hv = K.v_axis.spacing;
    for (std::size_t iu = 0; iu < K.u_axis.count; ++iu)
        for (std::size_t iv = 0; iv < K.v_axis.count; ++iv) {
            const double u = K.u_axis.x(iu), v = K.v_axis.x(iv);
            // grid points within half a cell of the ray
            if (std::abs(u * d2 - v * d1) > 0.5 * hv) continue;
            if (u * d1 + v * d2 <= 0.0) continue;
            pts.emplace_back(std::abs(u) + std::abs(v), K.abs_values[iu * K.v_axis.count + iv]);
        }
    return fit_shells(pts, t_min, t_max);
}

Quadrature truncation_quadrature(double eps, double R, double h) {
    if (!(eps > 0.0) || !(eps < R)) throw ParameterError("truncation: need 0 < eps < R");
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    Quadrature q;
    auto panel = [&](double a, double b) {
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (std::size_t i = 0; i < x.size(); ++i) {
            q.nodes.push_back(c - r * x[i]);
            q.weights.push_back(r * w[i]);
            q.nodes.push_back(c + r * x[i]);
            q.weights.push_back(r * w[i]);
        }
    };
    double a = eps;
    while (a < R && a < h) {
        const double b = std::min({2.0 * a, R, h});
        panel(a, b);
        a = b;
    }
    if (a < R) {
        const int m = static_cast<int>(std::ceil((R - a) / h - 1e-12));
        const double len = (R - a) / m;
        for (int i = 0; i < m; ++i) panel(a + i * len, i + 1 == m ? R : a + (i + 1) * len);
    }
    return q;
}

namespace {

SampledFunction shift_spectrum(const Grid& g, const CVec& F, double t) {
    const std::size_t n = g.count;
    CVec S(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double ang = -kTwoPi * g.freq(j) * t;
        if (n % 2 == 0 && j == n / 2)
            S[j] = F[j] * std::cos(ang);
        else
            S[j] = F[j] * std::polar(1.0, ang);
    }
    CVec v = fft_raw(S, +1);
    for (auto& z : v) z /= static_cast<double>(n);
    return SampledFunction(g, std::move(v));
}

}  // namespace

SampledFunction shift(const SampledFunction& f, double t) { return shift_spectrum(f.grid, fft_raw(f.values, -1), t); }

SampledFunction bht_truncated(const SampledFunction& f, const SampledFunction& g, const SingularLine& line,
                              double eps, double R) {
    require_same_grid(f, g, "bht_truncated");
    if (!(eps > 0.0) || eps >= R) throw ParameterError("bht_truncated: need 0 < eps < R");
    const Quadrature q = truncation_quadrature(eps, R, f.grid.spacing);
    const CVec F = fft_raw(f.values, -1), G = fft_raw(g.values, -1);
    const std::size_t n = f.size();
    CVec acc(n, 0.0);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double y = q.nodes[i];
        const SampledFunction fp = shift_spectrum(f.grid, F, line.l1 * y);
        const SampledFunction gp = shift_spectrum(f.grid, G, line.l2 * y);
        const SampledFunction fm = shift_spectrum(f.grid, F, -line.l1 * y);
        const SampledFunction gm = shift_spectrum(f.grid, G, -line.l2 * y);
        const double c = q.weights[i] / y;
        for (std::size_t j = 0; j < n; ++j) acc[j] += c * (fp[j] * gp[j] - fm[j] * gm[j]);
    }
    return SampledFunction(f.grid, std::move(acc));
}

TruncationLadder::TruncationLadder(RVec r) : radii(std::move(r)) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ParameterError("ladder radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw ParameterError("ladder radii must be strictly increasing");
    }
}

TruncationLadder TruncationLadder::geometric(double r_min, double r_max, int count) {
    if (count < 1 || !(r_min > 0.0) || !(r_max >= r_min)) throw ParameterError("bad geometric ladder");
    RVec r(count);
    for (int i = 0; i < count; ++i)
        r[i] = count == 1 ? r_min : r_min * std::pow(r_max / r_min, static_cast<double>(i) / (count - 1));
    return TruncationLadder(std::move(r));
}

SampledFunction maximal_freq(const Symbol& s, const SingularLine& line, const std::function<double(double)>& phi,
                             const SampledFunction& f, const SampledFunction& g, const TruncationLadder& ladder) {
    if (ladder.radii.empty()) throw ParameterError("maximal_freq: empty ladder");
    SampledFunction out(f.grid);
    for (double r : ladder.radii) {
        Symbol t = s;
        auto fn = s.fn;
        t.fn = [fn, phi, line, r](double x, double a, double b) {
            const double m = 1.0 - phi(r * line.form(a, b));
            return m == 0.0 ? cplx(0.0, 0.0) : m * fn(x, a, b);
        };
        const SampledFunction v = eval_direct(t, f, g);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j].real(), std::abs(v[j]));
    }
    return out;
}

RVec symmetric_integral(const SampledFunction& f, const SampledFunction& g, double r) {
    require_same_grid(f, g, "symmetric_integral");
    const long n = static_cast<long>(f.size());
    const double h = f.grid.spacing;
    const long K = static_cast<long>(std::floor(r / h));
    const double theta = r / h - static_cast<double>(K);
    auto wrap = [n](long i) { return static_cast<std::size_t>(((i % n) + n) % n); };
    RVec out(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
        auto u = [&](long m) { return std::abs(f[wrap(j - m)] * g[wrap(j + m)]); };
        double s = 0.0;
        // full cells [m h, (m+1) h] for m = -K..K-1
        for (long m = -K; m < K; ++m) s += 0.5 * h * (u(m) + u(m + 1));
        if (theta > 0.0) {
            const double rp = u(K) + theta * (u(K + 1) - u(K));
            const double rm = u(-K) + theta * (u(-K - 1) - u(-K));
            s += 0.5 * theta * h * (u(K) + rp) + 0.5 * theta * h * (u(-K) + rm);
        }
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

SampledFunction maximal_avg(const SampledFunction& f, const SampledFunction& g, double L,
                            const TruncationLadder& ladder) {
    if (ladder.radii.empty()) throw ParameterError("maximal_avg: empty ladder");
    if (ladder.radii.back() > L) throw ParameterError("maximal_avg: ladder exceeds L");
    SampledFunction out(f.grid);
    for (double r : ladder.radii) {
        const RVec s = symmetric_integral(f, g, r);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j].real(), s[j] / r);
    }
    return out;
}

SampledFunction maximal_kernel(const SampledFunction& f, const SampledFunction& g, const Kernel1D& K, double L,
                               const PairLadder& ladder) {
    require_same_grid(f, g, "maximal_kernel");
    if (ladder.pairs.empty()) throw ParameterError("maximal_kernel: empty ladder");
    for (const auto& [e, r] : ladder.pairs)
        if (!(e > 0.0) || !(e < r) || r > L) throw ParameterError("maximal_kernel: pairs need 0 < eps < r <= L");
    const CVec F = fft_raw(f.values, -1), G = fft_raw(g.values, -1);
    const std::size_t n = f.size();
    SampledFunction out(f.grid);
    for (const auto& [e, r] : ladder.pairs) {
        const Quadrature q = truncation_quadrature(e, r, f.grid.spacing);
        CVec acc(n, 0.0);
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double y = q.nodes[i];
            const SampledFunction fp = shift_spectrum(f.grid, F, y), gm = shift_spectrum(f.grid, G, -y);
            const SampledFunction fm = shift_spectrum(f.grid, F, -y), gp = shift_spectrum(f.grid, G, y);
            const double kp = K(y) * q.weights[i], km = K(-y) * q.weights[i];
            for (std::size_t j = 0; j < n; ++j) acc[j] += kp * fp[j] * gm[j] + km * fm[j] * gp[j];
        }
        for (std::size_t j = 0; j < n; ++j) out[j] = std::max(out[j].real(), std::abs(acc[j]));
    }
    return out;
}

KernelBounds kernel_bounds(const Kernel1D& K, double y_min, double y_max, int samples) {
    if (!(y_min > 0.0) || !(y_max > y_min) || samples < 2) throw ParameterError("kernel_bounds: bad range");
    KernelBounds b;
    for (int i = 0; i < samples; ++i) {
        const double y = y_min * std::pow(y_max / y_min, static_cast<double>(i) / (samples - 1));
        for (double s : {y, -y}) {
            const double dy = 1e-6 * y;
            const double d = (K(s + dy) - K(s - dy)) / (2.0 * dy);
            b.size = std::max(b.size, std::abs(s * K(s)));
            b.smoothness = std::max(b.smoothness, s * s * std::abs(d));
        }
    }
    return b;
}

DerivationReport derivation_identity_check(const Symbol& s, const SampledFunction& f, const SampledFunction& g,
                                           int order) {
    require_same_grid(f, g, "derivation_identity_check");
    if (order < 0) throw ParameterError("derivation_identity_check: order must be nonnegative");
    DerivationReport rep;
    rep.order = order;
    rep.lhs = spectral_derivative(eval_direct(s, f, g), order);
    rep.rhs = SampledFunction(f.grid);
    auto fact = [](int m) {
        double r = 1.0;
        for (int i = 2; i <= m; ++i) r *= i;
        return r;
    };
    for (int k = 0; k <= order; ++k) {
        if (k > 0 && !s.x_dependent) continue;
        const Symbol dk = x_derivative(s, k);
        for (int i = 0; i + k <= order; ++i) {
            const int j = order - i - k;
            const double c = fact(order) / (fact(i) * fact(j) * fact(k));
            const SampledFunction t = eval_direct(dk, spectral_derivative(f, i), spectral_derivative(g, j));
            rep.rhs = rep.rhs + cplx(c, 0.0) * t;
        }
    }
    rep.max_abs_discrepancy = max_abs_diff(rep.lhs, rep.rhs);
    rep.lhs_scale = lp_norm(rep.lhs, INFINITY);
    return rep;
}

}  // namespace bilop
