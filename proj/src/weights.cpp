#include "bilop/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bilop {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void require_nonnegative(double v, double x, const std::string& name) {
    if (!(v >= 0.0))
        throw InvariantViolation("weight " + name + " is negative or NaN at x = " + fmt(x) + " (value " + fmt(v) + ")");
}

long to_steps(double v, double step, const char* what) {
    const double q = v / step;
    const long r = std::lround(q);
    if (std::abs(q - static_cast<double>(r)) > 1e-9)
        throw ParameterError(std::string("weight_class_check: ") + what + " must be a multiple of the step");
    return r;
}

}  // namespace

RVec Weight::sample(const Grid& g) const {
    RVec v(g.count);
    for (std::size_t j = 0; j < g.count; ++j) {
        v[j] = eval(g.x(j));
        require_nonnegative(v[j], g.x(j), name);
    }
    return v;
}

Weight constant_weight(double value, double theta, double l) {
    if (!(value >= 0.0)) throw ParameterError("constant_weight: value must be nonnegative");
    return {[value](double) { return value; }, theta, l, fmt(value)};
}

Weight power_weight(double alpha, double theta, double l) {
    return {[alpha](double x) { return std::pow(1.0 + std::abs(x), alpha); }, theta, l, "(1+|x|)^" + fmt(alpha)};
}

Weight exponential_weight(double rate, double theta, double l) {
    return {[rate](double x) { return std::exp(rate * std::abs(x)); }, theta, l, "e^{" + fmt(rate) + "|x|}"};
}

Weight make_weight(const WeightSpec& s) {
    if (!(s.theta >= 0.0)) throw ParameterError("weight: theta must be >= 0");
    if (!(s.l > 0.0)) throw ParameterError("weight: l must be > 0");
    if (s.kind == "const") return constant_weight(s.value, s.theta, s.l);
    if (s.kind == "poly") {
        if (s.sign != 1 && s.sign != -1) throw ParameterError("weight: sign must be +1 or -1");
        return power_weight(s.sign * s.alpha, s.theta, s.l);
    }
    if (s.kind == "exp") return exponential_weight(s.rate, s.theta, s.l);
    throw ParameterError("weight: unknown kind '" + s.kind + "' (const, poly, exp)");
}

WeightClassReport weight_class_check(const Weight& w, double theta, double l, double box, double step, int K,
                                     double ceiling) {
    if (!(theta >= 0.0) || !(l > 0.0) || !(step > 0.0) || K < 0)
        throw ParameterError("weight_class_check: need theta >= 0, l > 0, step > 0, K >= 0");
    if (box < std::ldexp(l, K)) throw ParameterError("weight_class_check: box must cover [-2^K l, 2^K l]");
    const long nl = to_steps(l, step, "l");
    const long nhalf = to_steps(0.5 * l, step, "l/2");
    const long nbox = to_steps(box, step, "box");
    const long reach = nhalf * ((1L << K) - 1);  // 2^K I sticks out by (2^K - 1) l / 2 on each side
    const long lo = -nbox - reach, hi = nbox + reach;
    RVec v(static_cast<std::size_t>(hi - lo + 1));
    for (long i = lo; i <= hi; ++i) {
        const double x = static_cast<double>(i) * step;
        v[static_cast<std::size_t>(i - lo)] = w(x);
        require_nonnegative(v[static_cast<std::size_t>(i - lo)], x, w.name);
    }
    auto at = [&](long i) { return v.begin() + (i - lo); };

    WeightClassReport r;
    r.box = box;
    r.step = step;
    r.K = K;
    r.ceiling = ceiling;
    r.per_k.assign(static_cast<std::size_t>(K) + 1, 0.0);
    for (long a = -nbox; a + nl <= nbox; ++a) {
        const double sup = *std::max_element(at(a), at(a + nl + 1));
        for (int k = 0; k <= K; ++k) {
            const long ext = nhalf * ((1L << k) - 1);
            const double inf = *std::min_element(at(a - ext), at(a + nl + ext + 1));
            double ratio = 0.0;
            if (sup > 0.0) ratio = inf > 0.0 ? sup / inf * std::pow(2.0, -k * theta)
                                             : std::numeric_limits<double>::infinity();
            auto& pk = r.per_k[static_cast<std::size_t>(k)];
            pk = std::max(pk, ratio);
            if (ratio > r.C) {
                r.C = ratio;
                r.witness = Interval(static_cast<double>(a) * step + 0.5 * l, l);
                r.witness_k = k;
            }
        }
    }
    const bool tail_ok = K == 0 || r.per_k[static_cast<std::size_t>(K)] <= r.per_k[static_cast<std::size_t>(K) - 1] * (1.0 + 1e-12);
    r.pass = std::isfinite(r.C) && r.C <= ceiling && tail_ok;
    return r;
}

std::vector<std::pair<double, double>> lattice_pairs(double box, double step) {
    if (!(step > 0.0) || !(box >= 0.0)) throw ParameterError("lattice_pairs: need box >= 0, step > 0");
    const long m = static_cast<long>(std::floor(box / step + 1e-9));
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>((2 * m + 1) * (2 * m + 1)));
    for (long i = -m; i <= m; ++i)
        for (long j = -m; j <= m; ++j) out.emplace_back(static_cast<double>(i) * step, static_cast<double>(j) * step);
    return out;
}

WeightEquivReport weight_equiv_check(const Weight& w, double theta, double l,
                                     const std::vector<std::pair<double, double>>& pairs, double ceiling) {
    if (!(theta >= 0.0) || !(l > 0.0)) throw ParameterError("weight_equiv_check: need theta >= 0, l > 0");
    WeightEquivReport r;
    r.ceiling = ceiling;
    r.pairs = pairs.size();
    double best = -1.0, dmax = 0.0;
    for (const auto& [x, y] : pairs) {
        const double wx = w(x), wy = w(y);
        require_nonnegative(wx, x, w.name);
        require_nonnegative(wy, y, w.name);
        const double d = std::abs(x - y) / l;
        dmax = std::max(dmax, d);
        double ratio;
        if (wy == 0.0) {
            ++r.zero_denominators;
            if (wx == 0.0) continue;
            ratio = std::numeric_limits<double>::infinity();
        } else {
            ratio = wx / (std::pow(1.0 + d, theta) * wy);
        }
        const auto b = static_cast<std::size_t>(std::floor(std::log2(1.0 + d)));
        if (r.per_band.size() <= b) r.per_band.resize(b + 1, 0.0);
        r.per_band[b] = std::max(r.per_band[b], ratio);
        if (ratio > best) {
            best = ratio;
            r.witness_x = x;
            r.witness_y = y;
        }
    }
    r.max_ratio = std::max(best, 0.0);
    // bands beyond half the sampled span only see pairs near the box edges
    const auto bt = static_cast<std::size_t>(std::floor(std::log2(1.0 + 0.5 * dmax)));
    const bool tail_ok = bt < 1 || bt >= r.per_band.size() || r.per_band[bt] <= r.per_band[bt - 1] * (1.0 + 1e-12);
    r.pass = std::isfinite(r.max_ratio) && r.max_ratio <= ceiling && tail_ok;
    return r;
}

double weighted_lp_norm(const SampledFunction& f, double p, const RVec& w, const Mask& region) {
    if (region.size() != f.size() || w.size() != f.size())
        throw ShapeError("weighted_lp_norm: weight or mask not aligned with grid");
    if (!(p > 0.0)) throw ParameterError("weighted_lp_norm: exponent must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j)
            if (region[j] && w[j] > 0.0) m = std::max(m, std::abs(f[j]));
        return m;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        if (region[j]) s += std::pow(std::abs(f[j]), p) * w[j];
    return std::pow(s * f.grid.spacing, 1.0 / p);
}

double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w, const Mask& region) {
    return weighted_lp_norm(f, p, w.sample(f.grid), region);
}

double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w) {
    return weighted_lp_norm(f, p, w, full_mask(f.grid));
}

RVec sobolev_multiplier(const Grid& g, double m) {
    RVec out(g.count);
    for (std::size_t j = 0; j < g.count; ++j) {
        const double xi = g.freq(j);
        out[j] = std::pow(1.0 + 4.0 * kPi * kPi * xi * xi, 0.5 * m);
    }
    return out;
}

SampledFunction sobolev_Jm(const SampledFunction& f, double m) {
    if (m == 0.0) return f;
    const RVec mult = sobolev_multiplier(f.grid, m);
    return fourier_multiplier(f, [&mult](double, std::size_t j) { return mult[j]; });
}

double sobolev_norm(const SampledFunction& f, double m, double p, const Weight& w) {
    return weighted_lp_norm(sobolev_Jm(f, m), p, w);
}

}  // namespace bilop
