#include "bilop/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

namespace bilop {

Interval::Interval(double c, double len) : center(c), length(len) {
    if (!(len > 0.0)) throw InvariantViolation("interval length must be positive");
}

Interval Interval::from_endpoints(double a, double b) { return {0.5 * (a + b), b - a}; }

Grid::Grid(double o, double h, std::size_t n) : origin(o), spacing(h), count(n) {
    if (!(h > 0.0)) throw ParameterError("grid spacing must be positive");
}

Grid Grid::centered(double period, std::size_t n) {
    return Grid(-0.5 * period, period / static_cast<double>(n), n);
}

long Grid::bin(std::size_t j) const {
    const long n = static_cast<long>(count);
    const long jj = static_cast<long>(j);
    return jj < n / 2 ? jj : jj - n;
}

std::size_t Grid::slot(long k) const {
    const long n = static_cast<long>(count);
    long r = k % n;
    if (r < 0) r += n;
    return static_cast<std::size_t>(r);
}

bool Grid::operator==(const Grid& o) const {
    return origin == o.origin && spacing == o.spacing && count == o.count;
}

SampledFunction::SampledFunction(const Grid& g) : grid(g), values(g.count, cplx(0.0, 0.0)) {}

SampledFunction::SampledFunction(const Grid& g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != g.count) throw ShapeError("value count does not match grid");
}

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

CVec fft_raw(const CVec& in, int sign) {
    const std::size_t n = in.size();
    CVec out(n);
    if (n == 0) return out;
    CVec buf(in);
    fftw_plan p;
    {
        // planner is not thread safe
        std::lock_guard<std::mutex> lock(plan_mutex());
        p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                             reinterpret_cast<fftw_complex*>(out.data()),
                             sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(p);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(p);
    }
    return out;
}

Spectrum dft_forward(const SampledFunction& f) {
    if (!is_pow2(f.size())) throw SizeError("dft_forward: sample count must be a power of two");
    Spectrum s{f.grid, fft_raw(f.values, -1)};
    const double sc = 1.0 / std::sqrt(static_cast<double>(f.size()));
    for (auto& v : s.values) v *= sc;
    return s;
}

SampledFunction dft_inverse(const Spectrum& s) {
    if (!is_pow2(s.values.size())) throw SizeError("dft_inverse: sample count must be a power of two");
    SampledFunction f(s.grid, fft_raw(s.values, +1));
    const double sc = 1.0 / std::sqrt(static_cast<double>(f.size()));
    for (auto& v : f.values) v *= sc;
    return f;
}

void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* what) {
    if (a.grid != b.grid || a.size() != b.size())
        throw ShapeError(std::string(what) + ": grid mismatch");
}

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b, "operator+");
    SampledFunction r(a);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
    return r;
}

SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b, "operator-");
    SampledFunction r(a);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= b[j];
    return r;
}

SampledFunction operator*(cplx c, const SampledFunction& a) {
    SampledFunction r(a);
    for (auto& v : r.values) v *= c;
    return r;
}

SampledFunction pointwise_product(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b, "pointwise_product");
    SampledFunction r(a);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= b[j];
    return r;
}

SampledFunction masked(const SampledFunction& f, const Mask& m) {
    if (m.size() != f.size()) throw ShapeError("masked: mask not aligned with grid");
    SampledFunction r(f);
    for (std::size_t j = 0; j < r.size(); ++j)
        if (!m[j]) r[j] = 0.0;
    return r;
}

SampledFunction abs_values(const SampledFunction& f) {
    SampledFunction r(f);
    for (auto& v : r.values) v = std::abs(v);
    return r;
}

SampledFunction conj(const SampledFunction& f) {
    SampledFunction r(f);
    for (auto& v : r.values) v = std::conj(v);
    return r;
}

double max_abs_diff(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

Mask full_mask(const Grid& g) { return Mask(g.count, 1); }

Mask interval_mask(const Interval& I, const Grid& g) {
    Mask m(g.count, 0);
    const double half = 0.5 * I.length;
    for (std::size_t j = 0; j < g.count; ++j) m[j] = std::abs(g.x(j) - I.center) < half ? 1 : 0;
    return m;
}

double lp_norm(const SampledFunction& f, double p, const Mask& region, bool* empty) {
    if (region.size() != f.size()) throw ShapeError("lp_norm: mask not aligned with grid");
    if (!(p > 0.0)) throw ParameterError("lp_norm: exponent must be positive");
    bool any = false;
    for (auto b : region) any = any || b;
    if (empty) *empty = !any;
    if (!any) return 0.0;
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j)
            if (region[j]) m = std::max(m, std::abs(f[j]));
        return m;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        if (region[j]) s += std::pow(std::abs(f[j]), p);
    return std::pow(s * f.grid.spacing, 1.0 / p);
}

double lp_norm(const SampledFunction& f, double p) { return lp_norm(f, p, full_mask(f.grid)); }

double lp_norm(const Spectrum& s, double p) {
    return lp_norm(SampledFunction(s.grid, s.values), p);
}

cplx inner(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b, "inner");
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::conj(b[j]);
    return s * a.grid.spacing;
}

namespace {
// thresholds (2^k - 1)|I| are shared by consecutive coronas, so the
// partition is exact in floating point
double corona_threshold(const Interval& I, int k) {
    return (std::ldexp(1.0, k) - 1.0) * I.length;
}
}  // namespace

int corona_index(const Interval& I, double x) {
    const double d = std::abs(x - I.center);
    int k = 0;
    while (!(d < corona_threshold(I, k + 1))) ++k;
    return k;
}

CoronaMask corona(const Interval& I, int k, const Grid& g) {
    if (k < 0) throw ParameterError("corona: index must be nonnegative");
    CoronaMask c{I, k, Mask(g.count, 0)};
    const double lo = corona_threshold(I, k);
    const double hi = corona_threshold(I, k + 1);
    for (std::size_t j = 0; j < g.count; ++j) {
        const double d = std::abs(g.x(j) - I.center);
        c.mask[j] = (d >= lo && d < hi) ? 1 : 0;
    }
    return c;
}

int max_corona_index(const Interval& I, const Grid& g) {
    int k = 0;
    for (std::size_t j = 0; j < g.count; ++j) k = std::max(k, corona_index(I, g.x(j)));
    return k;
}

SampledFunction hardy_littlewood_max(const SampledFunction& f) {
    const std::size_t n = f.size();
    RVec a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = std::abs(f[j]);
    RVec best(n, 0.0);
    RVec suffix(n);
    for (std::size_t lo = 0; lo < n; ++lo) {
        // averages over [lo, hi] by running sums
        double s = 0.0;
        for (std::size_t hi = lo; hi < n; ++hi) {
            s += a[hi];
            suffix[hi] = s / static_cast<double>(hi - lo + 1);
        }
        for (std::size_t hi = n - 1; hi > lo; --hi) suffix[hi - 1] = std::max(suffix[hi - 1], suffix[hi]);
        for (std::size_t x = lo; x < n; ++x) best[x] = std::max(best[x], suffix[x]);
    }
    SampledFunction r(f.grid);
    for (std::size_t j = 0; j < n; ++j) r[j] = best[j];
    return r;
}

SampledFunction spectral_derivative(const SampledFunction& f, int order) {
    if (order < 0) throw ParameterError("spectral_derivative: order must be nonnegative");
    if (order == 0) return f;
    const std::size_t n = f.size();
    return fourier_multiplier(f, [&](double xi, std::size_t j) -> cplx {
        if ((order % 2) && n % 2 == 0 && j == n / 2) return 0.0;
        return std::pow(cplx(0.0, kTwoPi * xi), order);
    });
}

SampledFunction make_bump(double center, double width, const Grid& g, double sharpness) {
    if (!(sharpness > 0.0)) throw ParameterError("make_bump: sharpness must be positive");
    if (!(width >= 4.0 * g.spacing))
        throw ResolutionError("make_bump: width must be at least four grid spacings");
    if (width >= g.period()) throw ResolutionError("make_bump: width exceeds the period");
    SampledFunction b(g);
    const double P = g.period();
    double ss = 0.0;
    for (std::size_t j = 0; j < g.count; ++j) {
        double d = std::remainder(g.x(j) - center, P);
        const double u = 2.0 * d / width;
        const double v = std::abs(u) < 1.0 ? std::exp(-sharpness / (1.0 - u * u)) : 0.0;
        b[j] = v;
        ss += v * v;
    }
    const double nrm = std::sqrt(ss * g.spacing);
    for (auto& v : b.values) v /= nrm;
    return b;
}

double bump_bandwidth(double width) {
    // last crossing of 1e-8 by the normalized transform of exp(-1/(1-u^2)),
    // u in [-1,1], measured in cycles per unit u
    constexpr double kCross = 42.0;
    return 2.0 * kCross / width;
}

void write_csv(std::ostream& os, const SampledFunction& f) {
    os << "x,re,im\n";
    os << std::setprecision(17);
    for (std::size_t j = 0; j < f.size(); ++j)
        os << f.grid.x(j) << ',' << f[j].real() << ',' << f[j].imag() << '\n';
}

SampledFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw EvaluationError("read_csv: empty input");
    if (line.rfind("x,re,im", 0) != 0) throw EvaluationError("read_csv: expected header x,re,im");
    RVec xs;
    CVec vs;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        double x, re, im;
        char c1, c2;
        if (!(ls >> x >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',')
            throw EvaluationError("read_csv: malformed line " + std::to_string(lineno));
        xs.push_back(x);
        vs.emplace_back(re, im);
    }
    if (xs.size() < 2) throw EvaluationError("read_csv: need at least two samples");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    return SampledFunction(Grid(xs.front(), h, xs.size()), std::move(vs));
}

void write_f64_le(std::ostream& os, double v) {
    unsigned char b[8];
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw EvaluationError("read_binary: truncated record");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void write_binary(std::ostream& os, const SampledFunction& f) {
    write_f64_le(os, f.grid.origin);
    write_f64_le(os, f.grid.spacing);
    write_f64_le(os, static_cast<double>(f.size()));
    for (const auto& v : f.values) {
        write_f64_le(os, v.real());
        write_f64_le(os, v.imag());
    }
}

SampledFunction read_binary(std::istream& is) {
    const double o = read_f64_le(is);
    const double h = read_f64_le(is);
    const double c = read_f64_le(is);
    if (!(c >= 1.0) || c != std::floor(c)) throw EvaluationError("read_binary: bad count");
    const auto n = static_cast<std::size_t>(c);
    CVec v(n);
    for (auto& z : v) {
        const double re = read_f64_le(is);
        const double im = read_f64_le(is);
        z = {re, im};
    }
    return SampledFunction(Grid(o, h, n), std::move(v));
}

void save_csv(const std::string& path, const SampledFunction& f) {
    std::ofstream os(path);
    if (!os) throw EvaluationError("cannot open " + path);
    write_csv(os, f);
}

SampledFunction load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw EvaluationError("cannot open " + path);
    return read_csv(is);
}

void save_binary(const std::string& path, const SampledFunction& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EvaluationError("cannot open " + path);
    write_binary(os, f);
}

SampledFunction load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw EvaluationError("cannot open " + path);
    return read_binary(is);
}

}  // namespace bilop
