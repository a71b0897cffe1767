#include "bilop/symbol.hpp"

#include "bilop/smooth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace bilop {

SingularLine::SingularLine(double a, double b) : l1(a), l2(b) {
    if (a == 0.0 || b == 0.0 || a == b)
        throw InvariantViolation("singular line needs l1, l2 nonzero and l1 != l2");
}

double SingularLine::norm() const { return std::hypot(l1, l2); }

double dist_to_line(double alpha, double beta, const SingularLine& line) {
    return std::abs(line.form(alpha, beta)) / line.norm();
}

const char* to_string(SymbolClass c) {
    switch (c) {
        case SymbolClass::Hormander: return "HORMANDER";
        case SymbolClass::Line: return "LINE";
        case SymbolClass::LineScaled: return "LINE_SCALED";
    }
    return "?";
}

Symbol product_symbol() {
    Symbol s;
    s.fn = [](double, double, double) { return cplx(1.0, 0.0); };
    s.name = "product";
    return s;
}

Symbol bht_sign_symbol(const SingularLine& line) {
    Symbol s;
    s.fn = [line](double, double a, double b) {
        const double v = line.form(a, b);
        const double sg = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        return cplx(0.0, kPi * sg);
    };
    s.line = line;
    s.declared_class = SymbolClass::Line;
    s.name = "bht_sign";
    return s;
}

Symbol scaled_symbol(const Symbol& s, cplx c) {
    Symbol r = s;
    auto fn = s.fn;
    r.fn = [fn, c](double x, double a, double b) { return c * fn(x, a, b); };
    return r;
}

Symbol tabulated_symbol(const Grid& grid, CVec table) {
    const std::size_t n = grid.count;
    if (table.size() != n * n) throw ShapeError("tabulated_symbol: table must be n x n");
    auto tab = std::make_shared<const CVec>(std::move(table));
    const double P = grid.period();
    Symbol s;
    s.fn = [tab, grid, n, P](double, double a, double b) {
        const auto ka = static_cast<long>(std::lround(a * P / kTwoPi));
        const auto kb = static_cast<long>(std::lround(b * P / kTwoPi));
        return (*tab)[grid.slot(ka) * n + grid.slot(kb)];
    };
    s.name = "table";
    return s;
}

namespace {
void write_axis(std::ostream& os, const Grid& g) {
    write_f64_le(os, g.origin);
    write_f64_le(os, g.spacing);
    write_f64_le(os, static_cast<double>(g.count));
}

Grid read_axis(std::istream& is) {
    const double o = read_f64_le(is);
    const double h = read_f64_le(is);
    const double c = read_f64_le(is);
    if (!(c >= 1.0) || c != std::floor(c)) throw EvaluationError("symbol table: bad axis count");
    return Grid(o, h, static_cast<std::size_t>(c));
}

std::size_t nearest(const Grid& g, double v) {
    const double t = std::round((v - g.origin) / g.spacing);
    if (t <= 0.0) return 0;
    const auto i = static_cast<std::size_t>(t);
    return std::min(i, g.count - 1);
}
}  // namespace

void save_symbol_table(const std::string& path, const Grid& xg, const Grid& ag, const Grid& bg,
                       const CVec& values) {
    if (values.size() != xg.count * ag.count * bg.count)
        throw ShapeError("save_symbol_table: value count does not match axes");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw EvaluationError("cannot open " + path);
    write_axis(os, xg);
    write_axis(os, ag);
    write_axis(os, bg);
    for (const auto& v : values) {
        write_f64_le(os, v.real());
        write_f64_le(os, v.imag());
    }
}

Symbol load_symbol_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw EvaluationError("cannot open " + path);
    const Grid xg = read_axis(is), ag = read_axis(is), bg = read_axis(is);
    auto vals = std::make_shared<CVec>(xg.count * ag.count * bg.count);
    for (auto& v : *vals) {
        const double re = read_f64_le(is);
        const double im = read_f64_le(is);
        v = {re, im};
    }
    Symbol s;
    s.fn = [vals, xg, ag, bg](double x, double a, double b) {
        return (*vals)[(nearest(xg, x) * ag.count + nearest(ag, a)) * bg.count + nearest(bg, b)];
    };
    s.x_dependent = xg.count > 1;
    s.name = "table:" + path;
    return s;
}

Symbol truncate_near_line(const Symbol& s, const SingularLine& line, double L) {
    if (!(L > 0.0)) throw ParameterError("truncate_near_line: L must be positive");
    Symbol r = s;
    auto fn = s.fn;
    const double half = 0.5 / L;
    r.fn = [fn, line, half](double x, double a, double b) {
        const double d = dist_to_line(a, b, line);
        const double m = smooth_step((d - half) / half);
        if (m == 0.0) return cplx(0.0, 0.0);
        return m * fn(x, a, b);
    };
    r.line = line;
    r.scale = 1.0 / L;
    r.truncation = L;
    r.declared_class = SymbolClass::LineScaled;
    r.name = s.name + "|trunc";
    return r;
}

std::pair<Symbol, Symbol> split_low_high(const Symbol& s, const SingularLine& line,
                                         std::function<double(double)> profile) {
    if (!profile) profile = cutoff_profile;
    Symbol lo = s, hi = s;
    auto fn = s.fn;
    lo.fn = [fn, line, profile](double x, double a, double b) {
        return profile(line.form(a, b)) * fn(x, a, b);
    };
    hi.fn = [fn, line, profile](double x, double a, double b) {
        return (1.0 - profile(line.form(a, b))) * fn(x, a, b);
    };
    lo.name = s.name + "|low";
    hi.name = s.name + "|high";
    return {lo, hi};
}

Symbol modulate_symbol(const Symbol& s, double shift) {
    Symbol r = s;
    auto fn = s.fn;
    r.fn = [fn, shift](double x, double a, double b) { return fn(x, a + shift, b - shift); };
    r.name = s.name + "|mod";
    return r;
}

namespace {

double binom(int m, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
    return r;
}

// offsets (k - m/2) with weights (-1)^{m-k} C(m,k)
std::vector<std::pair<double, double>> central_stencil(int m) {
    std::vector<std::pair<double, double>> st;
    for (int k = 0; k <= m; ++k)
        st.emplace_back(k - 0.5 * m, ((m - k) % 2 ? -1.0 : 1.0) * binom(m, k));
    return st;
}

}  // namespace

const ClassEntry& ClassReport::at(int a, int b, int c) const {
    for (const auto& e : entries)
        if (e.a == a && e.b == b && e.c == c) return e;
    throw ParameterError("class report has no entry for the requested order");
}

ClassReport class_verify(const Symbol& s, int max_order, const ClassBox& box, double step,
                         double ceiling) {
    if (max_order < 0) throw ParameterError("class_verify: max_order must be nonnegative");
    if (!(step > 0.0)) throw ParameterError("class_verify: step must be positive");
    ClassReport rep;
    rep.ceiling = ceiling;
    std::vector<std::array<int, 3>> orders;
    for (int a = 0; a <= max_order; ++a)
        for (int b = 0; a + b <= max_order; ++b)
            for (int c = 0; a + b + c <= max_order; ++c) {
                if (a > 0 && !s.x_dependent) continue;
                orders.push_back({a, b, c});
                rep.entries.push_back({a, b, c, 0.0, 0.0, 0.0});
            }
    std::vector<std::vector<std::pair<double, double>>> st(max_order + 1);
    for (int m = 0; m <= max_order; ++m) st[m] = central_stencil(m);

    auto axis = [](double lo, double hi, int n, int j) {
        return n <= 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (n - 1);
    };
    const double guard = (max_order + 2) * step;
    const int nx = s.x_dependent ? std::max(box.x_points, 1) : 1;
    for (int ix = 0; ix < nx; ++ix) {
        const double x = s.x_dependent ? axis(box.x_lo, box.x_hi, nx, ix) : 0.0;
        for (int ia = 0; ia < box.alpha_points; ++ia) {
            const double al = axis(box.alpha_lo, box.alpha_hi, box.alpha_points, ia);
            for (int ib = 0; ib < box.beta_points; ++ib) {
                const double be = axis(box.beta_lo, box.beta_hi, box.beta_points, ib);
                double d = 0.0;
                if (s.line) {
                    d = dist_to_line(al, be, *s.line);
                    if (d < guard) {
                        ++rep.skipped;
                        continue;
                    }
                }
                ++rep.samples;
                for (std::size_t o = 0; o < orders.size(); ++o) {
                    const auto [a, b, c] = orders[o];
                    cplx acc = 0.0;
                    for (const auto& [ox, wx] : st[a])
                        for (const auto& [oa, wa] : st[b])
                            for (const auto& [ob, wb] : st[c]) {
                                const double px = x + ox * step, pa = al + oa * step, pb = be + ob * step;
                                const cplx v = s(px, pa, pb);
                                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                                    std::ostringstream m;
                                    m << "class_verify: non-finite symbol value at (x, alpha, beta) = (" << px
                                      << ", " << pa << ", " << pb << ")";
                                    throw EvaluationError(m.str());
                                }
                                acc += wx * wa * wb * v;
                            }
                    const double mag = std::abs(acc) / std::pow(step, a + b + c);
                    const int bc = b + c;
                    auto& e = rep.entries[o];
                    const double hw = 1.0 + std::abs(al) + std::abs(be);
                    e.hormander = std::max(e.hormander, mag * std::pow(hw, bc));
                    if (s.line) {
                        e.line_weighted = std::max(e.line_weighted, mag * std::pow(s.scale + d, bc));
                        e.homogeneous = std::max(e.homogeneous, mag * std::pow(d, bc));
                    } else {
                        e.line_weighted = e.hormander;
                        e.homogeneous = e.hormander;
                    }
                }
            }
        }
    }
    for (const auto& e : rep.entries) {
        const double v = s.declared_class == SymbolClass::Hormander || !s.line ? e.hormander : e.line_weighted;
        rep.declared_constant = std::max(rep.declared_constant, v);
        rep.homogeneous_constant = std::max(rep.homogeneous_constant, e.homogeneous);
    }
    auto ok = [&](double v) { return std::isfinite(v) && v <= ceiling; };
    rep.pass = rep.samples > 0 && ok(rep.declared_constant);
    rep.pass_homogeneous = rep.samples > 0 && ok(rep.homogeneous_constant);
    return rep;
}

Symbol x_derivative(const Symbol& s, int k, double step) {
    if (k < 0) throw ParameterError("x_derivative: order must be nonnegative");
    if (k == 0) return s;
    if (!s.x_dependent) {
        Symbol z = s;
        z.fn = [](double, double, double) { return cplx(0.0, 0.0); };
        z.name = s.name + "|dx";
        return z;
    }
    static constexpr std::array<double, 4> w = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const Symbol inner = x_derivative(s, k - 1, step);
    auto fn = inner.fn;
    Symbol r = s;
    r.fn = [fn, step](double x, double a, double b) {
        cplx acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += w[j] * (fn(x + (j + 1) * step, a, b) - fn(x - (j + 1) * step, a, b));
        return acc / step;
    };
    r.name = s.name + "|dx";
    return r;
}

}  // namespace bilop
