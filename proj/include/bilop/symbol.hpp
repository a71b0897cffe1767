#pragma once

#include "bilop/common.hpp"
#include "bilop/signal.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace bilop {

/// The line l1*alpha + l2*beta = 0 in the frequency plane.
struct SingularLine {
    double l1 = 1.0;
    double l2 = -1.0;

    SingularLine() = default;
    SingularLine(double a, double b);
    double form(double alpha, double beta) const { return l1 * alpha + l2 * beta; }
    double norm() const;
};

/// |l1 a + l2 b| / sqrt(l1^2 + l2^2)
double dist_to_line(double alpha, double beta, const SingularLine& line);

enum class SymbolClass { Hormander, Line, LineScaled };
const char* to_string(SymbolClass c);

using SymbolFn = std::function<cplx(double x, double alpha, double beta)>;

/// sigma(x, alpha, beta) with angular frequencies.
struct Symbol {
    SymbolFn fn;
    std::optional<SingularLine> line;
    double scale = 1.0;
    bool x_dependent = false;
    SymbolClass declared_class = SymbolClass::Hormander;
    std::string name;
    double truncation = 0.0;  // L of truncate_near_line, 0 if none

    cplx operator()(double x, double alpha, double beta) const { return fn(x, alpha, beta); }
};

Symbol product_symbol();
Symbol bht_sign_symbol(const SingularLine& line);
Symbol scaled_symbol(const Symbol& s, cplx c);
/// x-independent symbol given by an n x n table over the grid's angular bins
/// (slot order); lookups snap to the nearest bin.
Symbol tabulated_symbol(const Grid& grid, CVec table);
/// Tabulated x-dependent symbol from a 3-axis binary file (see save_symbol_table).
Symbol load_symbol_table(const std::string& path);
void save_symbol_table(const std::string& path, const Grid& x_axis, const Grid& alpha_axis,
                       const Grid& beta_axis, const CVec& values);

/// sigma * S((d - 1/(2L)) / (1/(2L))): 0 for d <= 1/(2L), unchanged for d >= 1/L.
Symbol truncate_near_line(const Symbol& s, const SingularLine& line, double L);

/// (sigma * Phi(form), sigma * (1 - Phi(form)))
std::pair<Symbol, Symbol> split_low_high(const Symbol& s, const SingularLine& line,
                                         std::function<double(double)> profile = nullptr);

/// tau(x, a, b) = sigma(x, a + shift, b - shift). T_tau(e^{-i shift x} f, e^{i shift x} g) = T_sigma(f, g).
Symbol modulate_symbol(const Symbol& s, double shift);

/// Sample box for class_verify.
struct ClassBox {
    double alpha_lo = -50, alpha_hi = 50;
    double beta_lo = -50, beta_hi = 50;
    double x_lo = 0, x_hi = 0;
    int alpha_points = 41, beta_points = 41, x_points = 1;
};

struct ClassEntry {
    int a = 0, b = 0, c = 0;
    double line_weighted = 0.0;   // |d sigma| (scale + d)^{b+c}
    double homogeneous = 0.0;     // |d sigma| d^{b+c}
    double hormander = 0.0;       // |d sigma| (1 + |alpha| + |beta|)^{b+c}
};

struct ClassReport {
    std::vector<ClassEntry> entries;
    double ceiling = 0.0;
    std::size_t samples = 0;
    std::size_t skipped = 0;   // points too close to the line for the stencil
    double declared_constant = 0.0;
    double homogeneous_constant = 0.0;
    bool pass = false;              // declared weighting
    bool pass_homogeneous = false;
    const ClassEntry& at(int a, int b, int c) const;
};

ClassReport class_verify(const Symbol& s, int max_order, const ClassBox& box, double step,
                         double ceiling = 1000.0);

/// k-th x-derivative of sigma by nested eighth-order central differences.
Symbol x_derivative(const Symbol& s, int k, double step = 0.02);

}  // namespace bilop
