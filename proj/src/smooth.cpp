#include "bilop/smooth.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace bilop {

namespace {

double psi(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

// cubic Hermite table of the primitive on [0, 1/2]; the other half by symmetry
struct StepTable {
    static constexpr int kCells = 4096;
    double h = 0.5 / kCells;
    double norm = 0.0;
    std::vector<double> val;
    std::vector<double> der;

    StepTable() : val(kCells + 1), der(kCells + 1) {
        using Q = boost::math::quadrature::gauss<double, 20>;
        std::vector<double> cell(kCells);
        for (int i = 0; i < kCells; ++i) {
            const double a = 2.0 * (i * h) - 1.0;
            const double b = 2.0 * ((i + 1) * h) - 1.0;
            cell[i] = Q::integrate(psi, a, b);
        }
        double half = 0.0;
        for (double c : cell) half += c;
        norm = 2.0 * half;
        double acc = 0.0;
        for (int i = 0; i <= kCells; ++i) {
            val[i] = acc / norm;
            der[i] = 2.0 * psi(2.0 * (i * h) - 1.0) / norm;
            if (i < kCells) acc += cell[i];
        }
        val[kCells] = 0.5;
    }

    double eval(double u) const {
        const double s = u / h;
        int i = static_cast<int>(s);
        if (i >= kCells) i = kCells - 1;
        const double t = s - i;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * val[i] + h10 * h * der[i] + h01 * val[i + 1] + h11 * h * der[i + 1];
    }
};

const StepTable& table() {
    static const StepTable tab;
    return tab;
}

}  // namespace

double smooth_step(double u) {
    if (!(u > 0.0)) return 0.0;
    if (u >= 1.0) return 1.0;
    // the cubic may undershoot by rounding where the primitive is flat
    if (u <= 0.5) return std::max(0.0, table().eval(u));
    return 1.0 - std::max(0.0, table().eval(1.0 - u));
}

double smooth_step_deriv(double u) {
    if (!(u > 0.0) || u >= 1.0) return 0.0;
    return 2.0 * psi(2.0 * u - 1.0) / table().norm;
}

double cutoff_profile(double t) { return smooth_step(2.0 - std::abs(t)); }

double packet_window(double t) {
    const double a = std::abs(t);
    return a < 0.5 ? smooth_step(1.0 - 2.0 * a) : 0.0;
}

}  // namespace bilop
