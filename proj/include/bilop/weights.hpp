#pragma once

#include "bilop/signal.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace bilop {

/// Nonnegative weight with declared class parameters (theta, l).
struct Weight {
    std::function<double(double)> eval;
    double theta = 0.0;
    double l = 1.0;
    std::string name;

    double operator()(double x) const { return eval(x); }
    /// Values at the grid points; throws InvariantViolation on a negative sample.
    RVec sample(const Grid& g) const;
};

/// Config form: kind = const | poly | exp.
/// const: value; poly: (1+|x|)^{sign alpha}; exp: e^{rate |x|}.
struct WeightSpec {
    std::string kind = "const";
    double value = 1.0;
    double alpha = 0.5;
    int sign = 1;
    double rate = 1.0;
    double theta = 1.0;
    double l = 1.0;
};

Weight make_weight(const WeightSpec& spec);
Weight constant_weight(double value = 1.0, double theta = 1.0, double l = 1.0);
Weight power_weight(double alpha, double theta = 1.0, double l = 1.0);  // (1+|x|)^alpha, alpha may be negative
Weight exponential_weight(double rate = 1.0, double theta = 1.0, double l = 1.0);

struct WeightClassReport {
    double C = 0.0;              // max over (I,k) of 2^{-k theta} sup_I w / inf_{2^k I} w
    RVec per_k;                  // the same max at each k
    Interval witness;            // I attaining C
    int witness_k = 0;
    double box = 0.0;            // I ranges over [-box, box]
    double step = 0.0;
    int K = 0;
    double ceiling = 0.0;
    bool pass = false;           // C <= ceiling and per_k not growing at k = K
};

/// Scans intervals I of length l with left ends on step Z inside [-box, box - l]
/// and k = 0..K; sup and inf are taken over the points of step Z.
/// Needs box >= 2^K l and l/(2 step) integer.
WeightClassReport weight_class_check(const Weight& w, double theta, double l, double box, double step, int K = 6,
                                     double ceiling = 1e3);

struct WeightEquivReport {
    double max_ratio = 0.0;      // max of w(x) / ((1+|x-y|/l)^theta w(y))
    RVec per_band;               // max over pairs with floor(log2(1+|x-y|/l)) = b
    double witness_x = 0.0;
    double witness_y = 0.0;
    std::size_t pairs = 0;
    std::size_t zero_denominators = 0;   // pairs with w(y) = 0
    double ceiling = 0.0;
    bool pass = false;           // max_ratio <= ceiling and band b(span/2) not above the one before
};

WeightEquivReport weight_equiv_check(const Weight& w, double theta, double l,
                                     const std::vector<std::pair<double, double>>& pairs, double ceiling = 1e3);
/// All ordered pairs of points of step Z in [-box, box].
std::vector<std::pair<double, double>> lattice_pairs(double box, double step);

/// (sum |f|^p w h)^{1/p} over the region; p = inf gives max |f| where w > 0.
double weighted_lp_norm(const SampledFunction& f, double p, const RVec& w, const Mask& region);
double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w, const Mask& region);
double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w);

/// (1 + 4 pi^2 xi^2)^{m/2} in slot order.
RVec sobolev_multiplier(const Grid& g, double m);
SampledFunction sobolev_Jm(const SampledFunction& f, double m);
double sobolev_norm(const SampledFunction& f, double m, double p, const Weight& w);

}  // namespace bilop
