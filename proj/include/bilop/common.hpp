#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bilop {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;
using Mask = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// error kinds named after the failure they report
class SizeError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ResolutionError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class PreconditionError : public Error { public: using Error::Error; };
class InvariantViolation : public Error { public: using Error::Error; };
class EvaluationError : public Error { public: using Error::Error; };

inline bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

/// mt19937_64 with hand-mapped variates; std distributions are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t bits() { return eng_(); }
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    int integer(int lo, int hi);  // inclusive
private:
    std::mt19937_64 eng_;
};

}  // namespace bilop
