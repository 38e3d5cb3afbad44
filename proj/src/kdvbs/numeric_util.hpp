#pragma once

#include <cstddef>
#include <cmath>

namespace kdvbs {

// Integer power by binary exponentiation. Deterministic across libm versions,
// unlike std::pow(double, double).
inline double ipow(double base, int exp) {
    double result = 1.0;
    double b = base;
    int e = exp;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

// Kahan-Babuska (Neumaier) compensated accumulator in long double.
// Used wherever long alternating sums feed a small result.
class KahanSum {
public:
    void add(double x) {
        long double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(static_cast<long double>(x)))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (static_cast<long double>(x) - t) + sum_;
        sum_ = t;
    }
    double value() const { return static_cast<double>(sum_ + comp_); }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

} // namespace kdvbs
