#pragma once

// Exact-coefficient rebuild of the truncated series, used as the reference
// for rows where double-precision accumulation is under the most stress.
// Series coefficients are arbitrary-precision rationals; only the final norm
// integral is evaluated in floating point, at 50 significant digits.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "poly2.hpp"

namespace kdvbs {

using Rational = boost::multiprecision::cpp_rational;
using Float50 = boost::multiprecision::cpp_bin_float_50;

inline Float50 two_pi_50() { return 2 * boost::math::constants::pi<Float50>(); }

// Decay rate with rational lambda, domain length L, and a fixed truncation
// order, mirroring the double-precision construction step for step.
inline double alpha_rational_reference(const Rational& lambda, const Float50& L,
                                       int n_terms) {
    if (n_terms < 1)
        throw std::invalid_argument("alpha_rational_reference: n_terms must be >= 1");
    auto H = BivariatePoly<Rational>::monomial(Monomial{1, 1}, Rational(1));
    BivariatePoly<Rational> series;
    const Rational scale = lambda / 3;
    for (int n = 0; n < n_terms; ++n) {
        series.add(H, scale);
        if (n + 1 < n_terms) H = apply_P(H, lambda);
    }

    // Gain trace is the t_exp = 1 slice of the series.
    UnivariatePoly<Rational> q = series.diff_t().restrict_t(Rational(0));

    Float50 norm_sq = 0;
    for (const auto& [ei, ci] : q.terms())
        for (const auto& [ej, cj] : q.terms()) {
            const int e = ei + ej + 1;
            norm_sq += Float50(ci) * Float50(cj) * pow(L, e) / e;
        }
    return static_cast<double>(Float50(lambda) - norm_sq / 2);
}

} // namespace kdvbs
