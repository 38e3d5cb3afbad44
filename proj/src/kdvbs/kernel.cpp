#include "kernel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "errors.hpp"

namespace kdvbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual of the governing identity for a truncation ending at iterate H:
// every earlier term telescopes away, leaving (lambda/3) times the
// unbalanced part of the final iterate.
Poly2 residual_of_last_iterate(const Poly2& H, double lambda) {
    Poly2 r = H.diff_t(3);
    r.add(H.diff_s(1).diff_t(2), -3.0);
    r.add(H.diff_t(1), 1.0);
    r.add(H, lambda);
    return r.scaled(lambda / 3.0);
}

void check_triangle(const PseudoKernel& K, double x, double y) {
    const double slack = 1e-9 * std::max(1.0, K.L);
    if (y < -slack || y > x + slack || x > K.L + slack)
        throw std::domain_error("kernel evaluation outside the triangle 0 <= y <= x <= L");
}

// Substitute x = L into a series term sum, expanding (L - y)^a exactly via
// binomial coefficients; accumulation runs in extended precision because the
// expansion alternates in sign.
Poly1 trace_at_L(const Poly2& p, double L) {
    std::map<int, long double> acc;
    for (const auto& [m, c] : p.terms()) {
        const int a = m.s_exp;
        const int b = m.t_exp;
        double binom = 1.0;
        for (int i = 0; i <= a; ++i) {
            double sign = (i % 2 == 0) ? 1.0 : -1.0;
            acc[i + b] += static_cast<long double>(c) * binom * ipow(L, a - i) * sign;
            binom *= static_cast<double>(a - i) / static_cast<double>(i + 1);
        }
    }
    Poly1 out;
    for (const auto& [e, c] : acc) out.add_term(e, static_cast<double>(c));
    return out;
}

PseudoKernel build_impl(double lambda, double L, double tol, int n_max,
                        std::optional<int> fixed_n, BuildDiagnostics* diag) {
    if (!(lambda > 0.0)) throw std::invalid_argument("build_kernel: lambda must be > 0");
    if (!(L > 0.0)) throw std::invalid_argument("build_kernel: L must be > 0");
    if (!fixed_n) {
        if (!(tol > 0.0)) throw std::invalid_argument("build_kernel: tol must be > 0");
        if (n_max < 1) throw std::invalid_argument("build_kernel: n_max must be >= 1");
    } else if (*fixed_n < 1) {
        throw std::invalid_argument("build_kernel_fixed_terms: n_terms must be >= 1");
    }

    PseudoKernel K;
    K.lambda = lambda;
    K.L = L;

    const double scale = lambda / 3.0;
    Poly2 H = Poly2::monomial(Monomial{1, 1}, 1.0);
    Poly2 series;
    double prev_b = kInf;
    double b = 0.0;
    int n = 0;

    for (;;) {
        b = scale * H.sup_bound(L);
        series.add(H, scale);
        K.term_bounds.push_back(b);
        if (diag) {
            diag->term_bounds.push_back(b);
            diag->series_bounds.push_back(series.sup_bound(L));
            if (diag->capture_iterates) diag->iterates.push_back(H);
        }

        if (fixed_n) {
            if (n + 1 == *fixed_n) break;
        } else {
            // Stop once the new term is negligible against the accumulated
            // series and strictly below its predecessor, so the measured
            // ratio used for the tail continuation is < 1.
            if (b < tol * series.sup_bound(L) && b < prev_b) break;
            if (n >= n_max)
                throw NoConvergenceError(
                    "build_kernel: term bounds did not fall below tolerance within n_max iterations");
        }
        prev_b = b;
        H = apply_P(H, lambda);
        ++n;
    }

    K.n_terms = n + 1;
    K.series = std::move(series);
    K.series_s = K.series.diff_s();
    K.series_t = K.series.diff_t();

    // Geometric continuation of the measured term bounds. With ratio rho < 1,
    // the dropped remainder is bounded by b * rho / (1 - rho) in sup norm; a
    // first derivative of iterate n costs an extra factor (2n + 1) / L, which
    // summed against the geometric continuation gives the second formula.
    if (prev_b > 0.0 && std::isfinite(prev_b) && b < prev_b) {
        const double rho = b / prev_b;
        const double geo = rho / (1.0 - rho);
        K.tail_bound = b * geo;
        K.tail_deriv_bound =
            (b / L) * ((2.0 * n + 1.0) * geo + 2.0 * rho / ((1.0 - rho) * (1.0 - rho)));
    } else {
        K.tail_bound = kInf;
        K.tail_deriv_bound = kInf;
    }
    K.residual_bound = residual_of_last_iterate(H, lambda).sup_bound(L);
    return K;
}

} // namespace

PseudoKernel build_kernel(double lambda, double L, double tol, int n_max,
                          BuildDiagnostics* diag) {
    return build_impl(lambda, L, tol, n_max, std::nullopt, diag);
}

PseudoKernel build_kernel_fixed_terms(double lambda, double L, int n_terms,
                                      BuildDiagnostics* diag) {
    return build_impl(lambda, L, 0.0, 0, n_terms, diag);
}

double kernel_value(const PseudoKernel& K, double x, double y) {
    check_triangle(K, x, y);
    return K.series.eval(x - y, y);
}

double kernel_dx(const PseudoKernel& K, double x, double y) {
    check_triangle(K, x, y);
    return K.series_s.eval(x - y, y);
}

double kernel_dy(const PseudoKernel& K, double x, double y) {
    check_triangle(K, x, y);
    const double s = x - y;
    return K.series_t.eval(s, y) - K.series_s.eval(s, y);
}

Poly1 trace_ky0(const PseudoKernel& K) {
    // k~_y(x, 0) = G~_t(x, 0) - G~_s(x, 0); the subtracted part vanishes
    // because every series term carries t_exp >= 1.
    return K.series_t.restrict_t(0.0);
}

Poly1 trace_kL(const PseudoKernel& K) { return trace_at_L(K.series, K.L); }

Poly1 trace_kxL(const PseudoKernel& K) { return trace_at_L(K.series_s, K.L); }

double alpha(const PseudoKernel& K) {
    return K.lambda - 0.5 * poly_int_sq(trace_ky0(K), K.L);
}

double beta(const PseudoKernel& K, double invnorm) {
    if (!(invnorm >= 1.0))
        throw std::invalid_argument("beta: invnorm must be >= 1");
    return alpha(K) - 0.5 * poly_int_sq(trace_kxL(K), K.L) * invnorm * invnorm;
}

DecayReport make_decay_report(const PseudoKernel& K, std::optional<double> invnorm) {
    DecayReport r;
    r.norm_ky0_sq = poly_int_sq(trace_ky0(K), K.L);
    r.norm_kxL_sq = poly_int_sq(trace_kxL(K), K.L);
    r.alpha = K.lambda - 0.5 * r.norm_ky0_sq;
    if (invnorm) {
        r.invnorm = invnorm;
        r.beta = r.alpha - 0.5 * r.norm_kxL_sq * (*invnorm) * (*invnorm);
    }
    return r;
}

double residual(const PseudoKernel& K, const std::vector<std::pair<double, double>>& points) {
    // Full governing operator applied to the stored truncation; independent
    // of the telescoped form used for residual_bound.
    Poly2 R = K.series.diff_t(3);
    R.add(K.series.diff_s(1).diff_t(2), -3.0);
    R.add(K.series.diff_s(2).diff_t(1), 3.0);
    R.add(K.series_t, 1.0);
    R.add(K.series, K.lambda);

    double worst = 0.0;
    for (const auto& [x, y] : points) {
        check_triangle(K, x, y);
        worst = std::max(worst, std::abs(R.eval(x - y, y)));
    }
    return worst;
}

std::string dump_kernel_json(const PseudoKernel& K) {
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "{\"lambda\": " << fmt(K.lambda) << ", \"L\": " << fmt(K.L)
        << ", \"n_terms\": " << K.n_terms << ", \"tail_bound\": " << fmt(K.tail_bound)
        << ", \"terms\": [";
    bool first = true;
    for (const auto& [m, c] : K.series.terms()) {
        if (!first) out << ", ";
        first = false;
        out << "[" << m.s_exp << ", " << m.t_exp << ", " << fmt(c) << "]";
    }
    out << "]}";
    return out.str();
}

} // namespace kdvbs
