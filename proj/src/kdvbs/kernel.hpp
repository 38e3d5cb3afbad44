#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poly2.hpp"

namespace kdvbs {

// Captures the per-iterate measurements made during a series build. Iterates
// themselves are stored only on request; bounds are always recorded.
struct BuildDiagnostics {
    std::vector<double> term_bounds;    // b_n = (lambda/3) * sup_bound(H^n, L)
    std::vector<double> series_bounds;  // sup bound of the accumulated series after H^n
    bool capture_iterates = false;
    std::vector<Poly2> iterates;        // H^0 .. H^N when capture_iterates is set
};

// Truncated series kernel on the triangle 0 <= y <= x <= L. The series lives
// in shifted coordinates (s, t) = (x - y, y); first derivatives are cached
// because traces and grid assembly use them repeatedly.
struct PseudoKernel {
    double lambda = 0.0;
    double L = 0.0;
    int n_terms = 0;           // number of iterates summed (N + 1)
    Poly2 series;              // truncated G~(s, t)
    Poly2 series_s;            // d/ds of series
    Poly2 series_t;            // d/dt of series
    double tail_bound = 0.0;        // sup-norm bound on the dropped remainder
    double tail_deriv_bound = 0.0;  // same for first derivatives
    double residual_bound = 0.0;    // sup bound of the truncation's equation residual
    std::vector<double> term_bounds;
};

struct DecayReport {
    double alpha = 0.0;
    std::optional<double> beta;
    double norm_ky0_sq = 0.0;   // squared L2 norm of k~_y(., 0)
    double norm_kxL_sq = 0.0;   // squared L2 norm of k~_x(L, .)
    std::optional<double> invnorm;
};

// Sums (lambda/3) * (H^0 + ... + H^N), H^0 = s t, H^{n+1} = P H^n, stopping at
// the first N whose term bound falls below tol relative to the running series
// sup bound (and below its predecessor, so the geometric tail continuation is
// well defined). Throws NoConvergenceError if that does not happen within
// n_max iterations.
PseudoKernel build_kernel(double lambda, double L, double tol = 1e-12, int n_max = 200,
                          BuildDiagnostics* diag = nullptr);

// Same construction with the truncation order fixed up front; used by
// refinement studies and the exact-arithmetic cross-check.
PseudoKernel build_kernel_fixed_terms(double lambda, double L, int n_terms,
                                      BuildDiagnostics* diag = nullptr);

// Pointwise kernel and first partial derivatives; (x, y) must satisfy
// 0 <= y <= x <= L up to rounding slack.
double kernel_value(const PseudoKernel& K, double x, double y);
double kernel_dx(const PseudoKernel& K, double x, double y);
double kernel_dy(const PseudoKernel& K, double x, double y);

// Boundary traces as exact univariate polynomials: the feedback gain slice
// k~_y(x, 0), and the controller slices k~(L, y) and k~_x(L, y) obtained by
// expanding (L - y)^j exactly.
Poly1 trace_ky0(const PseudoKernel& K);
Poly1 trace_kL(const PseudoKernel& K);
Poly1 trace_kxL(const PseudoKernel& K);

// Decay rate of the two-controller closed loop, lambda - ||k~_y(.,0)||^2 / 2,
// with the norm integral evaluated exactly.
double alpha(const PseudoKernel& K);

// Single-controller rate: alpha minus ||k~_x(L,.)||^2 * invnorm^2 / 2.
// Requires invnorm >= 1.
double beta(const PseudoKernel& K, double invnorm);

DecayReport make_decay_report(const PseudoKernel& K,
                              std::optional<double> invnorm = std::nullopt);

// Max absolute residual of the governing identity over the sample points
// (given in (x, y) coordinates inside the triangle). Never exceeds
// residual_bound, up to evaluation roundoff.
double residual(const PseudoKernel& K, const std::vector<std::pair<double, double>>& points);

// {lambda, L, n_terms, tail_bound, terms: [[s_exp, t_exp, coeff], ...]},
// terms sorted lexicographically, coefficients with 17 significant digits.
std::string dump_kernel_json(const PseudoKernel& K);

} // namespace kdvbs
