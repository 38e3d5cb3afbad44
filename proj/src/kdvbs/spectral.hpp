#pragma once

// Eigenvalues of the simplified third-order operator A u = -u''' on (0, L)
// with boundary conditions u(0) = u'(L) = u(L) - u''(L) = 0. An eigenvalue
// lam is a zero of the 3x3 boundary determinant assembled from the cube
// roots of r^3 = -lam; the determinant reduces to a six-term alternating sum
// over ordered root pairs. All zeros have strictly negative real part and
// their moduli grow cubically along the asymptotic ladder
// 8 pi^3 k^3 / (3 sqrt(3) L^3).

#include <complex>
#include <vector>

namespace kdvbs {

struct EigRecord {
    int k = 0;                        // seed index (1-based modulus ladder)
    std::complex<double> lam{0.0, 0.0};
    double residual = 0.0;            // |char_det(lam)| in the guarded scaling
    double ratio = 0.0;               // |lam| / asymptotic_modulus(k, L)
};

// Alternating determinant sum over the three cube roots of -lam, scaled by
// e^{-max Re(r_i + r_j) L} so the value stays finite for large |lam|. The
// scaling factor is real and positive, so the zero set is unchanged. The
// base root is taken in the closed first quadrant when one exists (principal
// root otherwise); relabeling the roots can only flip the overall sign.
// Throws std::invalid_argument for lam = 0 (the roots degenerate) or L <= 0.
std::complex<double> char_det(std::complex<double> lam, double L);

// Modulus of the k-th rung of the asymptotic ladder, 8 pi^3 k^3/(3 sqrt3 L^3).
double asymptotic_modulus(int k, double L);

// Newton's method (numerical derivative) on char_det, one solve per k in
// [k_min, k_max]. Seeds come from the asymptotic ladder: the determinant is
// purely imaginary on the negative real axis, so its roots are bracketed by
// a deterministic sign-change scan along ladder indices (pitch 0.02) and each
// Newton polish starts at its bracket midpoint — the literal mid-gap rung
// values land between adjacent roots and make the basin assignment unstable
// in double precision. Records are normalized to Im(lam) <= 0 (the spectrum
// is closed under conjugation). Solves for distinct k run concurrently.
// Accepted records satisfy residual < tol; indices that fail to converge are
// appended to *failed when provided (they are skipped, not fatal). Duplicate
// converged roots are dropped, keeping the smallest k.
std::vector<EigRecord> find_eigenvalues(double L, int k_min, int k_max, double tol,
                                        std::vector<int>* failed = nullptr);

// max Re(lam) over the records; throws std::invalid_argument when empty.
double spectral_abscissa(const std::vector<EigRecord>& records);

} // namespace kdvbs
