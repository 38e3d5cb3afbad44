#pragma once

#include <functional>
#include <vector>

#include "kernel.hpp"

namespace kdvbs {

// Samples of a function on the uniform grid x_j = j * L / J, j = 0..J.
struct GridFunction {
    double L = 0.0;
    int J = 0;
    std::vector<double> values; // length J + 1

    double dx() const { return L / J; }
};

GridFunction make_grid(double L, int J);

// Discrete L2 norm with trapezoid weights (half weight at the endpoints).
double grid_norm(const GridFunction& u);

// Lower-triangular quadrature matrix for (K phi)(x_j) = integral of
// k~(x_j, y) phi(y) over [0, x_j], composite trapezoid per row. Row 0 is
// identically zero; the diagonal carries weight * k~(x_j, x_j), which
// vanishes for a built kernel but is kept for synthetic kernels.
struct DiscreteK {
    double L = 0.0;
    int J = 0;
    std::vector<double> weights; // (J+1) x (J+1), row-major, zero above diagonal

    static DiscreteK from_kernel(const PseudoKernel& K, int J);
    static DiscreteK from_function(double L, int J,
                                   const std::function<double(double, double)>& k);

    double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * (J + 1) + j]; }
    GridFunction apply(const GridFunction& u) const;
};

// w~ = u - K u.
GridFunction forward(const DiscreteK& Kd, const GridFunction& u);

// Exact inverse of the discretized transform: forward substitution on
// (I - Kd) u = psi. Always solvable when diag(Kd) = 0.
GridFunction inverse_direct(const DiscreteK& Kd, const GridFunction& psi);

struct SuccessionResult {
    GridFunction u;
    int iterations = 0;
    double last_increment = 0.0; // ||v^m - v^{m-1}|| in the grid norm
};

// u = psi + v^m with v^0 = K psi, v^k = K(psi + v^{k-1}); fixed iteration
// count m >= 1.
SuccessionResult inverse_succession(const DiscreteK& Kd, const GridFunction& psi, int m);

// Same iteration, stopping once the increment norm falls below tol or after
// m_max steps, whichever is first.
SuccessionResult inverse_succession_adaptive(const DiscreteK& Kd, const GridFunction& psi,
                                             double tol = 1e-10, int m_max = 200);

// Largest singular value of W^{1/2} (I - Kd)^{-1} W^{-1/2}, where W holds the
// trapezoid quadrature weights; approximates the L2 operator norm of the
// inverse transform. Always >= 1 - O(dx).
double invnorm_estimate(const DiscreteK& Kd);

} // namespace kdvbs
