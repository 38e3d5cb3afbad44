#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "banded.hpp"
#include "transform.hpp"

namespace kdvbs {

enum class SimMode { controlled2, uncontrolled, controlled1, nonlinear_controlled2 };

struct SchemeConfig {
    double L = 2.0 * 3.14159265358979323846;
    int J = 200;
    double dt = 1e-3;
    int n_steps = 30000;
    double lambda = 0.0;     // damping of the target system; 0 for plant marching
    SimMode mode = SimMode::uncontrolled;
    int m_succession = 50;   // cap on succession iterations per reconstruction
    int snapshot_count = 11; // sparse snapshots, evenly spaced including ends
};

struct SimTrace {
    std::vector<double> times;        // length n_steps + 1
    std::vector<double> energy;       // discrete L2 norm sqrt(dx * sum u^2)
    std::vector<double> u_left_deriv; // w_1^n / dx, one-sided trace at x = 0
    std::vector<double> dirichlet_U;  // integral of k~(L, y) u(y, t) dy
    std::vector<double> neumann_V;    // integral of k~_x(L, y) u(y, t) dy
    std::vector<std::pair<double, GridFunction>> snapshots;
};

// Interior operator A = D+ D+ D- + D on the constrained space
// w_0 = w_{J-1} = w_J = 0; unknowns are w_1 .. w_{J-2}. Row j realizes
// (w_{j+2} - 3 w_{j+1} + 3 w_j - w_{j-1}) / dx^3 + (w_{j+1} - w_{j-1}) / (2 dx)
// with out-of-range neighbours dropped.
BandedMatrix build_A(int J, double dx);

// Normalized cell averages (1/dx) * integral over [x_{j-1/2}, x_{j+1/2}] for
// j = 1..J-1 by 3-point Gauss quadrature; entries 0, J-1, J are set to zero
// per the constrained space.
GridFunction init_cell_average(const std::function<double(double)>& u0, int J, double L);

// Plain discrete L2 norm used for energy traces: sqrt(dx * sum of squares).
double sim_energy(const GridFunction& u);

// Named initial profiles used across experiments: "zero",
// "one_minus_cos" (amplitude * (1 - cos(2 pi x / L))), and "gaussian"
// (amplitude * exp(-(x - L/2)^2 / (L/10)^2)).
std::function<double(double)> make_profile(const std::string& name, double amplitude, double L);

// Marches the configured scheme from the given initial datum. The kernel is
// required for the controlled modes and must carry the same (lambda, L);
// uncontrolled runs ignore it. Throws BlowupError when the energy exceeds
// 1e6 times its initial value and NoConvergenceError when the nonlinear
// fixed point stalls.
SimTrace simulate(const SchemeConfig& cfg, const std::function<double(double)>& u0,
                  const PseudoKernel* kernel = nullptr);

// Least-squares slope of log(energy) against time on [t_start, t_end],
// negated so decay is positive. The window must contain at least two samples
// and strictly positive energies.
double fit_decay_rate(const SimTrace& trace, double t_start, double t_end);

} // namespace kdvbs
