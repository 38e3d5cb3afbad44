// Tests for the implicit finite-difference marcher: spatial operator stencil,
// cell-average initialization, agreement with a dense direct solve, discrete
// dissipativity, controlled/uncontrolled behavior, and the rate fitter.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kdvbs/kernel.hpp"
#include "kdvbs/simulator.hpp"
#include "kdvbs/transform.hpp"
#include "kdvbs/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace kdvbs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Exact cell average of 1 - cos(x) over [x - h/2, x + h/2]:
//   1 - (sin(x + h/2) - sin(x - h/2)) / h = 1 - cos(x) * sin(h/2) / (h/2).
double one_minus_cos_cell_average(double x, double h) {
    const double half = 0.5 * h;
    return 1.0 - std::cos(x) * std::sin(half) / half;
}

Eigen::MatrixXd dense_interior_matrix(const BandedMatrix& A, int n) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = A.at(i, j);
    return M;
}

} // namespace

TEST_CASE("spatial operator: bandwidth, constants, and first-order consistency") {
    const int J = 64;
    const double dx = kTwoPi / J;
    const BandedMatrix A = build_A(J, dx);
    const int n = J - 2; // interior unknowns j = 1 .. J-2

    // Only offsets {-1, 0, +1, +2} may be populated.
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            if (q - p < -1 || q - p > 2) CHECK(A.at(p, q) == 0.0);

    // Rows whose stencil lies fully inside the interior annihilate constants:
    // (1 - 3 + 3 - 1)/dx^3 + (1 - 1)/(2 dx) = 0 up to the rounding of the four
    // individually stored entries (each of magnitude ~1/dx^3).
    const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() / (dx * dx * dx);
    std::vector<double> ones(static_cast<size_t>(n), 1.0);
    std::vector<double> Aones = A.apply(ones);
    for (int p = 1; p + 2 < n; ++p)
        CHECK(std::abs(Aones[static_cast<size_t>(p)]) <= roundoff);

    // On sin(x) the exact operator gives sin_x + sin_xxx = 0, so interior rows
    // measure pure truncation error, which is O(dx) for this one-sided stencil.
    auto interior_residual = [](int Jr) {
        const double dxr = kTwoPi / Jr;
        const BandedMatrix Ar = build_A(Jr, dxr);
        const int nr = Jr - 2;
        std::vector<double> v(static_cast<size_t>(nr));
        for (int p = 0; p < nr; ++p) v[static_cast<size_t>(p)] = std::sin((p + 1) * dxr);
        std::vector<double> Av = Ar.apply(v);
        double worst = 0.0;
        for (int p = 1; p + 2 < nr; ++p)
            worst = std::max(worst, std::abs(Av[static_cast<size_t>(p)]));
        return worst;
    };
    const double r64 = interior_residual(64);
    const double r128 = interior_residual(128);
    const double r256 = interior_residual(256);
    CHECK(r64 < 0.6 * (kTwoPi / 64));      // (dx/2) |sin''''| <= dx/2, with headroom
    CHECK(r64 / r128 == doctest::Approx(2.0).epsilon(0.3));
    CHECK(r128 / r256 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("spatial operator rejects bad dimensions") {
    CHECK_THROWS_AS(build_A(7, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_A(64, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_A(64, -1.0), std::invalid_argument);
}

TEST_CASE("cell-average initialization matches closed-form averages") {
    const int J = 200;
    const double L = kTwoPi;
    const double dx = L / J;

    auto prof = make_profile("one_minus_cos", 1.0, L);
    GridFunction g = init_cell_average(prof, J, L);
    REQUIRE(g.values.size() == static_cast<size_t>(J + 1));

    // Boundary-constrained entries are pinned to zero.
    CHECK(g.values[0] == 0.0);
    CHECK(g.values[static_cast<size_t>(J - 1)] == 0.0);
    CHECK(g.values[static_cast<size_t>(J)] == 0.0);

    // Interior entries agree with the analytic cell average (the three-point
    // Gauss rule is far below 1e-12 error at this resolution).
    for (int j = 1; j <= J - 2; ++j) {
        const double want = one_minus_cos_cell_average(j * dx, dx);
        CHECK(g.values[static_cast<size_t>(j)] == doctest::Approx(want).epsilon(1e-12));
    }

    // Constants average to themselves exactly (Gauss weights sum to the cell).
    GridFunction c = init_cell_average([](double) { return 3.25; }, 64, 1.0);
    for (int j = 1; j <= 62; ++j)
        CHECK(c.values[static_cast<size_t>(j)] == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("one implicit step agrees with a dense direct solve") {
    const int J = 64;
    const double L = kTwoPi;
    const double dx = L / J;
    const double dt = 1e-3;

    SchemeConfig cfg;
    cfg.mode = SimMode::uncontrolled;
    cfg.L = L;
    cfg.J = J;
    cfg.dt = dt;
    cfg.n_steps = 1;
    cfg.lambda = 0.0;
    cfg.snapshot_count = 2;
    auto prof = make_profile("one_minus_cos", 1.0, L);
    SimTrace tr = simulate(cfg, prof);
    REQUIRE(tr.snapshots.size() == 2);
    const GridFunction& u1 = tr.snapshots.back().second;

    const int n = J - 2;
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n) + dt * dense_interior_matrix(build_A(J, dx), n);
    GridFunction u0 = init_cell_average(prof, J, L);
    Eigen::VectorXd rhs(n);
    for (int p = 0; p < n; ++p) rhs(p) = u0.values[static_cast<size_t>(p + 1)];
    Eigen::VectorXd sol = C.partialPivLu().solve(rhs);

    for (int p = 0; p < n; ++p)
        CHECK(u1.values[static_cast<size_t>(p + 1)] ==
              doctest::Approx(sol(p)).epsilon(1e-12));
    CHECK(u1.values[0] == 0.0);
    CHECK(u1.values[static_cast<size_t>(J - 1)] == 0.0);
    CHECK(u1.values[static_cast<size_t>(J)] == 0.0);
}

TEST_CASE("uncontrolled march: energy never increases and dissipation is O(dx)") {
    auto run_rate = [](int J) {
        SchemeConfig cfg;
        cfg.mode = SimMode::uncontrolled;
        cfg.J = J;
        cfg.dt = 1e-3;
        cfg.n_steps = 5000;
        cfg.lambda = 0.0;
        SimTrace tr = simulate(cfg, make_profile("one_minus_cos", 1.0, cfg.L));
        for (size_t i = 1; i < tr.energy.size(); ++i)
            REQUIRE(tr.energy[i] <= tr.energy[i - 1] * (1.0 + 1e-14));
        return fit_decay_rate(tr, 0.5, 5.0);
    };
    const double rate200 = run_rate(200);
    const double rate400 = run_rate(400);
    CHECK(rate200 > 0.0);
    // The slowest discrete mode decays at the operator's own smallest
    // eigenvalue real part, which scales like dx.
    CHECK(rate200 / rate400 == doctest::Approx(2.0).epsilon(0.1));

    // Initial energy matches ||1 - cos||_{L2(0, 2pi)} = sqrt(3 pi).
    SchemeConfig cfg;
    cfg.mode = SimMode::uncontrolled;
    cfg.J = 200;
    cfg.dt = 1e-3;
    cfg.n_steps = 1;
    SimTrace tr = simulate(cfg, make_profile("one_minus_cos", 1.0, cfg.L));
    CHECK(tr.energy.front() ==
          doctest::Approx(std::sqrt(3.0 * std::numbers::pi)).epsilon(1e-3));
}

TEST_CASE("uncontrolled march: max-norm deviation from the profile refines with J") {
    auto deviation = [](int J) {
        SchemeConfig cfg;
        cfg.mode = SimMode::uncontrolled;
        cfg.J = J;
        cfg.dt = 1e-3;
        cfg.n_steps = 5000; // t = 5
        cfg.snapshot_count = 2;
        auto prof = make_profile("one_minus_cos", 1.0, cfg.L);
        SimTrace tr = simulate(cfg, prof);
        const GridFunction& uT = tr.snapshots.back().second;
        const double dx = cfg.L / J;
        double worst = 0.0;
        for (int j = 1; j <= J - 2; ++j)
            worst = std::max(worst, std::abs(uT.values[static_cast<size_t>(j)] - prof(j * dx)));
        return worst;
    };
    const double d200 = deviation(200);
    const double d400 = deviation(400);
    CHECK(d400 < 0.7 * d200); // first-order refinement halves the drift
}

TEST_CASE("zero initial data stays identically zero") {
    SchemeConfig cfg;
    cfg.mode = SimMode::uncontrolled;
    cfg.J = 64;
    cfg.dt = 1e-2;
    cfg.n_steps = 50;
    SimTrace tr = simulate(cfg, make_profile("zero", 1.0, cfg.L));
    for (double e : tr.energy) CHECK(e == 0.0);
    for (const auto& [t, snap] : tr.snapshots)
        for (double v : snap.values) CHECK(v == 0.0);
}

TEST_CASE("snapshot bookkeeping: count, ordering, endpoints") {
    SchemeConfig cfg;
    cfg.mode = SimMode::uncontrolled;
    cfg.J = 64;
    cfg.dt = 1e-2;
    cfg.n_steps = 100;
    cfg.snapshot_count = 6;
    auto prof = make_profile("gaussian", 0.5, cfg.L);
    SimTrace tr = simulate(cfg, prof);

    REQUIRE(tr.snapshots.size() == 6);
    CHECK(tr.snapshots.front().first == 0.0);
    CHECK(tr.snapshots.back().first == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 1; i < tr.snapshots.size(); ++i)
        CHECK(tr.snapshots[i].first > tr.snapshots[i - 1].first);

    // The t = 0 snapshot is the cell-averaged initial state.
    GridFunction u0 = init_cell_average(prof, cfg.J, cfg.L);
    for (size_t j = 0; j < u0.values.size(); ++j)
        CHECK(tr.snapshots.front().second.values[j] == u0.values[j]);

    // Per-step traces all have one entry per recorded time.
    REQUIRE(tr.times.size() == static_cast<size_t>(cfg.n_steps + 1));
    CHECK(tr.energy.size() == tr.times.size());
    CHECK(tr.u_left_deriv.size() == tr.times.size());
    CHECK(tr.dirichlet_U.size() == tr.times.size());
    CHECK(tr.neumann_V.size() == tr.times.size());
}

TEST_CASE("controlled target march decays at the certified rate") {
    const double lambda = 0.03;
    PseudoKernel K = build_kernel(lambda, kTwoPi, 1e-10, 60);
    const double a = alpha(K);

    SchemeConfig cfg;
    cfg.mode = SimMode::controlled2;
    cfg.J = 128;
    cfg.dt = 1e-3;
    cfg.n_steps = 15000; // t = 15
    cfg.lambda = lambda;
    SimTrace tr = simulate(cfg, make_profile("one_minus_cos", 1.0, cfg.L), &K);

    const double rate = fit_decay_rate(tr, 2.0, 15.0);
    CHECK(rate >= 0.8 * a);
    CHECK(tr.energy.back() < 0.7 * tr.energy.front());

    // The reconstructed plant state obeys the controller's boundary values:
    // u(L, t) equals the Dirichlet feedback integral of u itself.
    const auto& [tT, uT] = tr.snapshots.back();
    CHECK(uT.values[0] == 0.0);
    CHECK(uT.values.back() == doctest::Approx(tr.dirichlet_U.back()).epsilon(1e-8));

    // Reconstruction consistency: (I - K)u returns the evolved target state,
    // whose boundary entries vanish by construction.
    DiscreteK Kd = DiscreteK::from_kernel(K, cfg.J);
    GridFunction w = forward(Kd, uT);
    CHECK(std::abs(w.values[0]) < 1e-12);
    CHECK(std::abs(w.values[static_cast<size_t>(cfg.J - 1)]) < 1e-8);
    CHECK(std::abs(w.values[static_cast<size_t>(cfg.J)]) < 1e-8);
}

TEST_CASE("lagged-Dirichlet plant march decays and keeps the two boundary nodes tied") {
    const double lambda = 0.01;
    PseudoKernel K = build_kernel(lambda, kTwoPi, 1e-10, 60);

    SchemeConfig cfg;
    cfg.mode = SimMode::controlled1;
    cfg.J = 128;
    cfg.dt = 1e-3;
    cfg.n_steps = 20000; // t = 20
    cfg.lambda = lambda;
    SimTrace tr = simulate(cfg, make_profile("one_minus_cos", 1.0, cfg.L), &K);

    CHECK(fit_decay_rate(tr, 2.0, 20.0) > 0.0);
    CHECK(tr.energy.back() < tr.energy.front());
    for (const auto& [t, snap] : tr.snapshots) {
        CHECK(snap.values[static_cast<size_t>(cfg.J - 1)] ==
              snap.values[static_cast<size_t>(cfg.J)]);
        CHECK(snap.values[0] == 0.0);
    }
}

TEST_CASE("nonlinear target march converges pointwise and decays") {
    const double lambda = 0.03;
    PseudoKernel K = build_kernel(lambda, kTwoPi, 1e-10, 60);
    const double a = alpha(K);

    SchemeConfig cfg;
    cfg.mode = SimMode::nonlinear_controlled2;
    cfg.J = 100;
    cfg.dt = 1e-3;
    cfg.n_steps = 10000; // t = 10
    cfg.lambda = lambda;
    SimTrace tr = simulate(cfg, make_profile("one_minus_cos", 0.05, cfg.L), &K);

    const double rate = fit_decay_rate(tr, 1.0, 10.0);
    CHECK(rate >= 0.8 * a);

    // At this amplitude the quadratic term is a small perturbation: the
    // nonlinear trajectory must stay close to the linear one.
    SchemeConfig lin = cfg;
    lin.mode = SimMode::controlled2;
    SimTrace trl = simulate(lin, make_profile("one_minus_cos", 0.05, cfg.L), &K);
    CHECK(tr.energy.back() ==
          doctest::Approx(trl.energy.back()).epsilon(0.05));
}

TEST_CASE("rate fitter recovers an exact exponential") {
    SimTrace tr;
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.1 * i;
        tr.times.push_back(t);
        tr.energy.push_back(2.7 * std::exp(-0.5 * t));
    }
    CHECK(fit_decay_rate(tr, 0.0, 10.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit_decay_rate(tr, 3.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));

    // Growth fits negative.
    SimTrace gr;
    for (int i = 0; i <= 10; ++i) {
        gr.times.push_back(i);
        gr.energy.push_back(std::exp(0.25 * i));
    }
    CHECK(fit_decay_rate(gr, 0.0, 10.0) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("rate fitter rejects degenerate windows") {
    SimTrace tr;
    tr.times = {0.0, 1.0, 2.0};
    tr.energy = {1.0, 0.5, 0.25};
    CHECK_THROWS_AS(fit_decay_rate(tr, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_decay_rate(tr, 5.0, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_decay_rate(tr, 0.0, 0.5), std::invalid_argument); // one sample

    SimTrace bad;
    bad.times = {0.0, 1.0};
    bad.energy = {1.0, 0.0};
    CHECK_THROWS_AS(fit_decay_rate(bad, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("simulate validates its configuration") {
    auto prof = make_profile("one_minus_cos", 1.0, kTwoPi);
    SchemeConfig cfg;
    cfg.mode = SimMode::uncontrolled;

    SchemeConfig c1 = cfg; c1.J = 7;
    CHECK_THROWS_AS(simulate(c1, prof), std::invalid_argument);
    SchemeConfig c2 = cfg; c2.dt = 0.0;
    CHECK_THROWS_AS(simulate(c2, prof), std::invalid_argument);
    SchemeConfig c3 = cfg; c3.n_steps = 0;
    CHECK_THROWS_AS(simulate(c3, prof), std::invalid_argument);
    SchemeConfig c4 = cfg; c4.L = -1.0;
    CHECK_THROWS_AS(simulate(c4, prof), std::invalid_argument);

    // Controlled modes need a kernel whose (lambda, L) matches the run.
    SchemeConfig c5 = cfg; c5.mode = SimMode::controlled2; c5.lambda = 0.03;
    CHECK_THROWS_AS(simulate(c5, prof), std::invalid_argument);
    PseudoKernel K = build_kernel(0.01, kTwoPi, 1e-8, 60);
    CHECK_THROWS_AS(simulate(c5, prof, &K), std::invalid_argument); // lambda mismatch
    SchemeConfig c6 = cfg; c6.mode = SimMode::controlled2; c6.lambda = 0.01; c6.L = 3.0;
    CHECK_THROWS_AS(simulate(c6, prof, &K), std::invalid_argument); // length mismatch

    CHECK_THROWS_AS(make_profile("no_such_profile", 1.0, kTwoPi), std::invalid_argument);
}
