#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "errors.hpp"
#include "kernel.hpp"

namespace kdvbs {

namespace {

// Trapezoid quadrature of samples z against u over the full grid.
double quad_against(const std::vector<double>& z, const GridFunction& u) {
    const int J = u.J;
    double acc = 0.5 * (z[0] * u.values[0] + z[J] * u.values[J]);
    for (int j = 1; j < J; ++j) acc += z[j] * u.values[j];
    return acc * u.dx();
}

std::vector<double> sample_poly(const Poly1& p, int J, double dx) {
    std::vector<double> out(J + 1);
    for (int j = 0; j <= J; ++j) out[j] = p.eval(j * dx);
    return out;
}

struct StepWorkspace {
    int J;
    double dx, dt;
    BandedLU* lu = nullptr;
    std::vector<double> gain;     // k~_y(x_j, 0) on the full grid
    std::vector<double> interior; // scratch, size J - 2
};

// One implicit step of the target scheme: solve C w' = w + (dt/dx) g w_1 on
// the interior, boundaries pinned to zero.
void step_target(std::vector<double>& w, StepWorkspace& ws,
                 const std::vector<double>* extra_rhs) {
    const int n = ws.J - 2;
    const double w1 = w[1];
    for (int p = 0; p < n; ++p) {
        int j = p + 1;
        ws.interior[p] = w[j] + (ws.dt / ws.dx) * ws.gain[j] * w1;
        if (extra_rhs) ws.interior[p] += (*extra_rhs)[p];
    }
    ws.lu->solve_inplace(ws.interior);
    for (int p = 0; p < n; ++p) w[p + 1] = ws.interior[p];
    w[0] = 0.0;
    w[ws.J - 1] = 0.0;
    w[ws.J] = 0.0;
}

// Centered derivative of a full-grid sample, one-sided at the ends.
std::vector<double> centered_derivative(const std::vector<double>& u, double dx) {
    const int J = (int)u.size() - 1;
    std::vector<double> d(J + 1);
    d[0] = (u[1] - u[0]) / dx;
    for (int j = 1; j < J; ++j) d[j] = (u[j + 1] - u[j - 1]) / (2.0 * dx);
    d[J] = (u[J] - u[J - 1]) / dx;
    return d;
}

} // namespace

BandedMatrix build_A(int J, double dx) {
    if (J < 8) throw std::invalid_argument("build_A: J must be >= 8");
    if (!(dx > 0.0)) throw std::invalid_argument("build_A: dx must be > 0");
    const int n = J - 2;
    BandedMatrix A(n, 1, 2);
    const double c3 = 1.0 / (dx * dx * dx);
    const double c1 = 1.0 / (2.0 * dx);
    for (int p = 0; p < n; ++p) {
        if (p - 1 >= 0) A.set(p, p - 1, -c3 - c1);
        A.set(p, p, 3.0 * c3);
        if (p + 1 < n) A.set(p, p + 1, -3.0 * c3 + c1);
        if (p + 2 < n) A.set(p, p + 2, c3);
    }
    return A;
}

GridFunction init_cell_average(const std::function<double(double)>& u0, int J, double L) {
    GridFunction g = make_grid(L, J);
    const double dx = L / J;
    const double off = 0.5 * dx * std::sqrt(3.0 / 5.0);
    for (int j = 1; j <= J - 2; ++j) {
        double xj = j * dx;
        g.values[j] = (5.0 * u0(xj - off) + 8.0 * u0(xj) + 5.0 * u0(xj + off)) / 18.0;
    }
    // Entries 0, J-1, J belong to the constrained space and stay zero.
    return g;
}

double sim_energy(const GridFunction& u) {
    double acc = 0.0;
    for (double v : u.values) acc += v * v;
    return std::sqrt(u.dx() * acc);
}

std::function<double(double)> make_profile(const std::string& name, double amplitude, double L) {
    if (name == "zero") return [](double) { return 0.0; };
    if (name == "one_minus_cos") {
        const double k = 2.0 * M_PI / L;
        return [amplitude, k](double x) { return amplitude * (1.0 - std::cos(k * x)); };
    }
    if (name == "gaussian") {
        const double c = L / 2.0, s = L / 10.0;
        return [amplitude, c, s](double x) {
            double z = (x - c) / s;
            return amplitude * std::exp(-z * z);
        };
    }
    throw std::invalid_argument("make_profile: unknown profile '" + name + "'");
}

SimTrace simulate(const SchemeConfig& cfg, const std::function<double(double)>& u0,
                  const PseudoKernel* kernel) {
    if (cfg.J < 8) throw std::invalid_argument("simulate: J must be >= 8");
    if (!(cfg.L > 0.0)) throw std::invalid_argument("simulate: L must be > 0");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
    if (cfg.n_steps < 1) throw std::invalid_argument("simulate: n_steps must be >= 1");
    if (cfg.lambda < 0.0) throw std::invalid_argument("simulate: lambda must be >= 0");
    if (cfg.m_succession < 1) throw std::invalid_argument("simulate: m_succession must be >= 1");

    const bool controlled = cfg.mode != SimMode::uncontrolled;
    if (controlled) {
        if (!kernel) throw std::invalid_argument("simulate: controlled modes require a kernel");
        if (std::abs(kernel->lambda - cfg.lambda) > 1e-9 * std::max(1.0, cfg.lambda) ||
            std::abs(kernel->L - cfg.L) > 1e-9 * cfg.L)
            throw std::invalid_argument("simulate: kernel (lambda, L) must match the config");
    }

    const int J = cfg.J;
    const double dx = cfg.L / J;
    const bool target_mode =
        cfg.mode == SimMode::controlled2 || cfg.mode == SimMode::nonlinear_controlled2;
    const double lam_march = target_mode ? cfg.lambda : 0.0;

    // C = (1 + dt lambda) I + dt A, factored once.
    BandedMatrix A = build_A(J, dx);
    BandedMatrix C(J - 2, 1, 2);
    for (int p = 0; p < J - 2; ++p)
        for (int q = std::max(0, p - 1); q <= std::min(J - 3, p + 2); ++q) {
            double v = cfg.dt * A.at(p, q);
            if (p == q) v += 1.0 + cfg.dt * lam_march;
            C.set(p, q, v);
        }
    BandedLU lu(C);

    StepWorkspace ws;
    ws.J = J;
    ws.dx = dx;
    ws.dt = cfg.dt;
    ws.lu = &lu;
    ws.gain.assign(J + 1, 0.0);
    ws.interior.assign(J - 2, 0.0);

    std::vector<double> kL_samples, kxL_samples;
    DiscreteK Kd;
    if (controlled) {
        kL_samples = sample_poly(trace_kL(*kernel), J, dx);
        kxL_samples = sample_poly(trace_kxL(*kernel), J, dx);
        if (target_mode) {
            ws.gain = sample_poly(trace_ky0(*kernel), J, dx);
            Kd = DiscreteK::from_kernel(*kernel, J);
        }
    }

    // State: the marched grid function. Target modes march w~; plant modes
    // march u itself.
    GridFunction u0grid = init_cell_average(u0, J, cfg.L);
    std::vector<double> state;
    if (target_mode) {
        GridFunction w0 = forward(Kd, u0grid);
        w0.values[0] = 0.0;
        w0.values[J - 1] = 0.0;
        w0.values[J] = 0.0;
        state = w0.values;
    } else {
        state = u0grid.values;
    }

    SimTrace trace;
    trace.times.reserve(cfg.n_steps + 1);
    trace.energy.reserve(cfg.n_steps + 1);
    trace.u_left_deriv.reserve(cfg.n_steps + 1);
    trace.dirichlet_U.reserve(cfg.n_steps + 1);
    trace.neumann_V.reserve(cfg.n_steps + 1);

    std::set<int> snapshot_steps;
    if (cfg.snapshot_count == 1) {
        snapshot_steps.insert(cfg.n_steps);
    } else if (cfg.snapshot_count > 1) {
        for (int i = 0; i < cfg.snapshot_count; ++i)
            snapshot_steps.insert(
                (int)std::lround((double)i * cfg.n_steps / (cfg.snapshot_count - 1)));
    }

    GridFunction u = make_grid(cfg.L, J);
    double initial_energy = -1.0;

    auto record = [&](int n) {
        const double t = n * cfg.dt;
        if (target_mode) {
            GridFunction w = make_grid(cfg.L, J);
            w.values = state;
            SuccessionResult rec =
                inverse_succession_adaptive(Kd, w, 1e-10, cfg.m_succession);
            u.values = std::move(rec.u.values);
        } else {
            u.values = state;
        }
        double E = sim_energy(u);
        if (initial_energy < 0.0) initial_energy = E;
        if (initial_energy > 0.0 && E > 1e6 * initial_energy)
            throw BlowupError("simulate: energy exceeded 1e6 x initial at t = " +
                              std::to_string(t));
        trace.times.push_back(t);
        trace.energy.push_back(E);
        trace.u_left_deriv.push_back(state[1] / dx);
        trace.dirichlet_U.push_back(controlled ? quad_against(kL_samples, u) : 0.0);
        trace.neumann_V.push_back(controlled ? quad_against(kxL_samples, u) : 0.0);
        if (snapshot_steps.count(n)) trace.snapshots.emplace_back(t, u);
    };

    record(0);

    const double c3 = 1.0 / (dx * dx * dx);
    const double c1 = 1.0 / (2.0 * dx);

    for (int n = 1; n <= cfg.n_steps; ++n) {
        switch (cfg.mode) {
            case SimMode::uncontrolled:
            case SimMode::controlled2:
                step_target(state, ws, nullptr);
                break;

            case SimMode::controlled1: {
                // Lagged Dirichlet feedback with a discrete homogeneous
                // Neumann condition: u_{J-1} = u_J = U computed from the
                // previous state. The stencil terms that reference those
                // entries move to the right-hand side.
                GridFunction cur = make_grid(cfg.L, J);
                cur.values = state;
                const double U = quad_against(kL_samples, cur);
                const int nint = J - 2;
                for (int p = 0; p < nint; ++p) ws.interior[p] = state[p + 1];
                // Row j = J-3 sees u_{J-1} through the w_{j+2} coefficient.
                ws.interior[nint - 2] -= cfg.dt * c3 * U;
                // Row j = J-2 sees u_{J-1} (w_{j+1}) and u_J (w_{j+2}).
                ws.interior[nint - 1] -= cfg.dt * ((-3.0 * c3 + c1) * U + c3 * U);
                lu.solve_inplace(ws.interior);
                for (int p = 0; p < nint; ++p) state[p + 1] = ws.interior[p];
                state[0] = 0.0;
                state[J - 1] = U;
                state[J] = U;
                break;
            }

            case SimMode::nonlinear_controlled2: {
                // Fixed point on w^{n+1}: the linear implicit step plus the
                // transformed nonlinearity (I - K)[u u_x] evaluated at the
                // current iterate, lagged inside the step.
                const int nint = J - 2;
                const double w1 = state[1];
                std::vector<double> base(nint);
                for (int p = 0; p < nint; ++p)
                    base[p] = state[p + 1] + (cfg.dt / dx) * ws.gain[p + 1] * w1;

                std::vector<double> w_iter = base;
                lu.solve_inplace(w_iter); // linear predictor
                GridFunction w_full = make_grid(cfg.L, J);
                bool converged = false;
                for (int it = 0; it < 25; ++it) {
                    std::fill(w_full.values.begin(), w_full.values.end(), 0.0);
                    for (int p = 0; p < nint; ++p) w_full.values[p + 1] = w_iter[p];
                    SuccessionResult rec =
                        inverse_succession_adaptive(Kd, w_full, 1e-10, cfg.m_succession);
                    std::vector<double> du = centered_derivative(rec.u.values, dx);
                    GridFunction z = make_grid(cfg.L, J);
                    for (int j = 0; j <= J; ++j) z.values[j] = rec.u.values[j] * du[j];
                    GridFunction Nz = forward(Kd, z);

                    std::vector<double> next(nint);
                    for (int p = 0; p < nint; ++p)
                        next[p] = base[p] - cfg.dt * Nz.values[p + 1];
                    lu.solve_inplace(next);

                    double inc = 0.0;
                    for (int p = 0; p < nint; ++p)
                        inc += (next[p] - w_iter[p]) * (next[p] - w_iter[p]);
                    inc = std::sqrt(dx * inc);
                    w_iter = std::move(next);
                    if (inc < 1e-10) {
                        converged = true;
                        break;
                    }
                }
                if (!converged)
                    throw NoConvergenceError(
                        "simulate: nonlinear fixed point did not converge at t = " +
                        std::to_string(n * cfg.dt));
                for (int p = 0; p < nint; ++p) state[p + 1] = w_iter[p];
                state[0] = 0.0;
                state[J - 1] = 0.0;
                state[J] = 0.0;
                break;
            }
        }
        record(n);
    }
    return trace;
}

double fit_decay_rate(const SimTrace& trace, double t_start, double t_end) {
    if (!(t_start < t_end)) throw std::invalid_argument("fit_decay_rate: empty window");
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        double t = trace.times[i];
        if (t < t_start || t > t_end) continue;
        double E = trace.energy[i];
        if (!(E > 0.0))
            throw std::invalid_argument("fit_decay_rate: nonpositive energy in window");
        double y = std::log(E);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_decay_rate: fewer than two samples in window");
    double denom = n * stt - st * st;
    if (denom == 0.0) throw std::invalid_argument("fit_decay_rate: degenerate window");
    return -(n * sty - st * sy) / denom;
}

} // namespace kdvbs
