// extern-C shim over the C++ core: opaque handles, status codes, and a
// thread-local error message. No exception may cross this boundary.
#include "kdvbs/kdvbs.h"

#include "kdvbs/errors.hpp"
#include "kdvbs/kernel.hpp"
#include "kdvbs/simulator.hpp"
#include "kdvbs/spectral.hpp"
#include "kdvbs/transform.hpp"
#include "kdvbs/version.hpp"

#include <cstring>
#include <new>
#include <string>
#include <utility>

struct kdvbs_kernel {
    kdvbs::PseudoKernel K;
};

struct kdvbs_sim_trace {
    kdvbs::SimTrace trace;
};

struct kdvbs_eig_list {
    std::vector<kdvbs::EigRecord> records;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : ""; }

template <typename Fn>
kdvbs_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return KDVBS_OK;
    } catch (const kdvbs::NoConvergenceError& e) {
        set_error(e.what());
        return KDVBS_NO_CONVERGENCE;
    } catch (const kdvbs::BlowupError& e) {
        set_error(e.what());
        return KDVBS_BLOWUP;
    } catch (const std::domain_error& e) {
        set_error(e.what());
        return KDVBS_DOMAIN_ERROR;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return KDVBS_INVALID_ARGUMENT;
    } catch (const std::bad_alloc& e) {
        set_error(e.what());
        return KDVBS_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        set_error(e.what());
        return KDVBS_INTERNAL_ERROR;
    } catch (...) {
        set_error("unknown failure");
        return KDVBS_INTERNAL_ERROR;
    }
}

kdvbs_status null_arg(const char* what) {
    set_error(what);
    return KDVBS_INVALID_ARGUMENT;
}

// Builds the grid holder for a raw (J+1)-sample array.
kdvbs::GridFunction wrap_samples(double L, int J, const double* data) {
    kdvbs::GridFunction g = kdvbs::make_grid(L, J);
    for (int j = 0; j <= J; ++j) g.values[static_cast<size_t>(j)] = data[j];
    return g;
}

} // namespace

extern "C" {

const char* kdvbs_last_error(void) { return g_last_error.c_str(); }

const char* kdvbs_version(void) { return KDVBS_VERSION_STRING; }

void kdvbs_string_free(char* s) { delete[] s; }

/* ------------------------------------------------------------------ kernel */

kdvbs_status kdvbs_kernel_build(double lambda, double length, double tol,
                                int n_max, kdvbs_kernel** out) {
    if (!out) return null_arg("kdvbs_kernel_build: out is NULL");
    *out = nullptr;
    return guarded([&] {
        auto handle = new kdvbs_kernel{kdvbs::build_kernel(lambda, length, tol, n_max)};
        *out = handle;
    });
}

void kdvbs_kernel_free(kdvbs_kernel* k) { delete k; }

kdvbs_status kdvbs_kernel_value(const kdvbs_kernel* k, double x, double y,
                                double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_value: NULL argument");
    return guarded([&] { *out = kdvbs::kernel_value(k->K, x, y); });
}

kdvbs_status kdvbs_kernel_dx(const kdvbs_kernel* k, double x, double y,
                             double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_dx: NULL argument");
    return guarded([&] { *out = kdvbs::kernel_dx(k->K, x, y); });
}

kdvbs_status kdvbs_kernel_dy(const kdvbs_kernel* k, double x, double y,
                             double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_dy: NULL argument");
    return guarded([&] { *out = kdvbs::kernel_dy(k->K, x, y); });
}

kdvbs_status kdvbs_kernel_diag(const kdvbs_kernel* k, int* n_terms,
                               double* tail_bound, double* tail_deriv_bound,
                               double* residual_bound) {
    if (!k) return null_arg("kdvbs_kernel_diag: kernel is NULL");
    if (n_terms) *n_terms = k->K.n_terms;
    if (tail_bound) *tail_bound = k->K.tail_bound;
    if (tail_deriv_bound) *tail_deriv_bound = k->K.tail_deriv_bound;
    if (residual_bound) *residual_bound = k->K.residual_bound;
    g_last_error.clear();
    return KDVBS_OK;
}

kdvbs_status kdvbs_kernel_alpha(const kdvbs_kernel* k, double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_alpha: NULL argument");
    return guarded([&] { *out = kdvbs::alpha(k->K); });
}

kdvbs_status kdvbs_kernel_invnorm(const kdvbs_kernel* k, int grid_J,
                                  double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_invnorm: NULL argument");
    return guarded([&] {
        kdvbs::DiscreteK Kd = kdvbs::DiscreteK::from_kernel(k->K, grid_J);
        *out = kdvbs::invnorm_estimate(Kd);
    });
}

kdvbs_status kdvbs_kernel_beta(const kdvbs_kernel* k, int grid_J, double* out) {
    if (!k || !out) return null_arg("kdvbs_kernel_beta: NULL argument");
    return guarded([&] {
        kdvbs::DiscreteK Kd = kdvbs::DiscreteK::from_kernel(k->K, grid_J);
        *out = kdvbs::beta(k->K, kdvbs::invnorm_estimate(Kd));
    });
}

kdvbs_status kdvbs_kernel_json(const kdvbs_kernel* k, char** out) {
    if (!k || !out) return null_arg("kdvbs_kernel_json: NULL argument");
    *out = nullptr;
    return guarded([&] {
        const std::string text = kdvbs::dump_kernel_json(k->K);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
    });
}

/* --------------------------------------------------------------- transform */

kdvbs_status kdvbs_transform_forward(const kdvbs_kernel* k, int grid_J,
                                     const double* u, double* w) {
    if (!k || !u || !w) return null_arg("kdvbs_transform_forward: NULL argument");
    return guarded([&] {
        kdvbs::DiscreteK Kd = kdvbs::DiscreteK::from_kernel(k->K, grid_J);
        kdvbs::GridFunction res =
            kdvbs::forward(Kd, wrap_samples(k->K.L, grid_J, u));
        for (int j = 0; j <= grid_J; ++j) w[j] = res.values[static_cast<size_t>(j)];
    });
}

kdvbs_status kdvbs_transform_inverse(const kdvbs_kernel* k, int grid_J,
                                     const double* w, double* u,
                                     int m_succession, int* iterations_out) {
    if (!k || !w || !u) return null_arg("kdvbs_transform_inverse: NULL argument");
    if (m_succession < 0)
        return null_arg("kdvbs_transform_inverse: m_succession must be >= 0");
    return guarded([&] {
        kdvbs::DiscreteK Kd = kdvbs::DiscreteK::from_kernel(k->K, grid_J);
        const kdvbs::GridFunction psi = wrap_samples(k->K.L, grid_J, w);
        kdvbs::SuccessionResult res =
            (m_succession == 0)
                ? kdvbs::inverse_succession_adaptive(Kd, psi)
                : kdvbs::inverse_succession(Kd, psi, m_succession);
        for (int j = 0; j <= grid_J; ++j) u[j] = res.u.values[static_cast<size_t>(j)];
        if (iterations_out) *iterations_out = res.iterations;
    });
}

/* -------------------------------------------------------------- simulation */

kdvbs_status kdvbs_simulate(const kdvbs_sim_config* cfg,
                            const kdvbs_kernel* k_or_null,
                            const char* profile, double amplitude,
                            kdvbs_sim_trace** out) {
    if (!cfg || !profile || !out) return null_arg("kdvbs_simulate: NULL argument");
    *out = nullptr;
    if (cfg->mode < KDVBS_MODE_CONTROLLED2 ||
        cfg->mode > KDVBS_MODE_NONLINEAR_CONTROLLED2)
        return null_arg("kdvbs_simulate: unknown mode");
    if (cfg->n_steps < 1 || cfg->n_steps > 1000000000L)
        return null_arg("kdvbs_simulate: n_steps out of range");
    return guarded([&] {
        kdvbs::SchemeConfig sc;
        sc.L = cfg->length;
        sc.J = cfg->grid_J;
        sc.dt = cfg->dt;
        sc.n_steps = static_cast<int>(cfg->n_steps);
        sc.lambda = cfg->lambda;
        sc.mode = static_cast<kdvbs::SimMode>(cfg->mode);
        sc.m_succession = cfg->m_succession;
        sc.snapshot_count = cfg->snapshot_count;
        auto u0 = kdvbs::make_profile(profile, amplitude, cfg->length);
        auto handle = new kdvbs_sim_trace{
            kdvbs::simulate(sc, u0, k_or_null ? &k_or_null->K : nullptr)};
        *out = handle;
    });
}

void kdvbs_sim_trace_free(kdvbs_sim_trace* t) { delete t; }

size_t kdvbs_trace_len(const kdvbs_sim_trace* t) {
    return t ? t->trace.times.size() : 0;
}

kdvbs_status kdvbs_trace_row(const kdvbs_sim_trace* t, size_t i, double* time,
                             double* energy, double* u_left_deriv,
                             double* dirichlet_U, double* neumann_V) {
    if (!t) return null_arg("kdvbs_trace_row: trace is NULL");
    if (i >= t->trace.times.size())
        return null_arg("kdvbs_trace_row: row out of range");
    if (time) *time = t->trace.times[i];
    if (energy) *energy = t->trace.energy[i];
    if (u_left_deriv) *u_left_deriv = t->trace.u_left_deriv[i];
    if (dirichlet_U) *dirichlet_U = t->trace.dirichlet_U[i];
    if (neumann_V) *neumann_V = t->trace.neumann_V[i];
    g_last_error.clear();
    return KDVBS_OK;
}

size_t kdvbs_trace_snapshot_count(const kdvbs_sim_trace* t) {
    return t ? t->trace.snapshots.size() : 0;
}

kdvbs_status kdvbs_trace_snapshot(const kdvbs_sim_trace* t, size_t s,
                                  double* time, double* values,
                                  size_t values_len) {
    if (!t) return null_arg("kdvbs_trace_snapshot: trace is NULL");
    if (s >= t->trace.snapshots.size())
        return null_arg("kdvbs_trace_snapshot: snapshot out of range");
    const auto& [st, grid] = t->trace.snapshots[s];
    if (time) *time = st;
    if (values) {
        if (values_len < grid.values.size())
            return null_arg("kdvbs_trace_snapshot: values buffer too small");
        for (size_t j = 0; j < grid.values.size(); ++j) values[j] = grid.values[j];
    }
    g_last_error.clear();
    return KDVBS_OK;
}

kdvbs_status kdvbs_fit_decay_rate(const kdvbs_sim_trace* t, double t0,
                                  double t1, double* out) {
    if (!t || !out) return null_arg("kdvbs_fit_decay_rate: NULL argument");
    return guarded([&] { *out = kdvbs::fit_decay_rate(t->trace, t0, t1); });
}

/* ---------------------------------------------------------------- spectral */

kdvbs_status kdvbs_char_det(double lam_re, double lam_im, double length,
                            double* out_re, double* out_im) {
    if (!out_re || !out_im) return null_arg("kdvbs_char_det: NULL output");
    return guarded([&] {
        const std::complex<double> d =
            kdvbs::char_det(std::complex<double>(lam_re, lam_im), length);
        *out_re = d.real();
        *out_im = d.imag();
    });
}

kdvbs_status kdvbs_spectral_solve(double length, int k_min, int k_max,
                                  double tol, kdvbs_eig_list** out) {
    if (!out) return null_arg("kdvbs_spectral_solve: out is NULL");
    *out = nullptr;
    return guarded([&] {
        auto handle = new kdvbs_eig_list{
            kdvbs::find_eigenvalues(length, k_min, k_max, tol)};
        *out = handle;
    });
}

void kdvbs_eig_list_free(kdvbs_eig_list* l) { delete l; }

size_t kdvbs_eig_count(const kdvbs_eig_list* l) {
    return l ? l->records.size() : 0;
}

kdvbs_status kdvbs_eig_get(const kdvbs_eig_list* l, size_t i, int* k,
                           double* lam_re, double* lam_im, double* residual,
                           double* ratio) {
    if (!l) return null_arg("kdvbs_eig_get: list is NULL");
    if (i >= l->records.size()) return null_arg("kdvbs_eig_get: index out of range");
    const kdvbs::EigRecord& r = l->records[i];
    if (k) *k = r.k;
    if (lam_re) *lam_re = r.lam.real();
    if (lam_im) *lam_im = r.lam.imag();
    if (residual) *residual = r.residual;
    if (ratio) *ratio = r.ratio;
    g_last_error.clear();
    return KDVBS_OK;
}

kdvbs_status kdvbs_spectral_abscissa(const kdvbs_eig_list* l, double* out) {
    if (!l || !out) return null_arg("kdvbs_spectral_abscissa: NULL argument");
    return guarded([&] { *out = kdvbs::spectral_abscissa(l->records); });
}

} // extern "C"
