#ifndef KDVBS_H
#define KDVBS_H

/* C interface to the KdV boundary-stabilization library: truncated
 * pseudo-kernel construction with certified decay rates, discrete Volterra
 * transforms, implicit finite-difference simulation of the controlled and
 * uncontrolled plants, and the spectral solver for the simplified third-order
 * operator.
 *
 * All functions return a kdvbs_status; on any failure the thread-local
 * message from kdvbs_last_error() describes the cause. Objects returned
 * through ** out-parameters are owned by the caller and released with the
 * matching _free function. Passing NULL where an object or output pointer is
 * required yields KDVBS_INVALID_ARGUMENT.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kdvbs_status {
    KDVBS_OK = 0,
    KDVBS_INVALID_ARGUMENT = 1, /* bad parameter or NULL pointer */
    KDVBS_DOMAIN_ERROR = 2,     /* evaluation outside the admissible domain */
    KDVBS_NO_CONVERGENCE = 3,   /* iteration failed to converge */
    KDVBS_BLOWUP = 4,           /* simulated energy exceeded the safety bound */
    KDVBS_IO_ERROR = 5,         /* file could not be written or read */
    KDVBS_INTERNAL_ERROR = 6    /* unexpected failure */
} kdvbs_status;

/* Simulation plant/feedback selection (mirrors the library's SimMode). */
typedef enum kdvbs_sim_mode {
    KDVBS_MODE_CONTROLLED2 = 0,           /* two-controller target march */
    KDVBS_MODE_UNCONTROLLED = 1,          /* plain plant, no feedback */
    KDVBS_MODE_CONTROLLED1 = 2,           /* single lagged Dirichlet controller */
    KDVBS_MODE_NONLINEAR_CONTROLLED2 = 3  /* target march with the quadratic term */
} kdvbs_sim_mode;

typedef struct kdvbs_kernel kdvbs_kernel;
typedef struct kdvbs_sim_trace kdvbs_sim_trace;
typedef struct kdvbs_eig_list kdvbs_eig_list;

/* Thread-local message for the most recent failure in this thread. Never
 * NULL; empty string when no failure has occurred. */
const char* kdvbs_last_error(void);

/* Library version, e.g. "0.1.0". */
const char* kdvbs_version(void);

/* Releases a string returned by this library (kdvbs_kernel_json). */
void kdvbs_string_free(char* s);

/* ------------------------------------------------------------------ kernel */

/* Builds the truncated pseudo-kernel for decay parameter lambda > 0 on
 * (0, length). The series is truncated adaptively: tol is the relative tail
 * target, n_max the iteration cap (KDVBS_NO_CONVERGENCE when exceeded). */
kdvbs_status kdvbs_kernel_build(double lambda, double length, double tol,
                                int n_max, kdvbs_kernel** out);
void kdvbs_kernel_free(kdvbs_kernel* k);

/* Pointwise kernel and first derivatives on the closed triangle
 * 0 <= y <= x <= length (KDVBS_DOMAIN_ERROR outside). */
kdvbs_status kdvbs_kernel_value(const kdvbs_kernel* k, double x, double y,
                                double* out);
kdvbs_status kdvbs_kernel_dx(const kdvbs_kernel* k, double x, double y,
                             double* out);
kdvbs_status kdvbs_kernel_dy(const kdvbs_kernel* k, double x, double y,
                             double* out);

/* Build metadata: number of summed iterates and the certified bounds. Any
 * output pointer may be NULL to skip that field. */
kdvbs_status kdvbs_kernel_diag(const kdvbs_kernel* k, int* n_terms,
                               double* tail_bound, double* tail_deriv_bound,
                               double* residual_bound);

/* Certified two-controller decay rate alpha. */
kdvbs_status kdvbs_kernel_alpha(const kdvbs_kernel* k, double* out);

/* Operator norm estimate of the inverse transform on a J-point grid. */
kdvbs_status kdvbs_kernel_invnorm(const kdvbs_kernel* k, int grid_J,
                                  double* out);

/* Single-controller rate beta = alpha - ||k_x(L,.)||^2 invnorm^2 / 2, with
 * invnorm estimated on a J-point grid. May be negative. */
kdvbs_status kdvbs_kernel_beta(const kdvbs_kernel* k, int grid_J, double* out);

/* Deterministic JSON dump of the kernel (coefficients, bounds, rates).
 * The string is allocated by the library; release with kdvbs_string_free. */
kdvbs_status kdvbs_kernel_json(const kdvbs_kernel* k, char** out);

/* --------------------------------------------------------------- transform */

/* Applies the forward transform (I - K) to u sampled on the uniform J-point
 * grid (arrays hold J+1 values, endpoints included). */
kdvbs_status kdvbs_transform_forward(const kdvbs_kernel* k, int grid_J,
                                     const double* u, double* w);

/* Inverts (I - K) by successive approximation. m_succession > 0 runs exactly
 * that many sweeps; m_succession = 0 iterates adaptively to tolerance 1e-10.
 * iterations_out (optional) receives the sweep count. */
kdvbs_status kdvbs_transform_inverse(const kdvbs_kernel* k, int grid_J,
                                     const double* w, double* u,
                                     int m_succession, int* iterations_out);

/* -------------------------------------------------------------- simulation */

typedef struct kdvbs_sim_config {
    double length;       /* domain length L > 0 */
    int grid_J;          /* number of cells, >= 8 */
    double dt;           /* time step > 0 */
    long n_steps;        /* number of steps >= 1 */
    double lambda;       /* decay parameter (target modes) */
    int mode;            /* kdvbs_sim_mode */
    int m_succession;    /* succession sweeps for reconstruction, >= 1 */
    int snapshot_count;  /* stored profiles, >= 2 */
} kdvbs_sim_config;

/* Runs the implicit march from the named initial profile ("zero",
 * "one_minus_cos", "gaussian") scaled by amplitude. Controlled modes require
 * a kernel whose (lambda, length) match the config. */
kdvbs_status kdvbs_simulate(const kdvbs_sim_config* cfg,
                            const kdvbs_kernel* k_or_null,
                            const char* profile, double amplitude,
                            kdvbs_sim_trace** out);
void kdvbs_sim_trace_free(kdvbs_sim_trace* t);

/* Number of recorded steps (n_steps + 1 rows including t = 0). */
size_t kdvbs_trace_len(const kdvbs_sim_trace* t);

/* Per-step scalars at row i. Any output pointer may be NULL. */
kdvbs_status kdvbs_trace_row(const kdvbs_sim_trace* t, size_t i, double* time,
                             double* energy, double* u_left_deriv,
                             double* dirichlet_U, double* neumann_V);

/* Stored profiles: count, then time and J+1 values of snapshot s. */
size_t kdvbs_trace_snapshot_count(const kdvbs_sim_trace* t);
kdvbs_status kdvbs_trace_snapshot(const kdvbs_sim_trace* t, size_t s,
                                  double* time, double* values,
                                  size_t values_len);

/* Least-squares exponential decay rate of the energy trace on [t0, t1]. */
kdvbs_status kdvbs_fit_decay_rate(const kdvbs_sim_trace* t, double t0,
                                  double t1, double* out);

/* ---------------------------------------------------------------- spectral */

/* Characteristic determinant of the simplified operator (overflow-guarded
 * scaling; zeros are the eigenvalues). lam = 0 is rejected. */
kdvbs_status kdvbs_char_det(double lam_re, double lam_im, double length,
                            double* out_re, double* out_im);

/* Locates eigenvalues k_min..k_max at the given residual tolerance. Indices
 * that fail to converge are skipped (inspect the count). */
kdvbs_status kdvbs_spectral_solve(double length, int k_min, int k_max,
                                  double tol, kdvbs_eig_list** out);
void kdvbs_eig_list_free(kdvbs_eig_list* l);

size_t kdvbs_eig_count(const kdvbs_eig_list* l);

/* Record i: ladder index k, eigenvalue, residual |det|, modulus ratio to the
 * asymptotic prediction. Any output pointer may be NULL. */
kdvbs_status kdvbs_eig_get(const kdvbs_eig_list* l, size_t i, int* k,
                           double* lam_re, double* lam_im, double* residual,
                           double* ratio);

/* max Re(lam) over the list (strictly negative for valid spectra). */
kdvbs_status kdvbs_spectral_abscissa(const kdvbs_eig_list* l, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* KDVBS_H */
