#include "transform.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace kdvbs {

namespace {

void check_shapes(const DiscreteK& Kd, const GridFunction& u, const char* who) {
    if (u.J != Kd.J || (int)u.values.size() != Kd.J + 1 || u.L != Kd.L)
        throw std::invalid_argument(std::string(who) + ": grid/operator shape mismatch");
}

} // namespace

GridFunction make_grid(double L, int J) {
    if (J < 4) throw std::invalid_argument("make_grid: J must be >= 4");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: L must be > 0");
    GridFunction g;
    g.L = L;
    g.J = J;
    g.values.assign(J + 1, 0.0);
    return g;
}

double grid_norm(const GridFunction& u) {
    const double dx = u.dx();
    double acc = 0.0;
    for (int j = 0; j <= u.J; ++j) {
        double w = (j == 0 || j == u.J) ? 0.5 : 1.0;
        acc += w * u.values[j] * u.values[j];
    }
    return std::sqrt(dx * acc);
}

DiscreteK DiscreteK::from_function(double L, int J,
                                   const std::function<double(double, double)>& k) {
    if (J < 4) throw std::invalid_argument("DiscreteK: J must be >= 4");
    if (!(L > 0.0)) throw std::invalid_argument("DiscreteK: L must be > 0");
    DiscreteK Kd;
    Kd.L = L;
    Kd.J = J;
    Kd.weights.assign(static_cast<std::size_t>(J + 1) * (J + 1), 0.0);
    const double dx = L / J;
    for (int j = 1; j <= J; ++j) {
        const double xj = j * dx;
        for (int i = 0; i <= j; ++i) {
            double w = (i == 0 || i == j) ? 0.5 * dx : dx;
            Kd.weights[static_cast<std::size_t>(j) * (J + 1) + i] = w * k(xj, i * dx);
        }
    }
    return Kd;
}

DiscreteK DiscreteK::from_kernel(const PseudoKernel& K, int J) {
    return from_function(K.L, J, [&K](double x, double y) { return kernel_value(K, x, y); });
}

GridFunction DiscreteK::apply(const GridFunction& u) const {
    check_shapes(*this, u, "DiscreteK::apply");
    GridFunction out = u;
    for (int j = 0; j <= J; ++j) {
        double acc = 0.0;
        const double* row = &weights[static_cast<std::size_t>(j) * (J + 1)];
        for (int i = 0; i <= j; ++i) acc += row[i] * u.values[i];
        out.values[j] = acc;
    }
    return out;
}

GridFunction forward(const DiscreteK& Kd, const GridFunction& u) {
    check_shapes(Kd, u, "forward");
    GridFunction Ku = Kd.apply(u);
    GridFunction out = u;
    for (int j = 0; j <= u.J; ++j) out.values[j] = u.values[j] - Ku.values[j];
    return out;
}

GridFunction inverse_direct(const DiscreteK& Kd, const GridFunction& psi) {
    check_shapes(Kd, psi, "inverse_direct");
    const int J = Kd.J;
    GridFunction u = psi;
    for (int j = 0; j <= J; ++j) {
        const double* row = &Kd.weights[static_cast<std::size_t>(j) * (J + 1)];
        double acc = psi.values[j];
        for (int i = 0; i < j; ++i) acc += row[i] * u.values[i];
        const double diag = 1.0 - row[j];
        if (diag == 0.0) throw std::runtime_error("inverse_direct: singular diagonal");
        u.values[j] = acc / diag;
    }
    return u;
}

namespace {

SuccessionResult run_succession(const DiscreteK& Kd, const GridFunction& psi, int m_max,
                                double tol) {
    GridFunction v = Kd.apply(psi); // v^0
    GridFunction prev = v;
    int used = 0;
    double increment = grid_norm(v);
    for (int k = 1; k <= m_max; ++k) {
        GridFunction arg = psi;
        for (int j = 0; j <= psi.J; ++j) arg.values[j] += v.values[j];
        GridFunction next = Kd.apply(arg);
        GridFunction diff = next;
        for (int j = 0; j <= psi.J; ++j) diff.values[j] -= v.values[j];
        increment = grid_norm(diff);
        v = std::move(next);
        used = k;
        if (tol > 0.0 && increment < tol) break;
    }
    SuccessionResult r;
    r.u = psi;
    for (int j = 0; j <= psi.J; ++j) r.u.values[j] += v.values[j];
    r.iterations = used;
    r.last_increment = increment;
    return r;
}

} // namespace

SuccessionResult inverse_succession(const DiscreteK& Kd, const GridFunction& psi, int m) {
    check_shapes(Kd, psi, "inverse_succession");
    if (m < 1) throw std::invalid_argument("inverse_succession: m must be >= 1");
    return run_succession(Kd, psi, m, 0.0);
}

SuccessionResult inverse_succession_adaptive(const DiscreteK& Kd, const GridFunction& psi,
                                             double tol, int m_max) {
    check_shapes(Kd, psi, "inverse_succession_adaptive");
    if (!(tol > 0.0)) throw std::invalid_argument("inverse_succession_adaptive: tol must be > 0");
    if (m_max < 1) throw std::invalid_argument("inverse_succession_adaptive: m_max must be >= 1");
    return run_succession(Kd, psi, m_max, tol);
}

double invnorm_estimate(const DiscreteK& Kd) {
    const int n = Kd.J + 1;
    const double dx = Kd.L / Kd.J;

    // Dense inverse of (I - Kd) by forward substitution against unit vectors,
    // conjugated with the square root of the quadrature weights so the
    // singular value measures the discrete L2 operator norm.
    Eigen::MatrixXd inv(n, n);
    GridFunction e = make_grid(Kd.L, Kd.J);
    for (int c = 0; c < n; ++c) {
        std::fill(e.values.begin(), e.values.end(), 0.0);
        e.values[c] = 1.0;
        GridFunction col = inverse_direct(Kd, e);
        for (int r = 0; r < n; ++r) inv(r, c) = col.values[r];
    }
    Eigen::VectorXd sqrtw(n);
    for (int j = 0; j < n; ++j) {
        double w = (j == 0 || j == Kd.J) ? 0.5 * dx : dx;
        sqrtw(j) = std::sqrt(w);
    }
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) inv(r, c) *= sqrtw(r) / sqrtw(c);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(inv);
    return svd.singularValues()(0);
}

} // namespace kdvbs
