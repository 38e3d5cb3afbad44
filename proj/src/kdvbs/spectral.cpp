#include "kdvbs/spectral.hpp"

#include "kdvbs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>

namespace kdvbs {

namespace {

using cplx = std::complex<double>;

// Ordered pairs (i, j) of the alternating sum with their signs:
// a_12 = a_20 = a_01 = +1, a_21 = a_02 = a_10 = -1.
struct Pair { int i, j; double sign; };
constexpr Pair kPairs[6] = {
    {1, 2, +1.0}, {2, 0, +1.0}, {0, 1, +1.0},
    {2, 1, -1.0}, {0, 2, -1.0}, {1, 0, -1.0},
};

void cube_roots(cplx lam, cplx out[3]) {
    const cplx alpha = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    cplx base = std::pow(-lam, 1.0 / 3.0);
    // Prefer the label whose base root lies in the closed first quadrant.
    cplx cand = base;
    for (int i = 0; i < 3; ++i) {
        if (cand.real() >= 0.0 && cand.imag() >= 0.0) { base = cand; break; }
        cand *= alpha;
    }
    out[0] = base;
    out[1] = alpha * base;
    out[2] = alpha * alpha * base;
}

} // namespace

std::complex<double> char_det(cplx lam, double L) {
    if (!(L > 0.0)) throw std::invalid_argument("char_det: L must be > 0");
    if (lam == cplx(0.0, 0.0))
        throw std::invalid_argument("char_det: lam = 0 degenerates the roots");

    cplx r[3];
    cube_roots(lam, r);

    cplx expo[6];
    double guard = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < 6; ++p) {
        expo[p] = (r[kPairs[p].i] + r[kPairs[p].j]) * L;
        guard = std::max(guard, expo[p].real());
    }

    cplx sum(0.0, 0.0);
    for (int p = 0; p < 6; ++p) {
        const cplx ri = r[kPairs[p].i];
        const cplx rj = r[kPairs[p].j];
        sum += kPairs[p].sign * ri * (1.0 - rj * rj) * std::exp(expo[p] - guard);
    }
    return sum;
}

double asymptotic_modulus(int k, double L) {
    if (k < 1) throw std::invalid_argument("asymptotic_modulus: k must be >= 1");
    if (!(L > 0.0)) throw std::invalid_argument("asymptotic_modulus: L must be > 0");
    const double pi = std::numbers::pi;
    return 8.0 * pi * pi * pi * static_cast<double>(k) * k * k /
           (3.0 * std::sqrt(3.0) * L * L * L);
}

namespace {

// Newton polish (numerical derivative) started from a bracket midpoint that
// already lies within ~1% of the target root, so the iteration cannot hop to
// a neighboring rung.
std::optional<EigRecord> polish_one(int k, cplx seed, double L, double tol) {
    cplx z = seed;
    cplx f = char_det(z, L);
    for (int it = 0; it < 60; ++it) {
        const double h = 1e-7 * std::max(1.0, std::abs(z));
        const cplx fp = char_det(z + cplx(h, 0.0), L);
        const cplx fm = char_det(z - cplx(h, 0.0), L);
        const cplx df = (fp - fm) / (2.0 * h);
        if (df == cplx(0.0, 0.0)) break;
        const cplx step = f / df;
        z -= step;
        if (z == cplx(0.0, 0.0)) return std::nullopt;
        f = char_det(z, L);
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z)) && std::abs(f) < tol)
            break;
    }
    if (!(std::abs(f) < tol)) return std::nullopt;

    EigRecord rec;
    rec.k = k;
    rec.lam = (z.imag() > 0.0) ? std::conj(z) : z; // conjugate-pair convention
    rec.residual = std::abs(char_det(rec.lam, L));
    rec.ratio = std::abs(rec.lam) / asymptotic_modulus(k, L);
    return rec;
}

// The determinant is purely imaginary on the negative real axis (conjugation
// permutes two root labels and the alternating sum is odd under that swap),
// and the spectrum is real there: locate roots as sign changes of
// Im char_det(-c mu^3) along the ladder index mu, which spaces the roots
// roughly one unit apart. Returns bracket midpoints for the first `count`
// roots, in order of increasing modulus.
std::vector<cplx> bracket_roots(double L, int count) {
    const double pi = std::numbers::pi;
    const double c = 8.0 * pi * pi * pi / (3.0 * std::sqrt(3.0) * L * L * L);
    const double pitch = 0.02;
    const double mu_end = static_cast<double>(count) + 1.5;

    std::vector<cplx> seeds;
    double mu_prev = 0.2;
    double g_prev = char_det(cplx(-c * mu_prev * mu_prev * mu_prev, 0.0), L).imag();
    for (double mu = mu_prev + pitch; mu <= mu_end && seeds.size() < static_cast<size_t>(count);
         mu += pitch) {
        const double g = char_det(cplx(-c * mu * mu * mu, 0.0), L).imag();
        if (g_prev == 0.0 || (g_prev < 0.0) != (g < 0.0)) {
            const double mid = 0.5 * (mu_prev + mu);
            seeds.emplace_back(-c * mid * mid * mid, 0.0);
        }
        mu_prev = mu;
        g_prev = g;
    }
    return seeds;
}

} // namespace

std::vector<EigRecord> find_eigenvalues(double L, int k_min, int k_max, double tol,
                                        std::vector<int>* failed) {
    if (!(L > 0.0)) throw std::invalid_argument("find_eigenvalues: L must be > 0");
    if (k_min < 1 || k_max < k_min)
        throw std::invalid_argument("find_eigenvalues: need 1 <= k_min <= k_max");
    if (!(tol > 0.0)) throw std::invalid_argument("find_eigenvalues: tol must be > 0");

    const int n = k_max - k_min + 1;
    std::vector<std::optional<EigRecord>> slots(static_cast<size_t>(n));
    const std::vector<cplx> seeds = bracket_roots(L, k_max);

    // Independent polish solves; fan out in bounded batches.
    unsigned width = std::max(1u, std::thread::hardware_concurrency());
    for (int begin = 0; begin < n; begin += static_cast<int>(width)) {
        const int end = std::min(n, begin + static_cast<int>(width));
        std::vector<std::future<std::optional<EigRecord>>> batch;
        batch.reserve(static_cast<size_t>(end - begin));
        for (int idx = begin; idx < end; ++idx) {
            const int k = k_min + idx;
            if (static_cast<size_t>(k) > seeds.size()) continue;
            batch.push_back(std::async(std::launch::async, polish_one, k,
                                       seeds[static_cast<size_t>(k - 1)], L, tol));
        }
        int b = 0;
        for (int idx = begin; idx < end; ++idx) {
            const int k = k_min + idx;
            if (static_cast<size_t>(k) > seeds.size()) continue;
            slots[static_cast<size_t>(idx)] = batch[static_cast<size_t>(b++)].get();
        }
    }

    std::vector<EigRecord> records;
    records.reserve(static_cast<size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
        const auto& slot = slots[static_cast<size_t>(idx)];
        if (!slot) {
            if (failed) failed->push_back(k_min + idx);
            continue;
        }
        const bool dup = std::any_of(records.begin(), records.end(),
            [&](const EigRecord& r) {
                return std::abs(r.lam - slot->lam) <= 1e-8 * (1.0 + std::abs(r.lam));
            });
        if (!dup) records.push_back(*slot);
    }
    return records;
}

double spectral_abscissa(const std::vector<EigRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("spectral_abscissa: no records");
    double worst = -std::numeric_limits<double>::infinity();
    for (const EigRecord& r : records) worst = std::max(worst, r.lam.real());
    return worst;
}

} // namespace kdvbs
