#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kdvbs {

// Square matrix with kl subdiagonals and ku superdiagonals. Entries outside
// the band are identically zero and cannot be written.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), data_((kl + ku + 1) * n, 0.0) {
        if (n < 1 || kl < 0 || ku < 0)
            throw std::invalid_argument("BandedMatrix: bad dimensions");
    }

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    bool in_band(int i, int j) const {
        return i >= 0 && j >= 0 && i < n_ && j < n_ && j - i <= ku_ && i - j <= kl_;
    }

    double at(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : 0.0; }

    void set(int i, int j, double v) {
        if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::set outside band");
        data_[index(i, j)] = v;
    }

    void add(int i, int j, double v) {
        if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::add outside band");
        data_[index(i, j)] += v;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if ((int)x.size() != n_) throw std::invalid_argument("BandedMatrix::apply: size mismatch");
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            int lo = std::max(0, i - kl_);
            int hi = std::min(n_ - 1, i + ku_);
            double acc = 0.0;
            for (int j = lo; j <= hi; ++j) acc += data_[index(i, j)] * x[j];
            y[i] = acc;
        }
        return y;
    }

private:
    // Column-major band storage: entry (i, j) lives at row offset ku + i - j
    // within column j.
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * (kl_ + ku_ + 1) + (ku_ + i - j);
    }

    int n_, kl_, ku_;
    std::vector<double> data_;
};

// LU factorization of a banded matrix with partial pivoting. Row exchanges
// widen the upper band by kl, so the factor storage carries kl + ku
// superdiagonals.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& A)
        : n_(A.n()), kl_(A.kl()), kuw_(A.kl() + A.ku()),
          ab_((2 * A.kl() + A.ku() + 1) * A.n(), 0.0), piv_(A.n()) {
        for (int j = 0; j < n_; ++j)
            for (int i = std::max(0, j - A.ku()); i <= std::min(n_ - 1, j + kl_); ++i)
                entry(i, j) = A.at(i, j);
        factor();
    }

    // Solves A x = b, overwriting b with x.
    void solve_inplace(std::vector<double>& b) const {
        if ((int)b.size() != n_) throw std::invalid_argument("BandedLU::solve: size mismatch");
        for (int k = 0; k < n_; ++k) {
            if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
            int lo = std::min(n_ - 1, k + kl_);
            for (int i = k + 1; i <= lo; ++i) b[i] -= centry(i, k) * b[k];
        }
        for (int k = n_ - 1; k >= 0; --k) {
            int hi = std::min(n_ - 1, k + kuw_);
            double acc = b[k];
            for (int j = k + 1; j <= hi; ++j) acc -= centry(k, j) * b[j];
            b[k] = acc / centry(k, k);
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        solve_inplace(b);
        return b;
    }

private:
    double& entry(int i, int j) {
        return ab_[static_cast<std::size_t>(j) * (kl_ + kuw_ + 1) + (kuw_ + i - j)];
    }
    double centry(int i, int j) const {
        return ab_[static_cast<std::size_t>(j) * (kl_ + kuw_ + 1) + (kuw_ + i - j)];
    }

    void factor() {
        for (int k = 0; k < n_; ++k) {
            int pend = std::min(n_ - 1, k + kl_);
            int p = k;
            for (int i = k + 1; i <= pend; ++i)
                if (std::abs(entry(i, k)) > std::abs(entry(p, k))) p = i;
            piv_[k] = p;
            int jend = std::min(n_ - 1, k + kuw_);
            if (p != k)
                for (int j = k; j <= jend; ++j) std::swap(entry(k, j), entry(p, j));
            double pivot = entry(k, k);
            if (pivot == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            for (int i = k + 1; i <= pend; ++i) {
                double m = entry(i, k) / pivot;
                entry(i, k) = m;
                for (int j = k + 1; j <= jend; ++j) entry(i, j) -= m * entry(k, j);
            }
        }
    }

    int n_, kl_, kuw_;
    std::vector<double> ab_;
    std::vector<int> piv_;
};

} // namespace kdvbs
