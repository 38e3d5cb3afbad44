#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <type_traits>

#include "numeric_util.hpp"

namespace kdvbs {

// A monomial s^{s_exp} t^{t_exp}. The pair uniquely keys a term.
struct Monomial {
    int s_exp = 0;
    int t_exp = 0;
    auto operator<=>(const Monomial&) const = default;
};

namespace detail {

template <class Coeff>
inline bool negligible(const Coeff& c) {
    return c == Coeff(0);
}

// Keeping maps sparse: anything this far below double precision cannot
// influence any downstream tolerance.
template <>
inline bool negligible<double>(const double& c) {
    return std::abs(c) < 1e-300;
}

template <class Coeff>
inline Coeff coeff_pow(const Coeff& base, int exp) {
    Coeff result(1);
    Coeff b = base;
    int e = exp;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

template <class Coeff>
inline double coeff_abs_double(const Coeff& c) {
    return std::abs(static_cast<double>(c));
}

} // namespace detail

// Sparse univariate polynomial, exponent -> coefficient. Zero coefficients are
// never stored.
template <class Coeff>
class UnivariatePoly {
public:
    using TermMap = std::map<int, Coeff>;

    UnivariatePoly() = default;

    void add_term(int exp, const Coeff& c) {
        if (exp < 0) throw std::invalid_argument("UnivariatePoly: negative exponent");
        auto [it, inserted] = terms_.try_emplace(exp, c);
        if (!inserted) it->second += c;
        if (detail::negligible(it->second)) terms_.erase(it);
    }

    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    UnivariatePoly scaled(const Coeff& a) const {
        UnivariatePoly out;
        for (const auto& [e, c] : terms_) out.add_term(e, a * c);
        return out;
    }

    UnivariatePoly derivative() const {
        UnivariatePoly out;
        for (const auto& [e, c] : terms_)
            if (e >= 1) out.add_term(e - 1, Coeff(e) * c);
        return out;
    }

    Coeff coefficient(int exp) const {
        auto it = terms_.find(exp);
        return it == terms_.end() ? Coeff(0) : it->second;
    }

    double eval(double x) const
        requires std::is_same_v<Coeff, double>
    {
        KahanSum acc;
        for (const auto& [e, c] : terms_) acc.add(c * ipow(x, e));
        return acc.value();
    }

private:
    TermMap terms_;
};

using Poly1 = UnivariatePoly<double>;

// Exact term-by-term value of the integral of p(x)^2 over [0, L].
inline double poly_int_sq(const Poly1& p, double L) {
    if (L <= 0.0) throw std::invalid_argument("poly_int_sq: L must be positive");
    KahanSum acc;
    for (const auto& [ei, ci] : p.terms())
        for (const auto& [ej, cj] : p.terms()) {
            int e = ei + ej + 1;
            acc.add(ci * cj * ipow(L, e) / static_cast<double>(e));
        }
    return acc.value();
}

// Sparse bivariate polynomial in (s, t). Term maps stay sorted by
// (s_exp, t_exp) so iteration order, and hence floating-point sums, are
// reproducible.
template <class Coeff>
class BivariatePoly {
public:
    using TermMap = std::map<Monomial, Coeff>;

    BivariatePoly() = default;

    static BivariatePoly monomial(Monomial m, const Coeff& c) {
        BivariatePoly p;
        p.add_term(m, c);
        return p;
    }

    void add_term(Monomial m, const Coeff& c) {
        if (m.s_exp < 0 || m.t_exp < 0)
            throw std::invalid_argument("BivariatePoly: negative exponent");
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) it->second += c;
        if (detail::negligible(it->second)) terms_.erase(it);
    }

    void add(const BivariatePoly& other, const Coeff& scale = Coeff(1)) {
        for (const auto& [m, c] : other.terms_) add_term(m, scale * c);
    }

    BivariatePoly scaled(const Coeff& a) const {
        BivariatePoly out;
        for (const auto& [m, c] : terms_) out.add_term(m, a * c);
        return out;
    }

    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    Coeff coefficient(Monomial m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Coeff(0) : it->second;
    }

    bool operator==(const BivariatePoly& other) const { return terms_ == other.terms_; }

    BivariatePoly diff_s(int order = 1) const { return diff_impl(order, /*wrt_s=*/true); }
    BivariatePoly diff_t(int order = 1) const { return diff_impl(order, /*wrt_s=*/false); }

    // Substitute t = t0, leaving a univariate polynomial in s.
    UnivariatePoly<Coeff> restrict_t(const Coeff& t0) const {
        UnivariatePoly<Coeff> out;
        for (const auto& [m, c] : terms_) {
            if (t0 == Coeff(0)) {
                if (m.t_exp == 0) out.add_term(m.s_exp, c);
            } else {
                out.add_term(m.s_exp, c * detail::coeff_pow(t0, m.t_exp));
            }
        }
        return out;
    }

    double eval(double s, double t) const
        requires std::is_same_v<Coeff, double>
    {
        KahanSum acc;
        for (const auto& [m, c] : terms_) acc.add(c * ipow(s, m.s_exp) * ipow(t, m.t_exp));
        return acc.value();
    }

    // Dominates sup |p| over the triangle {s,t >= 0, s+t <= L}.
    double sup_bound(double L) const {
        if (L <= 0.0) throw std::invalid_argument("sup_bound: L must be positive");
        KahanSum acc;
        for (const auto& [m, c] : terms_)
            acc.add(detail::coeff_abs_double(c) * ipow(L, m.s_exp + m.t_exp));
        return acc.value();
    }

private:
    BivariatePoly diff_impl(int order, bool wrt_s) const {
        if (order < 0) throw std::invalid_argument("diff: order must be nonnegative");
        BivariatePoly cur = *this;
        for (int pass = 0; pass < order; ++pass) {
            BivariatePoly next;
            for (const auto& [m, c] : cur.terms_) {
                int e = wrt_s ? m.s_exp : m.t_exp;
                if (e == 0) continue;
                Monomial d = wrt_s ? Monomial{m.s_exp - 1, m.t_exp}
                                   : Monomial{m.s_exp, m.t_exp - 1};
                next.add_term(d, Coeff(e) * c);
            }
            cur = std::move(next);
        }
        return cur;
    }

    TermMap terms_;
};

using Poly2 = BivariatePoly<double>;

// The four split components of the series integral operator. Pm1 maps
// s^m t^k -> c s^{m+1} t^{k-1}; the other three map s^m t^k -> c s^{m+2} t^{k+i}
// with i = -2, 0, +1.
enum class PComponent { Pm2, Pm1, P0, P1 };

// Image of one monomial under one component. Requires s_exp >= 1; every term
// that can appear in the series satisfies this. The coefficient case tables
// follow from differentiating the monomial and antidifferentiating three
// times, so components acting through a vanishing derivative give zero
// (t-derivative orders above t_exp).
template <class Coeff>
BivariatePoly<Coeff> apply_component(PComponent which, Monomial mono, const Coeff& lambda) {
    const int m = mono.s_exp;
    const int k = mono.t_exp;
    if (m < 1)
        throw std::invalid_argument("apply_component: s_exp must be >= 1");

    BivariatePoly<Coeff> out;
    switch (which) {
        case PComponent::Pm2: {
            if (k <= 2) return out;
            Coeff c = -Coeff(k * (k - 1)) / Coeff(3 * (m + 1) * (m + 2));
            out.add_term(Monomial{m + 2, k - 2}, c);
            return out;
        }
        case PComponent::Pm1: {
            if (k <= 1) return out;
            Coeff c = Coeff(k) / Coeff(m + 1);
            out.add_term(Monomial{m + 1, k - 1}, c);
            return out;
        }
        case PComponent::P0: {
            if (k == 0) return out;
            Coeff c = -Coeff(1) / Coeff(3 * (m + 1) * (m + 2));
            out.add_term(Monomial{m + 2, k}, c);
            return out;
        }
        case PComponent::P1: {
            Coeff c = -lambda / Coeff(3 * (m + 1) * (m + 2) * (k + 1));
            out.add_term(Monomial{m + 2, k + 1}, c);
            return out;
        }
    }
    throw std::logic_error("apply_component: unknown component");
}

// Full integral operator: sum of the four components over all terms. Exact,
// no truncation happens here.
template <class Coeff>
BivariatePoly<Coeff> apply_P(const BivariatePoly<Coeff>& p, const Coeff& lambda) {
    BivariatePoly<Coeff> out;
    for (const auto& [m, c] : p.terms()) {
        for (PComponent which :
             {PComponent::Pm2, PComponent::Pm1, PComponent::P0, PComponent::P1}) {
            out.add(apply_component(which, m, lambda), c);
        }
    }
    return out;
}

} // namespace kdvbs
