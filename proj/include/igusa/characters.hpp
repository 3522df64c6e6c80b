#pragma once

// Multiplicative characters of (Z/p^e)^x, exact arithmetic in Z[xi] with xi
// a primitive m-th root of unity, and the character-twisted coefficient
// streams T_i = sum_u chi(u) M_{i+e}(p^i u).

#include "igusa/counting.hpp"
#include "igusa/padic.hpp"
#include "igusa/series.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

using IntPoly = std::vector<mpz_class>;  // lowest degree first

namespace detail {

inline void trim(IntPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

// Remainder of a modulo the monic polynomial m.
inline IntPoly rem_monic(IntPoly a, const IntPoly& m) {
    const std::size_t dm = m.size() - 1;
    trim(a);
    while (a.size() > dm) {
        const mpz_class lead = a.back();
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t k = 0; k <= dm; ++k) a[shift + k] -= lead * m[k];
        trim(a);
    }
    return a;
}

inline IntPoly quo_monic(IntPoly a, const IntPoly& m) {
    const std::size_t dm = m.size() - 1;
    trim(a);
    if (a.size() <= dm) return {};
    IntPoly q(a.size() - dm, 0);
    while (a.size() > dm) {
        const mpz_class lead = a.back();
        const std::size_t shift = a.size() - 1 - dm;
        q[shift] = lead;
        for (std::size_t k = 0; k <= dm; ++k) a[shift + k] -= lead * m[k];
        a.pop_back();
        trim(a);
    }
    return q;
}

}  // namespace detail

inline unsigned euler_phi(unsigned m) {
    unsigned r = m, x = m;
    for (unsigned q = 2; q * q <= x; ++q) {
        if (x % q) continue;
        while (x % q == 0) x /= q;
        r -= r / q;
    }
    if (x > 1) r -= r / x;
    return r;
}

/// Phi_m from x^m - 1 divided by Phi_d for every proper divisor d of m.
inline IntPoly cyclotomic_polynomial(unsigned m) {
    if (m == 0) throw std::invalid_argument("cyclotomic index must be positive");
    IntPoly a(m + 1, 0);
    a[0] = -1;
    a[m] = 1;
    for (unsigned d = 1; d < m; ++d) {
        if (m % d == 0) a = detail::quo_monic(a, cyclotomic_polynomial(d));
    }
    return a;
}

/// sum_k a_k xi^k in the power basis 1, xi, ..., xi^{phi(m)-1}.
class CyclotomicInt {
public:
    explicit CyclotomicInt(unsigned m) : m_(m), coords_(euler_phi(m), 0) {}

    CyclotomicInt(unsigned m, std::vector<mpz_class> coords) : m_(m), coords_(std::move(coords)) {
        if (coords_.size() != euler_phi(m)) throw std::invalid_argument("coordinate count must be phi(m)");
    }

    static CyclotomicInt integer(unsigned m, const mpz_class& z) {
        CyclotomicInt r(m);
        r.coords_[0] = z;
        return r;
    }

    /// xi^k, k taken mod m.
    static CyclotomicInt root_power(unsigned m, unsigned long k) {
        IntPoly x(k % m + 1, 0);
        x.back() = 1;
        return from_polynomial(m, std::move(x));
    }

    /// Reduces an arbitrary integer polynomial in xi modulo Phi_m.
    static CyclotomicInt from_polynomial(unsigned m, IntPoly a) {
        CyclotomicInt r(m);
        a = detail::rem_monic(std::move(a), cyclotomic_polynomial(m));
        for (std::size_t k = 0; k < a.size(); ++k) r.coords_[k] = a[k];
        return r;
    }

    unsigned m() const noexcept { return m_; }
    const std::vector<mpz_class>& coords() const noexcept { return coords_; }

    bool is_zero() const {
        return std::all_of(coords_.begin(), coords_.end(), [](const mpz_class& a) { return a == 0; });
    }
    bool is_rational_integer() const {
        return std::all_of(coords_.begin() + 1, coords_.end(), [](const mpz_class& a) { return a == 0; });
    }

    friend CyclotomicInt operator+(const CyclotomicInt& a, const CyclotomicInt& b) {
        check(a, b);
        CyclotomicInt r(a);
        for (std::size_t k = 0; k < r.coords_.size(); ++k) r.coords_[k] += b.coords_[k];
        return r;
    }
    friend CyclotomicInt operator-(const CyclotomicInt& a, const CyclotomicInt& b) {
        check(a, b);
        CyclotomicInt r(a);
        for (std::size_t k = 0; k < r.coords_.size(); ++k) r.coords_[k] -= b.coords_[k];
        return r;
    }
    friend CyclotomicInt operator*(const CyclotomicInt& a, const CyclotomicInt& b) {
        check(a, b);
        IntPoly prod(2 * a.coords_.size(), 0);
        for (std::size_t i = 0; i < a.coords_.size(); ++i)
            for (std::size_t j = 0; j < b.coords_.size(); ++j) prod[i + j] += a.coords_[i] * b.coords_[j];
        return from_polynomial(a.m_, std::move(prod));
    }
    friend CyclotomicInt operator*(const mpz_class& s, const CyclotomicInt& a) {
        CyclotomicInt r(a);
        for (auto& c : r.coords_) c *= s;
        return r;
    }
    friend bool operator==(const CyclotomicInt&, const CyclotomicInt&) = default;

private:
    static void check(const CyclotomicInt& a, const CyclotomicInt& b) {
        if (a.m_ != b.m_) throw std::invalid_argument("cyclotomic order mismatch");
    }

    unsigned m_;
    std::vector<mpz_class> coords_;
};

inline CyclotomicInt cyclo_mul(const CyclotomicInt& a, const CyclotomicInt& b) { return a * b; }

/// A character of (Z/p^e)^x given by exponents on the canonical generators:
/// chi(g_k) = exp(2 pi i exps_k / order_k). Values are xi^j with xi = exp(2 pi i / m).
class UnitCharacter {
public:
    UnitCharacter(Prime p, unsigned e, std::vector<std::uint64_t> exps)
        : group_(unit_group(p, e)), exps_(std::move(exps)) {
        const auto& gens = group_.generators();
        if (exps_.size() != gens.size())
            throw std::invalid_argument("character needs one exponent per generator (" +
                                        std::to_string(gens.size()) + ")");
        std::uint64_t m = 1;
        for (std::size_t k = 0; k < gens.size(); ++k) {
            exps_[k] %= gens[k].order;
            const std::uint64_t ord = gens[k].order / std::gcd(exps_[k], gens[k].order);
            m = std::lcm(m, ord);
        }
        m_ = static_cast<unsigned>(m);

        // exponent of xi for every residue mod p^e; -1 marks non-units
        const std::uint64_t modulus = group_.modulus();
        std::vector<std::uint64_t> weight(gens.size());
        for (std::size_t k = 0; k < gens.size(); ++k) weight[k] = exps_[k] * m / gens[k].order;
        table_.assign(modulus, -1);
        std::vector<std::uint64_t> a(gens.size(), 0);
        for (std::uint64_t u : group_.enumerate()) {
            std::uint64_t j = 0;
            for (std::size_t k = 0; k < gens.size(); ++k) j += a[k] * weight[k];
            table_[u] = static_cast<long>(j % m);
            for (std::size_t k = 0; k < gens.size(); ++k) {
                if (++a[k] < gens[k].order) break;
                a[k] = 0;
            }
        }

        if (e >= 2) {
            // must be nontrivial on 1 + p^{e-1} Z
            const std::uint64_t step = modulus / p.value();
            bool nontrivial = false;
            for (std::uint64_t k = 1; k < p.value(); ++k)
                if (table_[(1 + k * step) % modulus] != 0) nontrivial = true;
            if (!nontrivial) throw std::invalid_argument("conductor not minimal: character is trivial on 1 + p^(e-1)");
        }
    }

    static UnitCharacter trivial(Prime p) {
        return UnitCharacter(p, 1, std::vector<std::uint64_t>(p.value() == 2 ? 0 : 1, 0));
    }

    const Prime& prime() const noexcept { return group_.prime(); }
    unsigned conductor() const noexcept { return group_.exponent(); }
    unsigned order() const noexcept { return m_; }
    const UnitGroup& group() const noexcept { return group_; }
    const std::vector<std::uint64_t>& exponents() const noexcept { return exps_; }
    bool is_trivial() const noexcept { return m_ == 1; }

    /// Exponent j with chi(u) = xi^j, or nullopt (chi(u) = 0) for non-units.
    std::optional<unsigned> value(std::uint64_t u) const {
        const long j = table_[u % table_.size()];
        if (j < 0) return std::nullopt;
        return static_cast<unsigned>(j);
    }

private:
    UnitGroup group_;
    std::vector<std::uint64_t> exps_;
    unsigned m_ = 1;
    std::vector<long> table_;
};

inline std::optional<unsigned> char_value(const UnitCharacter& chi, const Residue& u) {
    if (!(u.modulus() == Modulus(chi.prime(), chi.conductor())))
        throw std::invalid_argument("residue modulus does not match character conductor");
    return chi.value(u.value().get_ui());
}

/// (f, p, level, target) -> M_level(target)
using Counter = std::function<mpz_class(const MultiPoly&, const Prime&, unsigned, const mpz_class&)>;

inline Counter default_counter() {
    return [](const MultiPoly& f, const Prime& p, unsigned level, const mpz_class& target) {
        return lift_count(f, p, level, target);
    };
}

/// T_i = sum over units u mod p^e of chi(u) M_{i+e}(p^i u), exactly.
inline CyclotomicInt twisted_coefficient(const MultiPoly& f, const UnitCharacter& chi, unsigned i,
                                         const Counter& counter = default_counter()) {
    const Prime& p = chi.prime();
    const unsigned e = chi.conductor();
    const unsigned m = chi.order();
    const mpz_class shift = p.pow(i);
    IntPoly by_power(m, 0);
    for (std::uint64_t u : chi.group().enumerate()) {
        const unsigned j = *chi.value(u);
        by_power[j] += counter(f, p, i + e, shift * static_cast<unsigned long>(u));
    }
    return CyclotomicInt::from_polynomial(m, std::move(by_power));
}

inline std::vector<CyclotomicInt> twisted_stream(const MultiPoly& f, const UnitCharacter& chi, unsigned length,
                                                 const Counter& counter = default_counter()) {
    std::vector<CyclotomicInt> out;
    out.reserve(length);
    for (unsigned i = 0; i < length; ++i) out.push_back(twisted_coefficient(f, chi, i, counter));
    return out;
}

/// Component k has coefficients Mtilde_{i+e,k} p^{-n(i+e)}, read off the
/// power-basis coordinates of T_i.
inline std::vector<RationalSeries> component_series(const std::vector<CyclotomicInt>& stream,
                                                    const UnitCharacter& chi, unsigned n) {
    const unsigned phi = euler_phi(chi.order());
    std::vector<RationalSeries> comps(phi);
    for (unsigned k = 0; k < phi; ++k) {
        comps[k].p = chi.prime().value();
        comps[k].n = n;
        comps[k].provenance = "twisted component " + std::to_string(k);
    }
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const mpz_class scale = chi.prime().pow(static_cast<unsigned long>(n) * (i + chi.conductor()));
        for (unsigned k = 0; k < phi; ++k) {
            mpq_class c(stream[i].coords()[k], scale);
            c.canonicalize();
            comps[k].coeffs.push_back(std::move(c));
        }
    }
    return comps;
}

struct TwistedDivisibilityReport {
    bool passed = true;
    std::size_t checked = 0;
    struct Failure {
        unsigned index;
        unsigned component;
        mpz_class value;
        long required;
    };
    std::optional<Failure> first_failure;
};

/// p^ceil((n/2)(i+e-1)) | Mtilde_{i+e,k} for every k and i <= horizon.
inline TwistedDivisibilityReport verify_twisted_divisibility(const std::vector<CyclotomicInt>& stream, const Prime& p,
                                                             unsigned n, unsigned e, unsigned horizon) {
    TwistedDivisibilityReport r;
    for (std::size_t i = 0; i < stream.size() && i <= horizon; ++i) {
        const long need = half_dimension_bound(n, static_cast<unsigned>(i) + e);
        const auto& coords = stream[i].coords();
        for (unsigned k = 0; k < coords.size(); ++k) {
            ++r.checked;
            if (ord_p(coords[k], p) < need) {
                if (r.passed)
                    r.first_failure = TwistedDivisibilityReport::Failure{static_cast<unsigned>(i), k, coords[k], need};
                r.passed = false;
            }
        }
    }
    return r;
}

struct TwistedPoleReport {
    PoleReport combined;
    /// One entry per component; empty when that component failed to reconstruct.
    std::vector<std::optional<RationalFunction>> functions;
    std::vector<std::string> errors;
    bool bound_ok = true;
};

/// Reconstructs each component, unions the pole real parts and checks -n/2.
inline TwistedPoleReport twisted_pole_report(const std::vector<RationalSeries>& components, const Prime& p, unsigned n,
                                             const ReconstructOptions& opt = {}) {
    TwistedPoleReport out;
    for (std::size_t k = 0; k < components.size(); ++k) {
        try {
            RationalFunction F = reconstruct_auto(components[k], opt);
            for (const auto& pole : pole_report(F, p).poles) detail::insert_pole(out.combined.poles, pole);
            out.functions.emplace_back(std::move(F));
        } catch (const ReconstructionError& err) {
            out.functions.emplace_back(std::nullopt);
            out.errors.push_back("component " + std::to_string(k) + ": " + err.what());
        }
    }
    std::sort(out.combined.poles.begin(), out.combined.poles.end(),
              [](const PoleEntry& a, const PoleEntry& b) { return a.value < b.value; });
    out.bound_ok = check_min_pole_bound(out.combined, n);
    return out;
}

}  // namespace igusa
