#pragma once

// Exact arithmetic relative to a fixed prime p: valuations, angular
// components, residues modulo p^i and the structure of (Z/p^e)^x.

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

// Deterministic for all 64-bit n with this witness set.
inline bool miller_rabin_u64(std::uint64_t n) {
    std::uint64_t d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (a % n == 0) continue;
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline mpz_class mod_floor(const mpz_class& a, const mpz_class& m) {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline mpz_class pow_ui(unsigned long base, unsigned long exp) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
    return r;
}

}  // namespace detail

/// Deterministic primality test: trial division up to 10^6, then
/// Miller-Rabin with a witness set that is exact on 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d <= 1'000'000 && d * d <= n; ++d) {
        if (n % d == 0) return n == d;
    }
    if (n <= 1'000'000ULL * 1'000'000ULL) return true;
    return detail::miller_rabin_u64(n);
}

class Prime {
public:
    explicit Prime(std::uint64_t p) : p_(p) {
        if (!is_prime(p)) throw std::invalid_argument("not a prime: " + std::to_string(p));
    }

    std::uint64_t value() const noexcept { return p_; }
    mpz_class z() const { return mpz_class(static_cast<unsigned long>(p_)); }

    /// p^k as an exact integer.
    mpz_class pow(unsigned long k) const { return detail::pow_ui(static_cast<unsigned long>(p_), k); }

    friend bool operator==(const Prime&, const Prime&) = default;

private:
    std::uint64_t p_;
};

/// Element of Z u {+infinity}; infinity is the valuation of zero.
class ExtValuation {
public:
    constexpr ExtValuation() = default;
    constexpr explicit ExtValuation(long v) : value_(v), finite_(true) {}

    static constexpr ExtValuation infinity() { return ExtValuation{}; }

    constexpr bool is_infinite() const noexcept { return !finite_; }
    constexpr bool is_finite() const noexcept { return finite_; }

    long value() const {
        if (!finite_) throw std::logic_error("valuation is infinite");
        return value_;
    }

    friend constexpr bool operator==(const ExtValuation& a, const ExtValuation& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
    }
    friend constexpr std::strong_ordering operator<=>(const ExtValuation& a, const ExtValuation& b) {
        if (!a.finite_ || !b.finite_) return b.finite_ <=> a.finite_;
        return a.value_ <=> b.value_;
    }
    friend constexpr bool operator==(const ExtValuation& a, long b) { return a.finite_ && a.value_ == b; }
    friend constexpr std::strong_ordering operator<=>(const ExtValuation& a, long b) {
        if (!a.finite_) return std::strong_ordering::greater;
        return a.value_ <=> b;
    }

    std::string to_string() const { return finite_ ? std::to_string(value_) : std::string("inf"); }

    friend std::ostream& operator<<(std::ostream& os, const ExtValuation& v) { return os << v.to_string(); }

private:
    long value_ = 0;
    bool finite_ = false;
};

inline ExtValuation ord_p(const mpz_class& z, const Prime& p) {
    if (z == 0) return ExtValuation::infinity();
    mpz_class rest = z;
    mpz_class pz = p.z();
    return ExtValuation(static_cast<long>(mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), pz.get_mpz_t())));
}

inline ExtValuation ord_p(const mpq_class& z, const Prime& p) {
    if (z == 0) return ExtValuation::infinity();
    return ExtValuation(ord_p(z.get_num(), p).value() - ord_p(z.get_den(), p).value());
}

class Modulus {
public:
    Modulus(Prime p, unsigned level) : prime_(p), level_(level), value_(p.pow(level)) {}

    const Prime& prime() const noexcept { return prime_; }
    unsigned level() const noexcept { return level_; }
    const mpz_class& value() const noexcept { return value_; }

    friend bool operator==(const Modulus& a, const Modulus& b) {
        return a.prime_ == b.prime_ && a.level_ == b.level_;
    }

private:
    Prime prime_;
    unsigned level_;
    mpz_class value_;
};

/// Value in [0, p^i). Arithmetic is closed and exact.
class Residue {
public:
    Residue(const mpz_class& v, Modulus m) : modulus_(std::move(m)), value_(detail::mod_floor(v, modulus_.value())) {}

    const mpz_class& value() const noexcept { return value_; }
    const Modulus& modulus() const noexcept { return modulus_; }

    bool is_unit() const {
        if (modulus_.level() == 0) return true;
        return mpz_divisible_ui_p(value_.get_mpz_t(), static_cast<unsigned long>(modulus_.prime().value())) == 0;
    }

    Residue inverse() const {
        if (!is_unit()) throw std::domain_error("residue is not a unit");
        if (modulus_.level() == 0) return *this;
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), value_.get_mpz_t(), modulus_.value().get_mpz_t());
        return Residue(inv, modulus_);
    }

    Residue operator-() const { return Residue(-value_, modulus_); }

    friend Residue operator+(const Residue& a, const Residue& b) {
        check_same(a, b);
        return Residue(a.value_ + b.value_, a.modulus_);
    }
    friend Residue operator-(const Residue& a, const Residue& b) {
        check_same(a, b);
        return Residue(a.value_ - b.value_, a.modulus_);
    }
    friend Residue operator*(const Residue& a, const Residue& b) {
        check_same(a, b);
        return Residue(a.value_ * b.value_, a.modulus_);
    }
    friend bool operator==(const Residue& a, const Residue& b) {
        return a.modulus_ == b.modulus_ && a.value_ == b.value_;
    }

private:
    static void check_same(const Residue& a, const Residue& b) {
        if (!(a.modulus_ == b.modulus_)) throw std::invalid_argument("residue modulus mismatch");
    }

    Modulus modulus_;
    mpz_class value_;
};

/// (z / p^{ord z}) mod p^e.
inline Residue angular_component(const mpz_class& z, const Prime& p, unsigned e) {
    if (z == 0) throw std::domain_error("angular component of zero undefined");
    if (e == 0) throw std::invalid_argument("angular component needs level e >= 1");
    mpz_class unit = z;
    mpz_class pz = p.z();
    mpz_remove(unit.get_mpz_t(), unit.get_mpz_t(), pz.get_mpz_t());
    return Residue(unit, Modulus(p, e));
}

struct UnitGenerator {
    std::uint64_t residue;
    std::uint64_t order;
    friend bool operator==(const UnitGenerator&, const UnitGenerator&) = default;
};

/// Generators of (Z/p^e)^x. Every unit is prod g_k^{a_k} with 0 <= a_k < order_k,
/// and the decomposition is unique.
class UnitGroup {
public:
    UnitGroup(Prime p, unsigned e, std::vector<UnitGenerator> gens)
        : prime_(p), exponent_(e), generators_(std::move(gens)) {}

    const Prime& prime() const noexcept { return prime_; }
    unsigned exponent() const noexcept { return exponent_; }
    const std::vector<UnitGenerator>& generators() const noexcept { return generators_; }

    std::uint64_t modulus() const {
        return static_cast<std::uint64_t>(prime_.pow(exponent_).get_ui());
    }

    std::uint64_t order() const {
        std::uint64_t o = 1;
        for (const auto& g : generators_) o *= g.order;
        return o;
    }

    /// Units in odometer order over generator exponents (first generator fastest).
    /// Element k of the result corresponds to the exponent vector decoded from k.
    std::vector<std::uint64_t> enumerate() const {
        const std::uint64_t m = modulus();
        std::vector<std::uint64_t> out{1 % m};
        for (const auto& g : generators_) {
            std::vector<std::uint64_t> next;
            next.reserve(out.size() * g.order);
            std::uint64_t gp = 1 % m;
            for (std::uint64_t a = 0; a < g.order; ++a) {
                for (auto x : out) next.push_back(detail::mulmod_u64(x, gp, m));
                gp = detail::mulmod_u64(gp, g.residue, m);
            }
            out = std::move(next);
        }
        return out;
    }

private:
    Prime prime_;
    unsigned exponent_;
    std::vector<UnitGenerator> generators_;
};

namespace detail {

inline std::uint64_t multiplicative_order(std::uint64_t g, std::uint64_t m) {
    std::uint64_t x = g % m;
    std::uint64_t k = 1;
    while (x != 1 % m) {
        x = mulmod_u64(x, g, m);
        ++k;
    }
    return k;
}

}  // namespace detail

inline UnitGroup unit_group(const Prime& p, unsigned e) {
    if (e == 0) throw std::invalid_argument("unit group needs e >= 1");
    const std::uint64_t pv = p.value();
    mpz_class mz = p.pow(e);
    if (!mz.fits_ulong_p() || mz.get_ui() > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("unit group modulus too large");
    const std::uint64_t m = mz.get_ui();
    const std::uint64_t phi = (m / pv) * (pv - 1);

    if (pv == 2) {
        if (e == 1) return UnitGroup(p, e, {});
        if (e == 2) return UnitGroup(p, e, {{3, 2}});
        return UnitGroup(p, e, {{m - 1, 2}, {5, m / 4}});
    }

    // Smallest primitive root mod p, lifted to p^e when needed.
    std::vector<std::uint64_t> factors;
    std::uint64_t t = pv - 1;
    for (std::uint64_t d = 2; d * d <= t; ++d) {
        if (t % d == 0) {
            factors.push_back(d);
            while (t % d == 0) t /= d;
        }
    }
    if (t > 1) factors.push_back(t);
    std::uint64_t g = 2;
    for (;; ++g) {
        bool primitive = std::all_of(factors.begin(), factors.end(), [&](std::uint64_t q) {
            return detail::powmod_u64(g, (pv - 1) / q, pv) != 1;
        });
        if (primitive) break;
    }
    if (e >= 2 && detail::powmod_u64(g, pv - 1, pv * pv) == 1) g += pv;
    return UnitGroup(p, e, {{g % m, phi}});
}

}  // namespace igusa
