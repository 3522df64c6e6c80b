#pragma once

// Dense univariate polynomials over Q, lowest degree first.

#include <gmpxx.h>

#include <algorithm>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace igusa {

class QPoly {
public:
    QPoly() = default;
    QPoly(std::initializer_list<mpq_class> c) : c_(c) { trim(); }
    explicit QPoly(std::vector<mpq_class> c) : c_(std::move(c)) { trim(); }

    static QPoly constant(const mpq_class& a) { return QPoly(std::vector<mpq_class>{a}); }

    /// a * t^k
    static QPoly monomial(const mpq_class& a, std::size_t k) {
        std::vector<mpq_class> c(k + 1, 0);
        c[k] = a;
        return QPoly(std::move(c));
    }

    bool is_zero() const noexcept { return c_.empty(); }
    /// -1 for the zero polynomial.
    long degree() const noexcept { return static_cast<long>(c_.size()) - 1; }
    const std::vector<mpq_class>& coeffs() const noexcept { return c_; }

    mpq_class operator[](std::size_t k) const { return k < c_.size() ? c_[k] : mpq_class(0); }
    const mpq_class& leading() const {
        if (c_.empty()) throw std::domain_error("zero polynomial has no leading coefficient");
        return c_.back();
    }

    mpq_class evaluate(const mpq_class& t) const {
        mpq_class v = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * t + *it;
        return v;
    }

    QPoly operator-() const {
        QPoly r(*this);
        for (auto& a : r.c_) a = -a;
        return r;
    }

    friend QPoly operator+(const QPoly& a, const QPoly& b) {
        std::vector<mpq_class> c(std::max(a.c_.size(), b.c_.size()), 0);
        for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
        for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
        return QPoly(std::move(c));
    }
    friend QPoly operator-(const QPoly& a, const QPoly& b) { return a + (-b); }
    friend QPoly operator*(const QPoly& a, const QPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<mpq_class> c(a.c_.size() + b.c_.size() - 1, 0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return QPoly(std::move(c));
    }
    friend QPoly operator*(const mpq_class& s, const QPoly& a) {
        QPoly r(a);
        for (auto& x : r.c_) x *= s;
        r.trim();
        return r;
    }

    QPoly pow(unsigned k) const {
        QPoly r = constant(1);
        for (unsigned i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    /// Euclidean division: *this = q * d + r with deg r < deg d.
    std::pair<QPoly, QPoly> divmod(const QPoly& d) const {
        if (d.is_zero()) throw std::domain_error("division by zero polynomial");
        std::vector<mpq_class> rem = c_;
        const long dd = d.degree();
        if (degree() < dd) return {QPoly{}, *this};
        std::vector<mpq_class> q(static_cast<std::size_t>(degree() - dd + 1), 0);
        for (long k = degree() - dd; k >= 0; --k) {
            const mpq_class f = rem[static_cast<std::size_t>(k + dd)] / d.leading();
            q[static_cast<std::size_t>(k)] = f;
            if (f == 0) continue;
            for (long j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(k + j)] -= f * d.c_[static_cast<std::size_t>(j)];
        }
        rem.resize(static_cast<std::size_t>(dd));
        return {QPoly(std::move(q)), QPoly(std::move(rem))};
    }

    QPoly monic() const {
        if (is_zero()) return {};
        return mpq_class(1 / leading()) * *this;
    }

    friend QPoly gcd(QPoly a, QPoly b) {
        while (!b.is_zero()) {
            QPoly r = a.divmod(b).second;
            a = std::move(b);
            b = std::move(r);
        }
        return a.monic();
    }

    friend bool operator==(const QPoly&, const QPoly&) = default;

    std::string to_string(const char* var = "t") const {
        if (is_zero()) return "0";
        std::string s;
        for (std::size_t k = 0; k < c_.size(); ++k) {
            if (c_[k] == 0) continue;
            if (!s.empty()) s += c_[k] < 0 ? " - " : " + ";
            else if (c_[k] < 0) s += "-";
            mpq_class mag = abs(c_[k]);
            if (mag != 1 || k == 0) s += mag.get_str();
            if (k > 0) {
                if (mag != 1) s += "*";
                s += var;
                if (k > 1) s += "^" + std::to_string(k);
            }
        }
        return s;
    }

    friend std::ostream& operator<<(std::ostream& os, const QPoly& f) { return os << f.to_string(); }

private:
    void trim() {
        for (auto& a : c_) a.canonicalize();
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<mpq_class> c_;
};

}  // namespace igusa
