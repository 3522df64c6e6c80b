#pragma once

// Sparse multivariate polynomials over Z with dense exponent vectors.

#include "igusa/padic.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <algorithm>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

using Exponents = std::vector<unsigned>;

class MultiPoly {
public:
    using TermMap = std::map<Exponents, mpz_class>;

    explicit MultiPoly(unsigned nvars) : nvars_(nvars) {
        if (nvars == 0) throw std::invalid_argument("polynomial needs at least one variable");
    }

    static MultiPoly constant(unsigned nvars, const mpz_class& c) {
        MultiPoly f(nvars);
        f.add_term(Exponents(nvars, 0), c);
        return f;
    }

    /// The variable x_{j+1} (0-based index j).
    static MultiPoly variable(unsigned nvars, unsigned j) {
        if (j >= nvars) throw std::out_of_range("variable index out of range");
        MultiPoly f(nvars);
        Exponents e(nvars, 0);
        e[j] = 1;
        f.add_term(e, 1);
        return f;
    }

    unsigned nvars() const noexcept { return nvars_; }
    const TermMap& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    void add_term(const Exponents& e, const mpz_class& c) {
        if (e.size() != nvars_) throw std::invalid_argument("exponent vector length mismatch");
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    mpz_class coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? mpz_class(0) : it->second;
    }

    mpz_class constant_term() const { return coefficient(Exponents(nvars_, 0)); }

    unsigned total_degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, degree_of(e));
        return d;
    }

    unsigned degree_in(unsigned j) const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e.at(j));
        return d;
    }

    /// Same polynomial regarded in more variables (extra ones unused).
    MultiPoly widened(unsigned nvars) const {
        if (nvars < nvars_) throw std::invalid_argument("cannot narrow a polynomial");
        MultiPoly g(nvars);
        for (const auto& [e, c] : terms_) {
            Exponents w(e);
            w.resize(nvars, 0);
            g.terms_.emplace(std::move(w), c);
        }
        return g;
    }

    static unsigned degree_of(const Exponents& e) {
        unsigned d = 0;
        for (auto x : e) d += x;
        return d;
    }

    MultiPoly operator-() const {
        MultiPoly g(*this);
        for (auto& [e, c] : g.terms_) c = -c;
        return g;
    }

    friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
        check_dims(a, b);
        MultiPoly r(a);
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) { return a + (-b); }
    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        check_dims(a, b);
        MultiPoly r(a.nvars_);
        Exponents e(a.nvars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                for (unsigned j = 0; j < a.nvars_; ++j) e[j] = ea[j] + eb[j];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }

    MultiPoly pow(unsigned k) const {
        MultiPoly r = constant(nvars_, 1);
        MultiPoly base(*this);
        while (k) {
            if (k & 1) r = r * base;
            k >>= 1;
            if (k) base = base * base;
        }
        return r;
    }

    MultiPoly scaled(const mpz_class& s) const {
        MultiPoly g(nvars_);
        if (s == 0) return g;
        for (const auto& [e, c] : terms_) g.terms_.emplace(e, c * s);
        return g;
    }

    /// Exact value at an integer point.
    mpz_class evaluate(std::span<const mpz_class> point) const {
        if (point.size() != nvars_) throw std::invalid_argument("dimension mismatch");
        mpz_class sum = 0, term, pw;
        for (const auto& [e, c] : terms_) {
            term = c;
            for (unsigned j = 0; j < nvars_; ++j) {
                if (e[j] == 0) continue;
                mpz_pow_ui(pw.get_mpz_t(), point[j].get_mpz_t(), e[j]);
                term *= pw;
            }
            sum += term;
        }
        return sum;
    }

    /// Coefficients reduced into [0, m); zero coefficients dropped.
    MultiPoly reduced_mod(const mpz_class& m) const {
        MultiPoly g(nvars_);
        for (const auto& [e, c] : terms_) {
            mpz_class r = detail::mod_floor(c, m);
            if (r != 0) g.terms_.emplace(e, std::move(r));
        }
        return g;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }

    /// Canonical text: terms by descending total degree then descending
    /// exponent vector; re-parses to an equal polynomial.
    std::string to_string() const;

private:
    static void check_dims(const MultiPoly& a, const MultiPoly& b) {
        if (a.nvars_ != b.nvars_) throw std::invalid_argument("dimension mismatch");
    }

    unsigned nvars_;
    TermMap terms_;
};

inline std::string MultiPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::vector<const TermMap::value_type*> order;
    for (const auto& t : terms_) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
        unsigned da = degree_of(a->first), db = degree_of(b->first);
        if (da != db) return da > db;
        return a->first > b->first;
    });
    std::ostringstream os;
    bool first = true;
    for (const auto* t : order) {
        const auto& [e, c] = *t;
        mpz_class mag = abs(c);
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        bool is_const = degree_of(e) == 0;
        bool wrote = false;
        if (mag != 1 || is_const) {
            os << mag.get_str();
            wrote = true;
        }
        for (unsigned j = 0; j < nvars_; ++j) {
            if (e[j] == 0) continue;
            if (wrote) os << "*";
            os << "x" << (j + 1);
            if (e[j] > 1) os << "^" << e[j];
            wrote = true;
        }
    }
    return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const MultiPoly& f) { return os << f.to_string(); }

/// f at a residue point, reduced modulo m.
inline Residue evaluate_mod(const MultiPoly& f, std::span<const Residue> point, const Modulus& m) {
    if (point.size() != f.nvars()) throw std::invalid_argument("dimension mismatch");
    std::vector<mpz_class> xs;
    xs.reserve(point.size());
    for (const auto& r : point) {
        if (!(r.modulus() == m)) throw std::invalid_argument("residue modulus mismatch");
        xs.push_back(r.value());
    }
    return Residue(f.evaluate(xs), m);
}

/// Formal derivative with respect to x_{j+1} (0-based j).
inline MultiPoly partial_derivative(const MultiPoly& f, unsigned j) {
    if (j >= f.nvars()) throw std::out_of_range("variable index out of range");
    MultiPoly d(f.nvars());
    for (const auto& [e, c] : f.terms()) {
        if (e[j] == 0) continue;
        Exponents de(e);
        --de[j];
        d.add_term(de, c * e[j]);
    }
    return d;
}

inline std::vector<MultiPoly> gradient(const MultiPoly& f) {
    std::vector<MultiPoly> g;
    g.reserve(f.nvars());
    for (unsigned j = 0; j < f.nvars(); ++j) g.push_back(partial_derivative(f, j));
    return g;
}

/// h(z) = f(b + p^k z), expanded exactly.
inline MultiPoly shift_scale(const MultiPoly& f, std::span<const mpz_class> b, unsigned k, const Prime& p) {
    const unsigned n = f.nvars();
    if (b.size() != n) throw std::invalid_argument("dimension mismatch");
    const mpz_class scale = p.pow(k);

    // Per variable and exponent: coefficients of (b_j + scale*z)^e in z.
    std::vector<std::vector<std::vector<mpz_class>>> expansions(n);
    for (unsigned j = 0; j < n; ++j) {
        unsigned dj = f.degree_in(j);
        auto& ex = expansions[j];
        ex.resize(dj + 1);
        ex[0] = {1};
        for (unsigned e = 1; e <= dj; ++e) {
            const auto& prev = ex[e - 1];
            std::vector<mpz_class> cur(e + 1, 0);
            for (unsigned t = 0; t < prev.size(); ++t) {
                cur[t] += prev[t] * b[j];
                cur[t + 1] += prev[t] * scale;
            }
            ex[e] = std::move(cur);
        }
    }

    MultiPoly h(n);
    Exponents idx(n);
    for (const auto& [e, c] : f.terms()) {
        // odometer over z-exponents t_j in [0, e_j]
        std::fill(idx.begin(), idx.end(), 0u);
        for (;;) {
            mpz_class coef = c;
            for (unsigned j = 0; j < n && coef != 0; ++j) coef *= expansions[j][e[j]][idx[j]];
            h.add_term(idx, coef);
            unsigned j = 0;
            while (j < n && idx[j] == e[j]) idx[j++] = 0;
            if (j == n) break;
            ++idx[j];
        }
    }
    return h;
}

inline ExtValuation content_valuation(const MultiPoly& f, const Prime& p) {
    ExtValuation v = ExtValuation::infinity();
    for (const auto& [e, c] : f.terms()) v = std::min(v, ord_p(c, p));
    return v;
}

inline MultiPoly divide_by_p_power(const MultiPoly& f, const Prime& p, unsigned k) {
    if (k == 0) return f;
    if (content_valuation(f, p) < static_cast<long>(k)) throw std::domain_error("content too small");
    const mpz_class d = p.pow(k);
    MultiPoly g(f.nvars());
    for (const auto& [e, c] : f.terms()) {
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), c.get_mpz_t(), d.get_mpz_t());
        g.add_term(e, q);
    }
    return g;
}

}  // namespace igusa
