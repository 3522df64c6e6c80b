#pragma once

// Point counts M_i(u) = #{x in (Z/p^i)^n : f(x) = u mod p^i}.
//
// Three independent routes are provided:
//   brute_force_count  full enumeration, used as the oracle;
//   lift_count         recursion on first-level residues b mod p with the
//                      Hensel / "linear part in p^2" case split;
//   stratified_count   partition of the solution set by the valuation of
//                      the gradient, with Hensel counts on nonsingular cells.

#include "igusa/multipoly.hpp"
#include "igusa/padic.hpp"

#include <gmpxx.h>

#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace igusa {

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

/// Raised when full enumeration would need more evaluation steps than allowed.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(mpz_class required, std::uint64_t budget)
        : std::runtime_error("brute-force budget exceeded: requires " + required.get_str() +
                             " evaluation steps, budget is " + std::to_string(budget)),
          required_(std::move(required)),
          budget_(budget) {}

    const mpz_class& required() const noexcept { return required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    mpz_class required_;
    std::uint64_t budget_;
};

enum class Algorithm { brute_force, lift, stratified, automatic };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::brute_force: return "brute";
        case Algorithm::lift: return "lift";
        case Algorithm::stratified: return "stratified";
        case Algorithm::automatic: return "auto";
    }
    return "?";
}

inline Algorithm algorithm_from_string(std::string_view s) {
    if (s == "brute" || s == "brute_force") return Algorithm::brute_force;
    if (s == "lift") return Algorithm::lift;
    if (s == "stratified") return Algorithm::stratified;
    if (s == "auto" || s == "automatic") return Algorithm::automatic;
    throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

namespace detail {

inline mpz_class enumeration_steps(const Prime& p, unsigned nvars, unsigned level) {
    return p.pow(static_cast<unsigned long>(nvars) * level);
}

inline void check_budget(const Prime& p, unsigned nvars, unsigned level, std::uint64_t budget) {
    mpz_class steps = enumeration_steps(p, nvars, level);
    if (steps > mpz_class(std::to_string(budget))) throw BudgetExceeded(steps, budget);
}

template <bool Wide>
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    if constexpr (Wide)
        return mulmod_u64(a, b, m);
    else
        return (a * b) % m;
}

// Calls sink(value) with g(x) mod M for every x in [0, M)^n. The first
// variable runs innermost and is evaluated by Horner on coefficients that
// are recomputed once per outer point.
template <bool Wide, class Sink>
void for_each_value_mod(const MultiPoly& g, std::uint64_t M, Sink&& sink) {
    const unsigned n = g.nvars();
    const mpz_class Mz(std::to_string(M));
    const unsigned d0 = g.degree_in(0);

    struct Term {
        std::uint64_t coef;
        Exponents rest;
    };
    std::vector<std::vector<Term>> by_x0(d0 + 1);
    for (const auto& [e, c] : g.terms()) {
        mpz_class r = mod_floor(c, Mz);
        by_x0[e[0]].push_back({r.get_ui(), e});
    }
    std::vector<unsigned> maxdeg(n, 0);
    for (unsigned j = 1; j < n; ++j) maxdeg[j] = g.degree_in(j);

    std::vector<std::uint64_t> x(n, 0);
    std::vector<std::vector<std::uint64_t>> pw(n);
    std::vector<std::uint64_t> a(d0 + 1);
    for (;;) {
        for (unsigned j = 1; j < n; ++j) {
            pw[j].assign(maxdeg[j] + 1, 1 % M);
            for (unsigned t = 1; t <= maxdeg[j]; ++t) pw[j][t] = mulmod<Wide>(pw[j][t - 1], x[j], M);
        }
        for (unsigned k = 0; k <= d0; ++k) {
            std::uint64_t s = 0;
            for (const auto& t : by_x0[k]) {
                std::uint64_t v = t.coef;
                for (unsigned j = 1; j < n; ++j) {
                    if (t.rest[j]) v = mulmod<Wide>(v, pw[j][t.rest[j]], M);
                }
                s += v;
                if (s >= M) s -= M;
            }
            a[k] = s;
        }
        for (std::uint64_t x0 = 0; x0 < M; ++x0) {
            std::uint64_t v = a[d0];
            for (unsigned k = d0; k-- > 0;) {
                v = mulmod<Wide>(v, x0, M) + a[k];
                if (v >= M) v -= M;
            }
            sink(v);
        }
        unsigned j = 1;
        while (j < n && ++x[j] == M) x[j++] = 0;
        if (j >= n) break;
    }
}

template <class Sink>
void enumerate_values(const MultiPoly& g, const mpz_class& modulus, Sink&& sink) {
    if (!modulus.fits_ulong_p() || modulus.get_ui() > (std::uint64_t{1} << 62))
        throw std::invalid_argument("modulus too large for enumeration");
    const std::uint64_t M = modulus.get_ui();
    if (M < (std::uint64_t{1} << 32))
        for_each_value_mod<false>(g, M, sink);
    else
        for_each_value_mod<true>(g, M, sink);
}

inline bool divisible_by(const mpz_class& v, const mpz_class& d) {
    return mpz_divisible_p(v.get_mpz_t(), d.get_mpz_t()) != 0;
}

// All residue vectors of {0..p-1}^n, first coordinate fastest.
inline std::vector<std::vector<mpz_class>> digit_vectors(const Prime& p, unsigned n) {
    std::vector<std::vector<mpz_class>> out;
    std::vector<unsigned long> idx(n, 0);
    const unsigned long pv = p.value();
    for (;;) {
        std::vector<mpz_class> v(n);
        for (unsigned j = 0; j < n; ++j) v[j] = idx[j];
        out.push_back(std::move(v));
        unsigned j = 0;
        while (j < n && ++idx[j] == pv) idx[j++] = 0;
        if (j == n) break;
    }
    return out;
}

// Zeros of g mod p^level in (Z/p^level)^n; g already reduced mod p^level.
inline mpz_class lift_zero_count(const MultiPoly& g, const Prime& p, unsigned level) {
    const unsigned n = g.nvars();
    if (level == 0) return 1;
    if (g.is_zero()) return p.pow(static_cast<unsigned long>(n) * level);
    if (level == 1) {
        std::uint64_t zeros = 0;
        enumerate_values(g, p.z(), [&](std::uint64_t v) { zeros += (v == 0); });
        return mpz_class(std::to_string(zeros));
    }

    const mpz_class pz = p.z();
    const mpz_class p2 = p.pow(2);
    const mpz_class modulus = p.pow(level);
    const auto grad = gradient(g);
    const mpz_class hensel = p.pow(static_cast<unsigned long>(n - 1) * (level - 1));
    const mpz_class box = p.pow(n);

    mpz_class total = 0;
    for (const auto& b : digit_vectors(p, n)) {
        // constant term of h(z) = g(b + p z)
        const mpz_class c0 = g.evaluate(b);
        if (!divisible_by(c0, pz)) continue;
        // linear coefficients of h are p * dg/dx_j(b)
        bool unit_linear = false;
        for (const auto& dj : grad) {
            if (!divisible_by(dj.evaluate(b), pz)) {
                unit_linear = true;
                break;
            }
        }
        if (unit_linear) {
            total += hensel;
            continue;
        }
        if (!divisible_by(c0, p2)) continue;
        if (level == 2) {
            total += box;
            continue;
        }
        MultiPoly h = shift_scale(g, b, 1, p).reduced_mod(modulus);
        MultiPoly reduced = divide_by_p_power(h, p, 2).reduced_mod(p.pow(level - 2));
        total += box * lift_zero_count(reduced, p, level - 2);
    }
    return total;
}

class StratifiedCounter {
public:
    StratifiedCounter(const MultiPoly& g, const Prime& p, unsigned level)
        : g_(g), grad_(gradient(g)), p_(p), level_(level), half_(level / 2), n_(g.nvars()) {}

    mpz_class run() {
        std::vector<mpz_class> origin(n_, 0);
        if (half_ == 0)
            deep(origin, 0);
        else
            shallow(origin, 0);
        return total_;
    }

private:
    // b is a representative mod p^d with gradient = 0 mod p^d, d < half_.
    void shallow(const std::vector<mpz_class>& b, unsigned d) {
        const mpz_class step = p_.pow(d);
        const mpz_class next_mod = p_.pow(d + 1);
        for (const auto& delta : digit_vectors(p_, n_)) {
            std::vector<mpz_class> child(n_);
            for (unsigned j = 0; j < n_; ++j) child[j] = b[j] + step * delta[j];
            bool singular = true;
            for (const auto& dj : grad_) {
                if (!divisible_by(dj.evaluate(child), next_mod)) {
                    singular = false;
                    break;
                }
            }
            const mpz_class value = g_.evaluate(child);
            if (!singular) {
                // gradient valuation exactly k = d on this cell
                const unsigned k = d;
                if (divisible_by(value, p_.pow(2 * k + 1))) {
                    total_ += p_.pow(static_cast<unsigned long>(n_) * k +
                                     static_cast<unsigned long>(n_ - 1) * (level_ - 2 * k - 1));
                }
                continue;
            }
            // g is constant mod p^{2d+2} on the cell
            if (!divisible_by(value, p_.pow(std::min(2 * d + 2, level_)))) continue;
            if (d + 1 < half_)
                shallow(child, d + 1);
            else
                deep(child, d + 1);
        }
    }

    // c is a class mod p^d, d >= half_, with gradient = 0 mod p^half_.
    void deep(const std::vector<mpz_class>& c, unsigned d) {
        if (!divisible_by(g_.evaluate(c), p_.pow(std::min(d + half_, level_)))) return;
        if (d == level_ - half_) {
            total_ += p_.pow(static_cast<unsigned long>(n_) * half_);
            return;
        }
        const mpz_class step = p_.pow(d);
        for (const auto& delta : digit_vectors(p_, n_)) {
            std::vector<mpz_class> child(n_);
            for (unsigned j = 0; j < n_; ++j) child[j] = c[j] + step * delta[j];
            deep(child, d + 1);
        }
    }

    const MultiPoly& g_;
    std::vector<MultiPoly> grad_;
    Prime p_;
    unsigned level_;
    unsigned half_;
    unsigned n_;
    mpz_class total_ = 0;
};

inline MultiPoly centered(const MultiPoly& f, const mpz_class& target, const mpz_class& modulus) {
    return (f - MultiPoly::constant(f.nvars(), target)).reduced_mod(modulus);
}

}  // namespace detail

/// Exact M_i(u) by enumerating all p^{n i} points. Refuses past the budget.
inline mpz_class brute_force_count(const MultiPoly& f, const Prime& p, unsigned level, const mpz_class& target,
                                   std::uint64_t budget = kDefaultBudget) {
    if (level == 0) return 1;
    detail::check_budget(p, f.nvars(), level, budget);
    const mpz_class modulus = p.pow(level);
    const MultiPoly g = detail::centered(f, target, modulus);
    std::uint64_t hits = 0;
    detail::enumerate_values(g, modulus, [&](std::uint64_t v) { hits += (v == 0); });
    return mpz_class(std::to_string(hits));
}

/// M_i(u) for every u in [0, p^i) from one enumeration pass.
inline std::vector<mpz_class> brute_force_histogram(const MultiPoly& f, const Prime& p, unsigned level,
                                                    std::uint64_t budget = kDefaultBudget) {
    if (level == 0) return {mpz_class(1)};
    detail::check_budget(p, f.nvars(), level, budget);
    const mpz_class modulus = p.pow(level);
    std::vector<std::uint64_t> hist(modulus.get_ui(), 0);
    detail::enumerate_values(f.reduced_mod(modulus), modulus, [&](std::uint64_t v) { ++hist[v]; });
    std::vector<mpz_class> out;
    out.reserve(hist.size());
    for (auto h : hist) out.emplace_back(std::to_string(h));
    return out;
}

inline mpz_class lift_count(const MultiPoly& f, const Prime& p, unsigned level, const mpz_class& target) {
    if (level == 0) return 1;
    const mpz_class modulus = p.pow(level);
    return detail::lift_zero_count(detail::centered(f, target, modulus), p, level);
}

inline mpz_class stratified_count(const MultiPoly& f, const Prime& p, unsigned level, const mpz_class& target) {
    if (level == 0) return 1;
    const mpz_class modulus = p.pow(level);
    const MultiPoly g = detail::centered(f, target, modulus);
    if (g.is_zero()) return p.pow(static_cast<unsigned long>(f.nvars()) * level);
    return detail::StratifiedCounter(g, p, level).run();
}

inline mpz_class count_solutions(Algorithm algo, const MultiPoly& f, const Prime& p, unsigned level,
                                 const mpz_class& target, std::uint64_t budget = kDefaultBudget) {
    switch (algo) {
        case Algorithm::brute_force: return brute_force_count(f, p, level, target, budget);
        case Algorithm::stratified: return stratified_count(f, p, level, target);
        case Algorithm::lift:
        case Algorithm::automatic: return lift_count(f, p, level, target);
    }
    return lift_count(f, p, level, target);
}

struct CountEntry {
    mpz_class count;
    Algorithm algorithm;
};

/// Table of M_i(u). Keys are (level, canonical target in [0, p^i)).
class CountTable {
public:
    using Key = std::pair<unsigned, mpz_class>;

    CountTable(MultiPoly f, Prime p, unsigned dimension)
        : f_(std::move(f)), p_(p), dimension_(dimension) {}

    const MultiPoly& polynomial() const noexcept { return f_; }
    const Prime& prime() const noexcept { return p_; }
    /// Number of variables counted over (polynomial variables plus any dummies).
    unsigned dimension() const noexcept { return dimension_; }
    const std::map<Key, CountEntry>& entries() const noexcept { return entries_; }
    bool complete() const noexcept { return complete_; }
    void mark_incomplete() noexcept { complete_ = false; }

    void set(unsigned level, const mpz_class& target, CountEntry entry) {
        entries_.insert_or_assign(Key{level, target}, std::move(entry));
    }

    std::optional<mpz_class> find(unsigned level, const mpz_class& target) const {
        auto it = entries_.find(Key{level, target});
        if (it == entries_.end()) return std::nullopt;
        return it->second.count;
    }

    /// M_i = M_i(0); throws if absent.
    const mpz_class& zeros(unsigned level) const {
        auto it = entries_.find(Key{level, mpz_class(0)});
        if (it == entries_.end()) throw std::out_of_range("missing count for level " + std::to_string(level));
        return it->second.count;
    }

    /// Largest L with M_0..M_L all present, or -1.
    int zero_horizon() const {
        int L = -1;
        while (entries_.count(Key{static_cast<unsigned>(L + 1), mpz_class(0)})) ++L;
        return L;
    }

    std::vector<mpz_class> zero_counts() const {
        std::vector<mpz_class> out;
        for (int i = 0; i <= zero_horizon(); ++i) out.push_back(zeros(static_cast<unsigned>(i)));
        return out;
    }

    bool level_complete(unsigned level) const {
        mpz_class modulus = p_.pow(level);
        auto lo = entries_.lower_bound(Key{level, mpz_class(0)});
        auto hi = entries_.lower_bound(Key{level + 1, mpz_class(0)});
        return mpz_class(static_cast<unsigned long>(std::distance(lo, hi))) == modulus;
    }

private:
    MultiPoly f_;
    Prime p_;
    unsigned dimension_;
    std::map<Key, CountEntry> entries_;
    bool complete_ = true;
};

struct CountOptions {
    Algorithm algorithm = Algorithm::automatic;
    /// Levels i <= this get every target u; other levels only u = 0.
    std::optional<unsigned> all_targets_upto = std::nullopt;
    std::uint64_t budget = kDefaultBudget;
    unsigned workers = 1;
    /// Dummy variables beyond the polynomial's own; each multiplies M_i(u) by p^i.
    unsigned extra_vars = 0;
    const std::atomic<bool>* cancel = nullptr;
};

/// Builds M_i(0) for i <= i_max, plus all targets on the levels requested.
/// Jobs may run on several threads; every entry is keyed, so the result does
/// not depend on scheduling. A raised cancel flag stops between jobs and the
/// table is marked incomplete.
inline CountTable count_table(const MultiPoly& f, const Prime& p, unsigned i_max, const CountOptions& opt = {}) {
    CountTable table(f, p, f.nvars() + opt.extra_vars);
    table.set(0, 0, {1, opt.algorithm});

    struct Job {
        unsigned level;
        mpz_class target;
        bool histogram;
    };
    std::vector<Job> jobs;
    for (unsigned i = 1; i <= i_max; ++i) {
        const bool full = opt.all_targets_upto && i <= *opt.all_targets_upto;
        if (!full) {
            jobs.push_back({i, 0, false});
            continue;
        }
        const bool use_histogram =
            opt.algorithm == Algorithm::brute_force ||
            (opt.algorithm == Algorithm::automatic &&
             detail::enumeration_steps(p, f.nvars(), i) <= mpz_class(std::to_string(opt.budget)));
        if (use_histogram) {
            jobs.push_back({i, 0, true});
        } else {
            const mpz_class modulus = p.pow(i);
            for (mpz_class u = 0; u < modulus; ++u) jobs.push_back({i, u, false});
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    bool cancelled = false;

    auto worker = [&] {
        for (;;) {
            if (opt.cancel && opt.cancel->load()) {
                std::lock_guard lock(mu);
                cancelled = true;
                return;
            }
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            const Job& job = jobs[k];
            const mpz_class dummy = p.pow(static_cast<unsigned long>(opt.extra_vars) * job.level);
            try {
                if (job.histogram) {
                    auto hist = brute_force_histogram(f, p, job.level, opt.budget);
                    std::lock_guard lock(mu);
                    for (std::size_t u = 0; u < hist.size(); ++u)
                        table.set(job.level, mpz_class(static_cast<unsigned long>(u)),
                                  {hist[u] * dummy, Algorithm::brute_force});
                } else {
                    Algorithm used = opt.algorithm == Algorithm::automatic ? Algorithm::lift : opt.algorithm;
                    mpz_class c = count_solutions(used, f, p, job.level, job.target, opt.budget) * dummy;
                    std::lock_guard lock(mu);
                    table.set(job.level, job.target, {std::move(c), used});
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next.store(jobs.size());
                return;
            }
        }
    };

    const unsigned nthreads = std::max(1u, opt.workers);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    if (cancelled) table.mark_incomplete();
    return table;
}

struct DivisibilityFailure {
    unsigned level;
    mpz_class target;
    mpz_class count;
    long required;
};

struct Theorem23Report {
    bool passed = true;
    std::size_t checked = 0;
    std::optional<DivisibilityFailure> counterexample;
};

/// ceil((n/2)(i-1)) for i >= 1.
inline long half_dimension_bound(unsigned n, unsigned level) {
    if (level == 0) return 0;
    const long t = static_cast<long>(n) * (level - 1);
    return (t + 1) / 2;
}

/// Checks p^ceil((n/2)(i-1)) | M_i(u) on every entry with i >= 1; zero passes.
inline Theorem23Report verify_theorem23(const CountTable& table, unsigned n) {
    if (n < 2) throw std::invalid_argument("theorem requires n > 1");
    Theorem23Report report;
    for (const auto& [key, entry] : table.entries()) {
        const auto& [level, target] = key;
        if (level == 0) continue;
        ++report.checked;
        const long need = half_dimension_bound(n, level);
        if (ord_p(entry.count, table.prime()) < need) {
            if (report.passed) report.counterexample = DivisibilityFailure{level, target, entry.count, need};
            report.passed = false;
        }
    }
    return report;
}

}  // namespace igusa
