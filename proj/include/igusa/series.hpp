#pragma once

// Generating series of point counts and the analytics built on them:
// Poincare series, zeta coefficients, exact rational reconstruction with
// factor peeling, pole reports, and the valuation checks relating the
// counts M_i to the smallest real part l of a pole.

#include "igusa/counting.hpp"
#include "igusa/padic.hpp"
#include "igusa/qpoly.hpp"

#include <Eigen/Eigenvalues>
#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

/// Exact coefficient list c_0..c_L with the context it was computed in.
struct RationalSeries {
    std::vector<mpq_class> coeffs;
    std::uint64_t p = 0;
    unsigned n = 0;
    std::string provenance;

    std::size_t size() const noexcept { return coeffs.size(); }
};

/// (1 - p^{-nu} t^N)^multiplicity
struct DenominatorFactor {
    unsigned nu = 0;
    unsigned N = 0;
    unsigned multiplicity = 1;

    QPoly base(const Prime& p) const { return QPoly::constant(1) - QPoly::monomial(mpq_class(1, 1) / p.pow(nu), N); }
    QPoly expand(const Prime& p) const { return base(p).pow(multiplicity); }
    mpq_class real_part() const {
        mpq_class r(mpz_class(-static_cast<long>(nu)), mpz_class(N));
        r.canonicalize();
        return r;
    }

    friend bool operator==(const DenominatorFactor&, const DenominatorFactor&) = default;
};

/// numerator / denominator with denominator(0) = 1 and gcd 1. When peeled,
/// (prod of factors) * unfactored == denominator.
struct RationalFunction {
    QPoly numerator;
    QPoly denominator = QPoly::constant(1);
    std::vector<DenominatorFactor> factors;
    QPoly unfactored = QPoly::constant(1);

    /// Reduces by the gcd and scales so the denominator has constant term 1.
    static RationalFunction reduced(const QPoly& num, const QPoly& den) {
        if (den.is_zero()) throw std::domain_error("zero denominator");
        RationalFunction F;
        if (num.is_zero()) {
            F.numerator = QPoly{};
            F.denominator = QPoly::constant(1);
            F.unfactored = F.denominator;
            return F;
        }
        QPoly g = gcd(num, den);
        QPoly a = num.divmod(g).first;
        QPoly b = den.divmod(g).first;
        if (b[0] == 0) throw std::domain_error("rational function has a pole at t = 0");
        const mpq_class s = 1 / b[0];
        F.numerator = s * a;
        F.denominator = s * b;
        F.unfactored = F.denominator;
        return F;
    }

    /// First L coefficients of the power series expansion at t = 0.
    std::vector<mpq_class> expand(std::size_t L) const {
        std::vector<mpq_class> s(L, 0);
        for (std::size_t k = 0; k < L; ++k) {
            mpq_class v = numerator[k];
            for (long j = 1; j <= denominator.degree() && static_cast<std::size_t>(j) <= k; ++j)
                v -= denominator[static_cast<std::size_t>(j)] * s[k - static_cast<std::size_t>(j)];
            s[k] = v / denominator[0];
        }
        return s;
    }

    mpq_class evaluate(const mpq_class& t) const {
        const mpq_class d = denominator.evaluate(t);
        if (d == 0) throw std::domain_error("evaluation at a pole");
        return numerator.evaluate(t) / d;
    }

    bool is_zero() const noexcept { return numerator.is_zero(); }

    /// Same function, compared by cross-multiplication.
    bool equivalent(const RationalFunction& o) const {
        return numerator * o.denominator == o.numerator * denominator;
    }

    bool fully_factored() const { return unfactored.degree() == 0; }
};

class ReconstructionError : public std::runtime_error {
public:
    enum class Kind { failed, spurious, insufficient };
    ReconstructionError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct ReconstructOptions {
    unsigned guard = 4;
    /// Peeling candidates nu <= nu_max, N <= N_max; 0 means 4n and 2n.
    unsigned nu_max = 0;
    unsigned N_max = 0;
};

// ---------------------------------------------------------------------------
// Series from counts

/// P_i = M_i p^{-n i} for i <= L.
inline RationalSeries poincare_series(const CountTable& table, unsigned n, unsigned L) {
    RationalSeries P;
    P.p = table.prime().value();
    P.n = n;
    P.provenance = "poincare";
    for (unsigned i = 0; i <= L; ++i) {
        auto m = table.find(i, 0);
        if (!m) throw std::out_of_range("missing level " + std::to_string(i) + " in count table");
        P.coeffs.emplace_back(*m, table.prime().pow(static_cast<unsigned long>(n) * i));
        P.coeffs.back().canonicalize();
    }
    return P;
}

/// t-expansion of Z = P - (P - 1)/t, i.e. c_i = P_i - P_{i+1}.
inline RationalSeries zeta_coefficients(const RationalSeries& P) {
    if (P.coeffs.size() < 2) throw std::invalid_argument("malformed Poincare series: need at least 2 coefficients");
    if (P.coeffs[0] != 1) throw std::invalid_argument("malformed Poincare series: P_0 != 1");
    RationalSeries Z;
    Z.p = P.p;
    Z.n = P.n;
    Z.provenance = "zeta";
    for (std::size_t i = 0; i + 1 < P.coeffs.size(); ++i) Z.coeffs.push_back(P.coeffs[i] - P.coeffs[i + 1]);
    return Z;
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace detail {

// Solves A x = b exactly; nullopt if inconsistent. Free variables set to 0.
inline std::optional<std::vector<mpq_class>> solve_exact(std::vector<std::vector<mpq_class>> A, std::vector<mpq_class> b,
                                                         std::size_t unknowns) {
    const std::size_t rows = A.size();
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < unknowns && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && A[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[piv], A[r]);
        std::swap(b[piv], b[r]);
        const mpq_class inv = 1 / A[r][c];
        for (std::size_t k = c; k < unknowns; ++k) A[r][k] *= inv;
        b[r] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            const mpq_class f = A[i][c];
            for (std::size_t k = c; k < unknowns; ++k) A[i][k] -= f * A[r][k];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<mpq_class> x(unknowns, 0);
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
    return x;
}

}  // namespace detail

/// Tries exact candidate factors (1 - p^{-nu} t^N) against F's denominator,
/// largest N first so composite factors are not split into pieces.
inline void peel_factors(RationalFunction& F, const Prime& p, unsigned nu_max, unsigned N_max) {
    F.factors.clear();
    QPoly rest = F.denominator;
    for (unsigned N = N_max; N >= 1; --N) {
        for (unsigned nu = 1; nu <= nu_max; ++nu) {
            DenominatorFactor cand{nu, N, 0};
            const QPoly base = cand.base(p);
            while (rest.degree() >= base.degree()) {
                auto [q, r] = rest.divmod(base);
                if (!r.is_zero()) break;
                rest = std::move(q);
                ++cand.multiplicity;
            }
            if (cand.multiplicity > 0) F.factors.push_back(cand);
        }
    }
    F.unfactored = rest;
}

/// Finds the minimal-degree D (D(0) = 1, deg D <= max_den_deg) with D*S a
/// polynomial of degree <= max_num_deg on the first L - guard coefficients,
/// then checks the guard coefficients exactly.
inline RationalFunction reconstruct_rational(const RationalSeries& S, unsigned max_num_deg, unsigned max_den_deg,
                                             const ReconstructOptions& opt = {}) {
    const std::size_t L = S.coeffs.size();
    if (L < static_cast<std::size_t>(max_num_deg) + max_den_deg + opt.guard)
        throw ReconstructionError(ReconstructionError::Kind::insufficient,
                                  "reconstruction needs L >= max_num_deg + max_den_deg + guard");
    const auto& s = S.coeffs;
    auto coeff = [&](long k) { return k < 0 ? mpq_class(0) : s[static_cast<std::size_t>(k)]; };
    const std::size_t fit_end = L - opt.guard;  // exclusive
    bool spurious = false;

    for (unsigned d = 0; d <= max_den_deg; ++d) {
        std::vector<std::vector<mpq_class>> A;
        std::vector<mpq_class> rhs;
        for (std::size_t k = max_num_deg + 1; k < fit_end; ++k) {
            std::vector<mpq_class> row(d);
            for (unsigned j = 1; j <= d; ++j) row[j - 1] = coeff(static_cast<long>(k) - j);
            A.push_back(std::move(row));
            rhs.push_back(-s[k]);
        }
        auto sol = detail::solve_exact(std::move(A), std::move(rhs), d);
        if (!sol) continue;

        std::vector<mpq_class> dc(d + 1);
        dc[0] = 1;
        for (unsigned j = 1; j <= d; ++j) dc[j] = (*sol)[j - 1];
        const QPoly D(dc);

        // D*S over all L coefficients: degree <= max_num_deg part is N, the
        // remaining ones must vanish.
        std::vector<mpq_class> prod(L, 0);
        for (std::size_t k = 0; k < L; ++k)
            for (unsigned j = 0; j <= d && j <= k; ++j) prod[k] += dc[j] * s[k - j];
        bool ok = true;
        for (std::size_t k = max_num_deg + 1; k < L; ++k)
            if (prod[k] != 0) {
                ok = false;
                break;
            }
        if (!ok) {
            spurious = true;
            continue;
        }
        prod.resize(std::min<std::size_t>(L, max_num_deg + 1));
        RationalFunction F = RationalFunction::reduced(QPoly(prod), D);
        const Prime p(S.p);
        peel_factors(F, p, opt.nu_max ? opt.nu_max : 4 * S.n, opt.N_max ? opt.N_max : 2 * S.n);
        return F;
    }
    if (spurious)
        throw ReconstructionError(ReconstructionError::Kind::spurious,
                                  "spurious recurrence: guard coefficients disagree");
    throw ReconstructionError(ReconstructionError::Kind::failed,
                              "reconstruction failed; increase L or degree bounds");
}

/// Sweeps degree bounds by increasing total degree and returns the first
/// reconstruction that survives the guard band.
inline RationalFunction reconstruct_auto(const RationalSeries& S, const ReconstructOptions& opt = {}) {
    const std::size_t L = S.coeffs.size();
    if (L < opt.guard + 1)
        throw ReconstructionError(ReconstructionError::Kind::insufficient, "series too short to reconstruct");
    bool spurious = false;
    for (std::size_t total = 0; total + opt.guard <= L; ++total) {
        for (std::size_t d = 0; d <= total; ++d) {
            try {
                return reconstruct_rational(S, static_cast<unsigned>(total - d), static_cast<unsigned>(d), opt);
            } catch (const ReconstructionError& e) {
                if (e.kind() == ReconstructionError::Kind::spurious) spurious = true;
            }
        }
    }
    if (spurious)
        throw ReconstructionError(ReconstructionError::Kind::spurious,
                                  "spurious recurrence: guard coefficients disagree");
    throw ReconstructionError(ReconstructionError::Kind::failed, "reconstruction failed; increase L or degree bounds");
}

// ---------------------------------------------------------------------------
// Poles

struct PoleEntry {
    double value = 0;                  // real part of s
    std::optional<mpq_class> exact;    // set when it comes from a peeled factor
    unsigned order = 0;
    /// More than one factor or root cluster contributes to this real part;
    /// the order is then a maximum, not a resolved pole order.
    bool shared = false;
};

struct PoleReport {
    std::vector<PoleEntry> poles;  // ascending by real part

    bool empty() const noexcept { return poles.empty(); }
    const PoleEntry& min_real_part() const {
        if (poles.empty()) throw std::logic_error("empty pole report");
        return poles.front();
    }
};

namespace detail {

inline constexpr double kRootTolerance = 1e-9;
inline constexpr double kClusterTolerance = 1e-6;

inline std::vector<std::complex<double>> numeric_roots(const QPoly& q) {
    const long deg = q.degree();
    std::vector<std::complex<double>> roots;
    if (deg < 1) return roots;
    std::vector<double> c(static_cast<std::size_t>(deg) + 1);
    for (long k = 0; k <= deg; ++k) c[static_cast<std::size_t>(k)] = q[static_cast<std::size_t>(k)].get_d();
    const double lead = c.back();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (long i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (long i = 0; i < deg; ++i) companion(i, deg - 1) = -c[static_cast<std::size_t>(i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    for (long i = 0; i < deg; ++i) {
        std::complex<long double> z = solver.eigenvalues()[i];
        // Newton polish in extended precision
        for (int it = 0; it < 50; ++it) {
            std::complex<long double> v = 0, dv = 0;
            for (long k = deg; k >= 0; --k) {
                dv = dv * z + v;
                v = v * z + static_cast<long double>(c[static_cast<std::size_t>(k)]);
            }
            if (std::abs(dv) == 0) break;
            const auto step = v / dv;
            z -= step;
            if (std::abs(step) <= kRootTolerance * std::max<long double>(1, std::abs(z))) break;
        }
        roots.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
    return roots;
}

inline void insert_pole(std::vector<PoleEntry>& poles, PoleEntry e) {
    for (auto& q : poles) {
        if (std::abs(q.value - e.value) <= kClusterTolerance) {
            q.order = std::max(q.order, e.order);
            q.shared = true;
            if (!q.exact && e.exact) {
                q.exact = e.exact;
                q.value = e.value;
            }
            return;
        }
    }
    poles.push_back(std::move(e));
}

}  // namespace detail

/// Real parts of poles: -nu/N per peeled factor, -log_p|t0| per numeric root
/// of the unfactored part. Orders at a shared real part are maxima.
inline PoleReport pole_report(const RationalFunction& F, const Prime& p) {
    PoleReport report;
    if (F.is_zero()) return report;
    for (const auto& f : F.factors) {
        mpq_class re = f.real_part();
        detail::insert_pole(report.poles, PoleEntry{re.get_d(), re, f.multiplicity, false});
    }
    const auto roots = detail::numeric_roots(F.unfactored);
    const double logp = std::log(static_cast<double>(p.value()));
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        unsigned mult = 0;
        for (std::size_t j = i; j < roots.size(); ++j) {
            if (!used[j] && std::abs(roots[j] - roots[i]) <= detail::kClusterTolerance * std::max(1.0, std::abs(roots[i]))) {
                used[j] = true;
                ++mult;
            }
        }
        const double re = -std::log(std::abs(roots[i])) / logp;
        detail::insert_pole(report.poles, PoleEntry{re, std::nullopt, mult, false});
    }
    std::sort(report.poles.begin(), report.poles.end(),
              [](const PoleEntry& a, const PoleEntry& b) { return a.value < b.value; });
    return report;
}

/// min real part >= -n/2 (equality allowed) and > -n. Vacuously true when
/// there are no poles.
inline bool check_min_pole_bound(const PoleReport& report, unsigned n) {
    if (report.empty()) return true;
    const PoleEntry& m = report.min_real_part();
    if (m.exact) {
        const mpq_class half(mpz_class(-static_cast<long>(n)), mpz_class(2));
        return *m.exact >= half && *m.exact > -static_cast<long>(n);
    }
    return m.value >= -static_cast<double>(n) / 2 - detail::kClusterTolerance && m.value > -static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Valuation analytics

/// Smallest integer >= x.
inline mpz_class ceil_q(const mpq_class& x) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return r;
}

/// True iff ord_p(c_i p^{n i}) >= ceil((n + l) i) for every i <= horizon.
inline bool divisibility_property(const RationalSeries& S, unsigned n, const mpq_class& l, unsigned horizon) {
    const Prime p(S.p);
    const mpq_class slope = mpq_class(n) + l;
    for (std::size_t i = 0; i < S.coeffs.size() && i <= horizon; ++i) {
        const mpq_class scaled = S.coeffs[i] * p.pow(static_cast<unsigned long>(n) * i);
        const ExtValuation v = ord_p(scaled, p);
        if (v.is_infinite()) continue;
        if (mpz_class(v.value()) < ceil_q(slope * static_cast<unsigned long>(i))) return false;
    }
    return true;
}

/// Cauchy product over the common length.
inline RationalSeries cauchy_product(const RationalSeries& a, const RationalSeries& b) {
    RationalSeries r;
    r.p = a.p;
    r.n = a.n;
    r.provenance = "product";
    const std::size_t L = std::min(a.size(), b.size());
    r.coeffs.assign(L, 0);
    for (std::size_t k = 0; k < L; ++k)
        for (std::size_t j = 0; j <= k; ++j) r.coeffs[k] += a.coeffs[j] * b.coeffs[k - j];
    return r;
}

struct ValuationBound {
    /// Smallest a with ord_p(M_i) >= ceil((n + l') i - a) for all i <= horizon.
    long a = 0;
    /// ceil((n + l') i) - ord_p(M_i); empty for M_i = 0.
    std::vector<std::optional<long>> deficits;
    /// Running maximum of the deficits.
    std::vector<long> prefix_max;
    /// The running maximum over the full horizon equals the one over its first half.
    bool stable = true;
};

inline ValuationBound check_valuation_lower_bound(const std::vector<mpz_class>& counts, const Prime& p, unsigned n,
                                                  const mpq_class& l_prime, unsigned horizon) {
    ValuationBound out;
    const mpq_class slope = mpq_class(n) + l_prime;
    long running = std::numeric_limits<long>::min();
    const std::size_t last = std::min<std::size_t>(horizon, counts.empty() ? 0 : counts.size() - 1);
    for (std::size_t i = 0; i <= last && i < counts.size(); ++i) {
        const ExtValuation v = ord_p(counts[i], p);
        if (v.is_infinite()) {
            out.deficits.push_back(std::nullopt);
        } else {
            const long need = ceil_q(slope * static_cast<unsigned long>(i)).get_si();
            out.deficits.push_back(need - v.value());
            running = std::max(running, need - v.value());
        }
        out.prefix_max.push_back(running == std::numeric_limits<long>::min() ? 0 : running);
    }
    // a = 0 is always admissible when every count is zero (bounds vacuous);
    // M_0 = 1 forces a >= 0 otherwise.
    out.a = running == std::numeric_limits<long>::min() ? 0 : std::max(running, 0L);
    if (!out.prefix_max.empty()) {
        const std::size_t half = (out.prefix_max.size() - 1) / 2;
        out.stable = out.prefix_max.back() == out.prefix_max[half];
    }
    return out;
}

inline ValuationBound check_valuation_lower_bound(const CountTable& table, unsigned n, const mpq_class& l_prime,
                                                  unsigned horizon) {
    return check_valuation_lower_bound(table.zero_counts(), table.prime(), n, l_prime, horizon);
}

/// Progression iR + c along which M_j is not a multiple of p^ceil((n + l) j + a).
struct SharpnessWitness {
    unsigned R = 0;
    unsigned c = 0;
    long a = 0;
    std::vector<unsigned> verified_indices;
};

/// Searches R <= horizon/4, c < R for the progression with the smallest a
/// (ties: most indices, then smallest R, then smallest c). Needs at least
/// three indices on the progression; zero counts disqualify it.
inline std::optional<SharpnessWitness> find_sharpness_witness(const std::vector<mpz_class>& counts, const Prime& p,
                                                              unsigned n, const mpq_class& l, unsigned horizon) {
    constexpr std::size_t kMinIndices = 3;
    const std::size_t last = std::min<std::size_t>(horizon, counts.empty() ? 0 : counts.size() - 1);
    if (counts.empty()) return std::nullopt;
    const mpq_class slope = mpq_class(n) + l;
    std::optional<SharpnessWitness> best;
    for (unsigned R = 1; R <= horizon / 4; ++R) {
        for (unsigned c = 0; c < R; ++c) {
            SharpnessWitness w{R, c, 0, {}};
            long excess_max = std::numeric_limits<long>::min();
            bool valid = true;
            for (std::size_t j = c; j <= last; j += R) {
                const ExtValuation v = ord_p(counts[j], p);
                if (v.is_infinite()) {
                    valid = false;
                    break;
                }
                excess_max = std::max(excess_max, v.value() - ceil_q(slope * static_cast<unsigned long>(j)).get_si());
                w.verified_indices.push_back(static_cast<unsigned>(j));
            }
            if (!valid || w.verified_indices.size() < kMinIndices) continue;
            w.a = excess_max + 1;
            auto better = [&](const SharpnessWitness& x, const SharpnessWitness& y) {
                if (x.a != y.a) return x.a < y.a;
                if (x.verified_indices.size() != y.verified_indices.size())
                    return x.verified_indices.size() > y.verified_indices.size();
                return false;  // earlier (R, c) wins
            };
            if (!best || better(w, *best)) best = std::move(w);
        }
    }
    return best;
}

inline std::optional<SharpnessWitness> find_sharpness_witness(const CountTable& table, unsigned n, const mpq_class& l,
                                                              unsigned horizon) {
    return find_sharpness_witness(table.zero_counts(), table.prime(), n, l, horizon);
}

struct MinPoleEstimate {
    mpq_class slope;
    mpq_class estimate;  // slope - n
    /// Slope equals n, as for f = 0: no pole information.
    bool degenerate = false;
    unsigned from = 0, to = 0;  // hull segment used
};

/// Heuristic for l: slope of the longest segment of the lower convex
/// envelope of (i, ord_p M_i), minus n. Converges to l as the horizon grows.
inline std::optional<MinPoleEstimate> estimate_min_pole(const std::vector<mpz_class>& counts, const Prime& p,
                                                        unsigned n) {
    constexpr std::size_t kMinPoints = 6;
    std::vector<std::pair<long, long>> pts;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const ExtValuation v = ord_p(counts[i], p);
        if (v.is_finite()) pts.emplace_back(static_cast<long>(i), v.value());
    }
    if (pts.size() < kMinPoints) return std::nullopt;

    std::vector<std::pair<long, long>> hull;
    for (const auto& q : pts) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            const long cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
            if (cross <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(q);
    }
    std::size_t best = 0;
    long best_span = -1;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const long span = hull[k + 1].first - hull[k].first;
        if (span > best_span) {
            best_span = span;
            best = k;
        }
    }
    MinPoleEstimate e;
    e.from = static_cast<unsigned>(hull[best].first);
    e.to = static_cast<unsigned>(hull[best + 1].first);
    e.slope = mpq_class(mpz_class(hull[best + 1].second - hull[best].second), mpz_class(best_span));
    e.slope.canonicalize();
    e.estimate = e.slope - n;
    e.degenerate = e.slope == n;
    return e;
}

inline std::optional<MinPoleEstimate> estimate_min_pole(const CountTable& table, unsigned n) {
    return estimate_min_pole(table.zero_counts(), table.prime(), n);
}

}  // namespace igusa
