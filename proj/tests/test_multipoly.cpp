#include "igusa/multipoly.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace igusa;

namespace {

MultiPoly x(unsigned n, unsigned j) { return MultiPoly::variable(n, j); }
MultiPoly c(unsigned n, long v) { return MultiPoly::constant(n, v); }

MultiPoly random_poly(std::mt19937_64& rng, unsigned n, unsigned max_deg, long coef_bound) {
    std::uniform_int_distribution<long> coef(-coef_bound, coef_bound);
    std::uniform_int_distribution<unsigned> deg(0, max_deg);
    std::uniform_int_distribution<int> count(1, 6);
    MultiPoly f(n);
    const int terms = count(rng);
    for (int t = 0; t < terms; ++t) {
        Exponents e(n, 0);
        unsigned budget = deg(rng);
        for (unsigned k = 0; k < budget; ++k) ++e[rng() % n];
        f.add_term(e, coef(rng));
    }
    return f;
}

}  // namespace

TEST(MultiPoly, NoZeroCoefficientsStored) {
    MultiPoly f(2);
    f.add_term({1, 0}, 3);
    f.add_term({1, 0}, -3);
    EXPECT_TRUE(f.is_zero());
    f.add_term({0, 2}, 0);
    EXPECT_EQ(f.size(), 0u);
    EXPECT_THROW(f.add_term({1}, 1), std::invalid_argument);
    EXPECT_THROW(MultiPoly(0), std::invalid_argument);
}

TEST(MultiPoly, Printing) {
    MultiPoly f = x(2, 0).pow(2) * x(2, 1) - c(2, 3) * x(2, 1) + c(2, 1);
    EXPECT_EQ(f.to_string(), "x1^2*x2 - 3*x2 + 1");
    EXPECT_EQ(MultiPoly(3).to_string(), "0");
    EXPECT_EQ((-x(1, 0)).to_string(), "-x1");
}

TEST(EvaluateMod, Examples) {
    const Modulus m8(Prime(2), 3);
    MultiPoly f = x(2, 0) * x(2, 1) + c(2, 1);
    std::vector<Residue> pt{Residue(2, m8), Residue(3, m8)};
    EXPECT_EQ(evaluate_mod(f, pt, m8).value(), 7);
    EXPECT_EQ(evaluate_mod(MultiPoly(2), pt, m8).value(), 0);

    const Modulus m3(Prime(3), 1);
    MultiPoly g = x(2, 0).pow(2) + x(2, 1).pow(2);
    std::vector<Residue> ones{Residue(1, m3), Residue(1, m3)};
    EXPECT_EQ(evaluate_mod(g, ones, m3).value(), 2);

    std::vector<Residue> short_pt{Residue(1, m3)};
    EXPECT_THROW(evaluate_mod(g, short_pt, m3), std::invalid_argument);
}

TEST(PartialDerivative, Examples) {
    EXPECT_EQ(partial_derivative(x(2, 0).pow(2) * x(2, 1), 0), c(2, 2) * x(2, 0) * x(2, 1));
    EXPECT_TRUE(partial_derivative(c(1, 5), 0).is_zero());
    EXPECT_EQ(partial_derivative(x(3, 0) * x(3, 1) + x(3, 2).pow(2), 2), c(3, 2) * x(3, 2));
    EXPECT_THROW(partial_derivative(c(2, 1), 2), std::out_of_range);
}

TEST(ShiftScale, Examples) {
    const mpz_class one[] = {1};
    EXPECT_EQ(shift_scale(x(1, 0).pow(2), one, 1, Prime(2)), c(1, 1) + c(1, 4) * x(1, 0) + c(1, 4) * x(1, 0).pow(2));

    const mpz_class zeros[] = {0, 0};
    EXPECT_EQ(shift_scale(x(2, 0) * x(2, 1), zeros, 1, Prime(3)), c(2, 9) * x(2, 0) * x(2, 1));

    const mpz_class two[] = {2};
    EXPECT_EQ(shift_scale(x(1, 0) + c(1, 2), two, 2, Prime(2)), c(1, 4) + c(1, 4) * x(1, 0));
}

TEST(ShiftScale, DimensionMismatch) {
    const mpz_class b[] = {1};
    EXPECT_THROW(shift_scale(x(2, 0), b, 1, Prime(2)), std::invalid_argument);
}

TEST(ShiftScale, LevelZeroIsTranslation) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<long> small(-5, 5);
    for (int t = 0; t < 100; ++t) {
        const unsigned n = 1 + t % 3;
        MultiPoly f = random_poly(rng, n, 4, 9);
        std::vector<mpz_class> b(n), z(n), bz(n);
        for (unsigned j = 0; j < n; ++j) {
            b[j] = small(rng);
            z[j] = small(rng);
            bz[j] = b[j] + z[j];
        }
        EXPECT_EQ(shift_scale(f, b, 0, Prime(3)).evaluate(z), f.evaluate(bz));
    }
}

TEST(ShiftScale, Composes) {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<long> small(-4, 4);
    for (std::uint64_t pv : {2, 3, 5}) {
        const Prime p(pv);
        for (int t = 0; t < 30; ++t) {
            const unsigned n = 1 + t % 3;
            MultiPoly f = random_poly(rng, n, 3, 9);
            std::vector<mpz_class> b(n), b2(n), combined(n);
            for (unsigned j = 0; j < n; ++j) {
                b[j] = small(rng);
                b2[j] = small(rng);
                combined[j] = b[j] + p.z() * b2[j];
            }
            EXPECT_EQ(shift_scale(shift_scale(f, b, 1, p), b2, 1, p), shift_scale(f, combined, 2, p));
        }
    }
}

TEST(ShiftScale, DegreeRCoefficientsHaveValuationR) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> small(-6, 6);
    for (std::uint64_t pv : {2, 3, 5}) {
        const Prime p(pv);
        for (int t = 0; t < 50; ++t) {
            const unsigned n = 1 + t % 3;
            MultiPoly f = random_poly(rng, n, 4, 9);
            std::vector<mpz_class> b(n);
            for (auto& v : b) v = small(rng);
            for (unsigned k = 1; k <= 2; ++k) {
                MultiPoly h = shift_scale(f, b, k, p);
                for (const auto& [e, coef] : h.terms()) {
                    const long r = MultiPoly::degree_of(e);
                    if (r == 0) continue;
                    EXPECT_GE(ord_p(coef, p), r * static_cast<long>(k));
                }
            }
        }
    }
}

TEST(Content, ValuationExamples) {
    EXPECT_EQ(content_valuation(c(2, 4) * x(2, 0) + c(2, 8) * x(2, 1).pow(2), Prime(2)), 2);
    EXPECT_TRUE(content_valuation(MultiPoly(2), Prime(3)).is_infinite());
    EXPECT_EQ(content_valuation(c(1, 3) * x(1, 0) + c(1, 1), Prime(3)), 0);
}

TEST(Content, DivideByPPower) {
    EXPECT_EQ(divide_by_p_power(c(1, 4) * x(1, 0) + c(1, 8), Prime(2), 2), x(1, 0) + c(1, 2));
    MultiPoly f = c(2, 6) * x(2, 0) - c(2, 1);
    EXPECT_EQ(divide_by_p_power(f, Prime(3), 0), f);
    EXPECT_EQ(divide_by_p_power(c(2, 9) * x(2, 0) * x(2, 1), Prime(3), 2), x(2, 0) * x(2, 1));
    try {
        divide_by_p_power(f, Prime(3), 1);
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_STREQ(e.what(), "content too small");
    }
}

TEST(Content, DivideThenMultiplyIsIdentity) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const Prime p(t % 2 ? 3 : 2);
        const unsigned k = t % 4;
        MultiPoly f = random_poly(rng, 2, 3, 20).scaled(p.pow(k));
        EXPECT_EQ(divide_by_p_power(f, p, k).scaled(p.pow(k)), f);
    }
}

TEST(MultiPoly, RingIdentities) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        MultiPoly a = random_poly(rng, 3, 3, 9), b = random_poly(rng, 3, 3, 9), d = random_poly(rng, 3, 2, 9);
        EXPECT_EQ(a * (b + d), a * b + a * d);
        EXPECT_TRUE((a - a).is_zero());
        EXPECT_EQ(a.pow(3), a * a * a);
        const mpz_class pt[] = {2, -1, 3};
        EXPECT_EQ((a * b).evaluate(pt), a.evaluate(pt) * b.evaluate(pt));
    }
}

TEST(MultiPoly, WidenedKeepsValues) {
    MultiPoly f = x(2, 0) * x(2, 1) + c(2, 7);
    MultiPoly g = f.widened(4);
    EXPECT_EQ(g.nvars(), 4u);
    const mpz_class pt[] = {3, 5, 11, 13};
    EXPECT_EQ(g.evaluate(pt), 22);
    EXPECT_THROW(g.widened(2), std::invalid_argument);
}
