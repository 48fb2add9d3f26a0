#include "cmforge/bc_system.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace cmforge;

namespace {

long order_mod(long p, long n) {
    if (n == 1) return 1;
    long r = p % n, k = 1;
    while (r != 1) {
        r = r * (p % n) % n;
        ++k;
    }
    return k;
}

long totient(long n) {
    long r = 0;
    for (long a = 1; a <= n; ++a) r += std::gcd(a, n) == 1;
    return r;
}

// (f, g) from the order of p modulo the prime-to-p part of n
std::pair<long, long> split_by_order(long n, long p) {
    while (n % p == 0) n /= p;
    long f = order_mod(p, n);
    return {f, totient(n) / f};
}

bool prime(long x) {
    if (x < 2) return false;
    for (long d = 2; d * d <= x; ++d)
        if (x % d == 0) return false;
    return true;
}

// (O/m)^x by exhaustive search for inverses, and its image of the unit generators
std::pair<std::size_t, std::size_t> brute_w(const BCField& K, const CyclotomicElement& m) {
    ResidueRing R(K, m);
    auto all = R.all();
    auto one = R.reduce(CyclotomicElement::rational(K.n, 1));
    std::set<std::vector<Int>> units;
    for (const auto& a : all)
        for (const auto& b : all)
            if (R.reduce(R.lift(a) * R.lift(b)) == one) {
                units.insert(a);
                break;
            }
    // subgroup generated by the unit generators, by repeated multiplication
    std::set<std::vector<Int>> image{one};
    bool grew = true;
    while (grew) {
        grew = false;
        for (auto x : std::vector<std::vector<Int>>(image.begin(), image.end()))
            for (const auto& u : K.unit_generators) grew |= image.insert(R.reduce(R.lift(x) * u)).second;
    }
    return {units.size(), image.size()};
}

BCParams params(const std::string& field, std::vector<Int> m, long bound, int cap) {
    BCParams p;
    p.field = field;
    p.modulus = std::move(m);
    p.bound = bound;
    p.cap = cap;
    return p;
}

// number of ideals of norm n in Q(i): sum over d | n of the character mod 4
long gaussian_ideal_count(long n) {
    long s = 0;
    for (long d = 1; d <= n; ++d)
        if (n % d == 0) s += d % 2 == 0 ? 0 : (d % 4 == 1 ? 1 : -1);
    return s;
}

// Dedekind zeta of Q(zeta5) as the product of the four Dirichlet L-series mod 5
std::vector<long> zeta5_ideal_counts(long B) {
    // chi_k(2^a) = i^(k a); 2 generates (Z/5)^x
    auto chi = [](int k, long n) -> std::complex<double> {
        if (n % 5 == 0) return k == 0 ? 1.0 : 0.0;
        long a = 0, x = 1;
        while (x != n % 5) {
            x = x * 2 % 5;
            ++a;
        }
        return std::pow(std::complex<double>(0, 1), static_cast<double>((k * a) % 4));
    };
    std::vector<std::complex<double>> acc(B + 1, 0);
    acc[1] = 1;
    for (int k = 0; k < 4; ++k) {
        std::vector<std::complex<double>> next(B + 1, 0);
        for (long a = 1; a <= B; ++a)
            for (long d = 1; a * d <= B; ++d) next[a * d] += acc[a] * chi(k, d);
        acc = next;
    }
    std::vector<long> out(B + 1);
    for (long n = 1; n <= B; ++n) out[n] = std::lround(acc[n].real());
    return out;
}

}  // namespace

TEST(BCField, Builtins) {
    EXPECT_EQ(bc_field("Q").degree, 1u);
    EXPECT_EQ(bc_field("qi").degree, 2u);
    auto K = bc_field("qzeta5");
    EXPECT_EQ(K.degree, 4u);
    EXPECT_EQ(K.unit_generators.size(), 2u);
    for (const auto& u : K.unit_generators) EXPECT_EQ(abs_int(num(u.norm())), 1);
    EXPECT_THROW(bc_field("qsqrt2"), ConfigError);
}

TEST(Splitting, AgreesWithFrobeniusOrder) {
    for (int n : {3, 4, 5, 7, 8, 9, 12, 15, 16, 20})
        for (long p = 2; p < 60; ++p) {
            if (!prime(p)) continue;
            auto [f, g] = splitting_type(n, p);
            auto [f2, g2] = split_by_order(n, p);
            EXPECT_EQ(f, f2) << "n=" << n << " p=" << p;
            EXPECT_EQ(g, g2) << "n=" << n << " p=" << p;
        }
    EXPECT_THROW(splitting_type(5, 9), PreconditionError);
}

TEST(PrimeIdeals, GaussianBoundTen) {
    auto P = prime_ideals(bc_field("qi"), 10);
    ASSERT_EQ(P.size(), 4u);
    auto g = [](int a, int b) { return CyclotomicElement::from_ints(4, {a, b}); };
    EXPECT_EQ(P[0].generator, g(1, 1));
    EXPECT_EQ(P[1].generator, g(2, 1));
    EXPECT_EQ(P[2].generator, g(2, -1));
    EXPECT_EQ(P[3].generator, g(3, 0));
    EXPECT_EQ(P[3].residue_degree, 2);
    EXPECT_EQ(P[3].norm, 9);
}

TEST(PrimeIdeals, CountsMatchSplittingForAllFields) {
    for (std::string name : {"Q", "qi", "qzeta5"}) {
        auto K = bc_field(name);
        for (long B : {10L, 30L}) {
            auto P = prime_ideals(K, B);
            std::size_t expected = 0;
            for (long p = 2; p <= B; ++p) {
                if (!prime(p)) continue;
                auto [f, g] = split_by_order(K.n, p);
                if (std::pow(p, f) <= B) expected += g;
            }
            EXPECT_EQ(P.size(), expected) << name << " B=" << B;
            for (std::size_t i = 0; i < P.size(); ++i) {
                EXPECT_EQ(abs_int(num(P[i].generator.norm())), P[i].norm);
                // distinct primes: no generator divides another of the same norm
                for (std::size_t j = 0; j < i; ++j)
                    if (P[j].norm == P[i].norm) EXPECT_FALSE((P[i].generator * P[j].generator.inverse()).is_integral());
            }
        }
    }
}

TEST(Shimura, SizesAgainstBruteForce) {
    struct Case {
        std::string field;
        std::vector<Int> m;
        std::size_t expected;
    } cases[] = {
        {"Q", {2}, 1}, {"Q", {5}, 2}, {"Q", {7}, 3}, {"Q", {12}, 2}, {"qi", {3}, 2},
        {"qi", {2, 1}, 1}, {"qi", {5}, 4}, {"qi", {4}, 2}, {"qzeta5", {2}, 1}, {"qzeta5", {3}, 2},
    };
    for (const auto& c : cases) {
        auto K = bc_field(c.field);
        auto m = CyclotomicElement::from_ints(K.n, [&] {
            auto v = c.m;
            v.resize(K.degree, 0);
            return v;
        }());
        ShimuraSet W(K, m);
        auto [units, image] = brute_w(K, m);
        EXPECT_EQ(W.size(), c.expected) << c.field;
        EXPECT_EQ(W.size() * image, units) << c.field;
        EXPECT_EQ(W.unit_residue_count(), units);
        EXPECT_EQ(W.class_of(CyclotomicElement::rational(K.n, 1)), W.identity());
        for (std::size_t a = 0; a < W.size(); ++a) {
            EXPECT_EQ(W.mul(static_cast<int>(a), W.inv(static_cast<int>(a))), 0);
            for (std::size_t b = 0; b < W.size(); ++b) EXPECT_EQ(W.mul(static_cast<int>(a), static_cast<int>(b)), W.mul(static_cast<int>(b), static_cast<int>(a)));
        }
    }
}

TEST(FiniteBC, ObjectAndArrowCounts) {
    FiniteBC q(params("Q", {2}, 3, 2));
    EXPECT_EQ(q.objects().size(), 9u);
    EXPECT_EQ(q.shimura().size(), 1u);
    FiniteBC g(params("qi", {3}, 10, 1));
    EXPECT_EQ(g.primes().size(), 4u);
    EXPECT_EQ(g.shimura().size(), 2u);
    EXPECT_EQ(g.objects().size(), 32u);
    EXPECT_EQ(g.arrows().size(), 512u);
    for (const auto& k : g.arrows()) {
        EXPECT_TRUE(g.valid(k));
        EXPECT_EQ(g.inverse(g.inverse(k)), k);
        EXPECT_EQ(g.source(g.inverse(k)), g.target(k));
    }
}

TEST(FiniteBC, ConfigurationErrors) {
    // 3 + 3i = 3 (1 + i) mixes two truncation primes
    EXPECT_THROW(FiniteBC(params("qi", {3, 3}, 10, 1)), ConfigError);
    EXPECT_THROW(FiniteBC(params("qi", {3}, 200, 3)), ConfigError);
    EXPECT_THROW(FiniteBC(params("qi", {0}, 10, 1)), ConfigError);
    EXPECT_THROW(FiniteBC(params("qi", {3}, 10, -1)), ConfigError);
}

TEST(FiniteBC, ArtinClassesOfPrimes) {
    // over Q with m = 5, the Artin class of p is p mod 5 up to sign
    FiniteBC bc(params("Q", {5}, 13, 1));
    const auto& W = bc.shimura();
    for (std::size_t i = 0; i < bc.primes().size(); ++i) {
        long p = bc.primes()[i].p;
        std::vector<int> e(bc.primes().size(), 0);
        e[i] = 1;
        if (p == 5) {
            EXPECT_THROW(W.class_of(CyclotomicElement::rational(2, 5)), PreconditionError);
            continue;
        }
        bool pm1 = p % 5 == 1 || p % 5 == 4;
        EXPECT_EQ(bc.artin(e) == W.identity(), pm1) << p;
    }
}

// hand-enumerated products in the Q, m = 5, primes {2, 3}, cap 1 model
TEST(Convolution, HandEnumeratedProducts) {
    FiniteBC bc(params("Q", {5}, 3, 1));
    ASSERT_EQ(bc.shimura().size(), 2u);
    ClassKey k1{{1, 0}, {0, 0}, 0};
    // target of k1 moves w by the inverse Artin class of 2, which is the nontrivial class
    EXPECT_EQ(bc.target(k1), (BCObject{{1, 0}, 1}));
    ClassKey id0{{0, 0}, {0, 0}, 0};
    auto d1 = delta(k1);
    EXPECT_EQ(convolve(bc, d1, delta(id0)), d1);
    EXPECT_TRUE(convolve(bc, delta(id0), d1).terms.empty());
    EXPECT_EQ(convolve(bc, delta(ClassKey{{0, 0}, {1, 0}, 1}), d1), d1);
    EXPECT_TRUE(convolve(bc, d1, d1).terms.empty());
    EXPECT_EQ(convolve(bc, delta(bc.inverse(k1)), d1), delta(id0));
    EXPECT_EQ(convolve(bc, d1, delta(bc.inverse(k1))), delta(ClassKey{{0, 0}, {1, 0}, 1}));
    // composite of the 2-arrow and the 3-arrow from (1,0)
    ClassKey k2{{0, 1}, {1, 0}, 1};
    auto prod = convolve(bc, delta(k2, Coefficient(GaussRat(2, 1))), delta(k1, Coefficient(GaussRat(0, 3))));
    ASSERT_EQ(prod.terms.size(), 1u);
    EXPECT_EQ(prod.terms.begin()->first, (ClassKey{{1, 1}, {0, 0}, 0}));
    EXPECT_EQ(prod.terms.begin()->second, Coefficient(GaussRat(-3, 6)));
    EXPECT_EQ(bc.target(prod.terms.begin()->first), (BCObject{{1, 1}, 0}));
    // sigma_t multiplies by N(g)^{it}: 2^{it} on k1
    auto s = time_evolution(bc, d1, Rat(1, 3));
    Phase ph{{2, Rat(1, 3)}};
    EXPECT_EQ(s, delta(k1, Coefficient(GaussRat(1), ph)));
    Complex z = s.terms.begin()->second.evaluate();
    EXPECT_NEAR(std::arg(z), std::log(2.0) / 3, 1e-12);
    EXPECT_EQ(involution(bc, s), delta(bc.inverse(k1), Coefficient(GaussRat(1), Phase{{2, Rat(-1, 3)}})));
}

TEST(Algebra, SuitesPassOnGaussianModel) {
    FiniteBC bc(params("qi", {3}, 10, 1));
    for (const auto& c : bc_algebra_suite(bc, 17, 150)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    for (const auto& c : bc_state_suite(bc, 17)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Algebra, SuitesPassOnRationalAndCyclotomicModels) {
    for (auto p : {params("Q", {5}, 7, 2), params("Q", {2}, 3, 2), params("qzeta5", {3}, 11, 1)}) {
        FiniteBC bc(p);
        for (const auto& c : bc_algebra_suite(bc, 23, 80)) EXPECT_TRUE(c.passed) << p.field << " " << c.name << ": " << c.detail;
        for (const auto& c : bc_state_suite(bc, 23)) EXPECT_TRUE(c.passed) << p.field << " " << c.name << ": " << c.detail;
    }
}

TEST(States, ValuesOnDeltas) {
    FiniteBC bc(params("qi", {3}, 10, 1));
    std::vector<int> z(4, 0);
    for (const auto& k : bc.arrows()) {
        auto f = delta(k, Coefficient(GaussRat(3, -1)));
        for (int w = 0; w < 2; ++w) {
            bool at_unit = k.e == z && k.v == z && k.w == w;
            EXPECT_EQ(kms_state(bc, w, f), at_unit ? Coefficient(GaussRat(3, -1)) : Coefficient());
        }
    }
    // the symmetry by the nontrivial unit class swaps the two states
    IdeleDatum nu{bc.shimura().rep(1), {}};
    EXPECT_EQ(act_on_state(bc, nu, 0), 1);
    EXPECT_EQ(act_on_state(bc, nu, 1), 0);
    // rho_omega(nu f) = rho_{omega nu^-1}(f) with the convention that nu moves w to w [nu]
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        auto f = random_element(bc, rng, 6);
        for (int w = 0; w < 2; ++w)
            EXPECT_EQ(kms_state(bc, act_on_state(bc, nu, w), symmetry_action(bc, nu, f)), kms_state(bc, w, f));
    }
}

TEST(Partition, RationalFieldExact) {
    auto r = partition_function("Q", 2, 10);
    ASSERT_TRUE(r.exact.has_value());
    Rat s = 0;
    for (long n = 1; n <= 10; ++n) s += Rat(1, n * n);
    EXPECT_EQ(*r.exact, s);
    EXPECT_EQ(*r.exact, Rat(1968329, 1270080));
    EXPECT_EQ(*r.exact_from_splitting, s);
    EXPECT_EQ(r.ideal_count, 10u);
}

TEST(Partition, GaussianAgainstCharacterSum) {
    auto r = partition_function("qi", 2, 10);
    Rat s = 0;
    std::size_t count = 0;
    for (long n = 1; n <= 10; ++n) {
        s += Rat(gaussian_ideal_count(n), n * n);
        count += gaussian_ideal_count(n);
    }
    EXPECT_EQ(*r.exact, s);
    EXPECT_EQ(*r.exact_from_splitting, s);
    EXPECT_EQ(r.ideal_count, count);
    EXPECT_NEAR(static_cast<double>(r.enumerated), 1.44047, 1e-5);
    // zeta_{Q(i)}(2) = zeta(2) G
    const double catalan = 0.915965594177219015;
    auto big = partition_function("qi", 2, 1000000);
    double target = M_PI * M_PI / 6 * catalan;
    EXPECT_NEAR(static_cast<double>(big.enumerated), target, 1e-3);
    EXPECT_LE(target - static_cast<double>(big.enumerated), big.tail_bound + 1e-12);
    EXPECT_GE(target - static_cast<double>(big.enumerated), 0);
    EXPECT_NEAR(static_cast<double>(big.from_splitting), static_cast<double>(big.enumerated), 1e-12);
}

TEST(Partition, CyclotomicFiveAgainstLSeries) {
    const long B = 400;
    auto counts = zeta5_ideal_counts(B);
    for (Rat beta : {Rat(2), Rat(3), Rat(5, 2)}) {
        auto r = partition_function("qzeta5", beta, B);
        long double s = 0;
        std::size_t total = 0;
        for (long n = 1; n <= B; ++n) {
            s += counts[n] * std::pow(static_cast<long double>(n), -beta.convert_to<long double>());
            total += counts[n];
        }
        EXPECT_NEAR(static_cast<double>(r.enumerated), static_cast<double>(s), 1e-12);
        EXPECT_NEAR(static_cast<double>(r.from_splitting), static_cast<double>(s), 1e-12);
        EXPECT_EQ(r.ideal_count, total);
        EXPECT_EQ(r.exact.has_value(), den(beta) == 1);
        if (r.exact) EXPECT_EQ(*r.exact, *r.exact_from_splitting);
        // truncated Euler product dominates the truncated sum and both sit below the full value
        EXPECT_GE(r.euler_product + 1e-15, r.enumerated);
        EXPECT_GT(r.tail_bound, 0);
    }
}

TEST(Partition, RejectsDivergentTemperatures) {
    EXPECT_THROW(partition_function("qi", 1, 10), PreconditionError);
    EXPECT_THROW(partition_function("qi", Rat(1, 2), 10), PreconditionError);
    EXPECT_THROW(partition_function("qi", 2, 0), PreconditionError);
}

TEST(Omega, IsAMultiplicativeEmbedding) {
    std::mt19937_64 rng(9);
    auto r = [&] { return Rat(static_cast<long>(rng() % 13) - 6, 1 + static_cast<long>(rng() % 3)); };
    RatMatrix J = standard_J(2);
    for (int t = 0; t < 100; ++t) {
        GaussRat a(r(), r()), b(r(), r());
        EXPECT_EQ(omega_group(a * b), omega_group(a) * omega_group(b));
        if (a.is_zero()) continue;
        auto g = gsp_check(omega_group(a), J);
        ASSERT_TRUE(g.has_value());
        EXPECT_EQ(g->nu, a.norm());
        // the CM point i is fixed
        EXPECT_EQ(mobius(omega_group(a), GaussRat(0, 1)), GaussRat(0, 1));
    }
}

TEST(Theta, ExamplesAndClassInvariance) {
    FiniteBC bc(params("qi", {3}, 10, 1));
    auto zero = std::vector<int>(4, 0);
    auto th = theta_map(bc, representative(bc, {zero, zero, 0}));
    EXPECT_EQ(th.point, GaussRat(0, 1));
    EXPECT_TRUE(th.alpha.is_identity());
    // l = (1 + i) at 2: q has similitude 2 and the translate is again a CM point by Z[i]
    RawArrow a;
    a.l_exp = {1, 0, 0, 0};
    auto t2 = theta_map(bc, a);
    auto g = gsp_check(t2.alpha, standard_J(2));
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(g->nu, 2);
    EXPECT_NEAR(j_function(t2.point.to_complex()).value.real(), 1728, 1e-6);
    EXPECT_EQ(t2.key.w, bc.artin({1, 0, 0, 0}));
    for (const auto& [p, m] : t2.g_beta_inv) EXPECT_TRUE(t2.beta_rho.count(p));
    EXPECT_THROW(theta_map(FiniteBC(params("Q", {5}, 3, 1)), RawArrow{}), PreconditionError);
}

TEST(Theta, DecompositionChoiceChangesOnlyByModularGroup) {
    FiniteBC bc(params("qi", {3}, 10, 1));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 25; ++t) {
        RawArrow a;
        a.l_exp.resize(4);
        for (auto& x : a.l_exp) x = static_cast<int>(rng() % 5) - 2;
        auto t0 = theta_map(bc, a, 0), t1 = theta_map(bc, a, 1 + t);
        RatMatrix d = *inverse(t0.alpha) * t1.alpha;
        EXPECT_TRUE(is_integral(d));
        EXPECT_EQ(determinant(d), 1);
        EXPECT_EQ(mobius(*inverse(d), t0.point), t1.point);
    }
}

TEST(PropertyV, JPullbackOnGaussianModel) {
    FiniteBC bc(params("qi", {3}, 10, 1));
    auto rep = property_v_report(bc, j_oracle(), 8, 15);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    ASSERT_EQ(rep.states.size(), 2u);
    for (const auto& s : rep.states) {
        EXPECT_NEAR(s.value.real(), 1728, 1e-6);
        EXPECT_TRUE(s.fixed_by_symmetries);
    }
    EXPECT_EQ(rep.translate_point, GaussRat(0, 2));
    EXPECT_NEAR(rep.translate_value.real(), 287496, 1e-3);
    auto ae = arithmetic_element(bc, constant_oracle(5.0));
    std::vector<int> z(4, 0);
    for (const auto& [k, v] : ae.values) EXPECT_EQ(v, (k.e == z && k.v == z) ? Complex(5.0) : Complex(0.0));
}
