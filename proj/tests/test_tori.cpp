#include "cmforge/tori.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace cmforge;

TEST(TorusOfField, RanksAndActions) {
    auto s4 = cyclotomic_scenario(4);
    Torus TQ = torus_of_field(rational_field(s4));
    EXPECT_EQ(TQ.rank(), 1u);
    for (int g = 0; g < 2; ++g) EXPECT_TRUE(TQ.action(g).is_identity());

    Torus TQi = torus_of_field(ambient_field(s4));
    EXPECT_EQ(TQi.rank(), 2u);
    EXPECT_EQ(TQi.action(s4->iota()), (IntMatrix{{0, 1}, {1, 0}}));

    auto sc = builtin_scenario("qi-cbrt2");
    FieldHandle K = field(sc, "K");
    // oracle: count distinct left cosets gH as sets
    std::set<std::set<int>> cosets;
    for (int g = 0; g < 12; ++g) {
        std::set<int> c;
        for (int h : K.subgroup()) c.insert(sc->group().mul(g, h));
        cosets.insert(c);
    }
    Torus TK = torus_of_field(K);
    EXPECT_EQ(TK.rank(), cosets.size());
    EXPECT_EQ(TK.rank(), 6u);
    for (int g = 0; g < 12; ++g) {
        const auto& A = TK.action(g);
        for (std::size_t j = 0; j < 6; ++j) {
            Int colsum = 0;
            for (std::size_t i = 0; i < 6; ++i) colsum += A(i, j);
            EXPECT_EQ(colsum, 1);
        }
    }
}

TEST(NormMorphism, Examples) {
    auto s5 = cyclotomic_scenario(5);
    auto N = norm_morphism(ambient_field(s5), rational_field(s5));
    EXPECT_EQ(N.char_map, (IntMatrix{{1}, {1}, {1}, {1}}));
    auto Id = norm_morphism(ambient_field(s5), ambient_field(s5));
    EXPECT_TRUE(Id.char_map.is_identity());

    auto sc = builtin_scenario("qi-cbrt2");
    auto NKE = norm_morphism(field(sc, "K"), field(sc, "E"));
    for (std::size_t j = 0; j < 2; ++j) {
        Int fiber = 0;
        for (std::size_t i = 0; i < 6; ++i) fiber += NKE.char_map(i, j);
        EXPECT_EQ(fiber, 3);
    }
    EXPECT_THROW(norm_morphism(field(sc, "E"), field(sc, "K")), PreconditionError);
}

TEST(NormMorphism, FunctorialOnTowers) {
    for (const std::string name : {"cyclo-12", "cyclo-24", "qi-cbrt2", "d4-cm"}) {
        auto sc = builtin_scenario(name);
        auto subs = sc->group().all_subgroups();
        for (const auto& HM : subs)
            for (const auto& HL : subs)
                for (const auto& HK : subs) {
                    if (!subgroup_contains(HL, HM) || !subgroup_contains(HK, HL)) continue;
                    FieldHandle M(sc, HM), L(sc, HL), K(sc, HK);
                    auto direct = norm_morphism(M, K);
                    auto composite = compose(norm_morphism(M, L), norm_morphism(L, K));
                    ASSERT_EQ(direct.char_map, composite.char_map) << name;
                }
    }
}

TEST(Pairing, Examples) {
    auto s5 = cyclotomic_scenario(5);
    FieldHandle E = ambient_field(s5);
    auto mu = mu_tau(E, 0);
    EXPECT_EQ(pairing(mu, {1, 0, 0, 0}), 1);
    EXPECT_EQ(pairing(mu, {0, 0, 0, 0}), 0);
    // <mu_tau, sum n_sigma [sigma]> = n_tau
    std::mt19937_64 rng(3);
    for (int t = 0; t < 4; ++t) {
        auto m = mu_tau(E, t);
        std::vector<Int> f{Int(rng() % 7), Int(rng() % 7), Int(rng() % 7), Int(rng() % 7)};
        EXPECT_EQ(pairing(m, f), f[t]);
    }
}

TEST(Pairing, GaloisInvariant) {
    auto sc = builtin_scenario("qi-cbrt2");
    Torus T = torus_of_field(field(sc, "K"));
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Int> chi(6), f(6);
        for (auto& x : chi) x = Int(static_cast<int>(rng() % 11) - 5);
        for (auto& x : f) x = Int(static_cast<int>(rng() % 11) - 5);
        Cocharacter c{T, chi};
        for (int s = 0; s < 12; ++s) {
            Cocharacter sc_{T, T.act_cocharacter(s, chi)};
            ASSERT_EQ(pairing(sc_, T.action(s).apply(f)), pairing(c, f));
        }
    }
}

TEST(MuTau, Examples) {
    auto s4 = cyclotomic_scenario(4);
    EXPECT_EQ(mu_tau(rational_field(s4)).vector, (std::vector<Int>{1}));
    EXPECT_EQ(mu_tau(ambient_field(s4)).vector, (std::vector<Int>{1, 0}));
    auto s5 = cyclotomic_scenario(5);
    EXPECT_EQ(field_of_definition(mu_tau(ambient_field(s5), 0)), ambient_field(s5));
}

TEST(ProductsAndQuotients, Examples) {
    auto s5 = cyclotomic_scenario(5);
    Torus G1 = torus_of_field(rational_field(s5));
    Torus P = product_torus({G1, G1});
    EXPECT_EQ(P.rank(), 2u);
    EXPECT_NO_THROW(product_projection(P, {G1, G1}, 1));

    Torus T = torus_of_field(ambient_field(s5));
    auto zero = quotient_torus(T, IntMatrix(0, 4));
    EXPECT_EQ(zero.quotient.rank(), 0u);
    auto full = quotient_torus(T, IntMatrix::identity(4));
    EXPECT_EQ(full.quotient.rank(), 4u);
    EXPECT_TRUE(full.projection.char_map.is_identity());

    IntMatrix serre = solution_sublattice({IntMatrix{{1, -1, -1, 1}}}, 4);
    auto S = quotient_torus(T, serre, "S");
    EXPECT_EQ(S.quotient.rank(), 3u);
    // quotient map is surjective on tori (its character map is injective)
    EXPECT_TRUE(S.projection.is_surjective());

    EXPECT_THROW(quotient_torus(T, Int(2) * IntMatrix::identity(4)), PreconditionError);
    EXPECT_THROW(quotient_torus(T, IntMatrix{{1, 0, 0, 0}}), PreconditionError);
}

TEST(ProductsAndQuotients, InjectivityViaCokernel) {
    auto sc = builtin_scenario("qi-cbrt2");
    FieldHandle K = field(sc, "K"), E = field(sc, "E");
    auto N = norm_morphism(K, E);
    EXPECT_FALSE(N.is_injective());
    EXPECT_TRUE(N.is_surjective());
    // inclusion T^E -> T^K (E^x inside K^x): restriction of characters
    TorusMorphism inc{torus_of_field(E), torus_of_field(K), N.char_map.transpose()};
    EXPECT_NO_THROW(inc.validate());
    EXPECT_TRUE(inc.is_injective());
}

TEST(ProductsAndQuotients, Subtorus) {
    auto s4 = cyclotomic_scenario(4);
    Torus T = torus_of_field(ambient_field(s4));
    auto S = subtorus_from_char_surjection(T, IntMatrix{{1, 1}});
    EXPECT_EQ(S.subtorus.rank(), 1u);
    EXPECT_TRUE(S.subtorus.action(s4->iota()).is_identity());
    EXPECT_TRUE(S.inclusion.is_injective());

    auto s5 = cyclotomic_scenario(5);
    EXPECT_THROW(subtorus_from_char_surjection(torus_of_field(ambient_field(s5)), IntMatrix{{1, 0, 0, 0}}), PreconditionError);
}
