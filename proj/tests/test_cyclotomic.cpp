#include "cmforge/cm_serre.hpp"
#include "cmforge/cyclotomic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace cmforge;

namespace {

CyclotomicElement random_element(int n, std::mt19937_64& rng, int box = 3) {
    auto F = CyclotomicField::get(n);
    std::vector<Rat> c(F->degree());
    for (auto& x : c) x = Rat(static_cast<long>(rng() % (2 * box + 1)) - box);
    return CyclotomicElement(F, c);
}

}  // namespace

TEST(Cyclotomic, PolynomialsVanishAtPrimitiveRoots) {
    for (int n = 1; n <= 60; ++n) {
        auto F = CyclotomicField::get(n);
        int phi = 0;
        for (int a = 1; a <= n; ++a) phi += std::gcd(a, n) == 1;
        ASSERT_EQ(static_cast<int>(F->degree()), phi);
        std::complex<double> z = std::polar(1.0, 2 * std::acos(-1.0) / n), v = 0, p = 1;
        for (const auto& c : F->polynomial()) {
            v += c.convert_to<double>() * p;
            p *= z;
        }
        EXPECT_LT(std::abs(v), 1e-6) << n;
    }
    EXPECT_EQ(CyclotomicField::get(12)->polynomial(), (std::vector<Int>{1, 0, -1, 0, 1}));
}

TEST(Cyclotomic, ArithmeticIsARingHomomorphismIntoC) {
    std::mt19937_64 rng(5);
    for (int n : {4, 5, 7, 12, 15}) {
        for (int t = 0; t < 10; ++t) {
            auto x = random_element(n, rng), y = random_element(n, rng);
            for (int a = 1; a < n; ++a) {
                if (std::gcd(a, n) != 1) continue;
                EXPECT_LT(std::abs((x * y).to_complex(a) - x.to_complex(a) * y.to_complex(a)), 1e-9);
                EXPECT_LT(std::abs((x + y).to_complex(a) - x.to_complex(a) - y.to_complex(a)), 1e-9);
                // sigma_a(x) evaluated at zeta equals x evaluated at zeta^a
                EXPECT_LT(std::abs(x.galois(a).to_complex(1) - x.to_complex(a)), 1e-9);
            }
            std::complex<double> tr = 0;
            for (int a : CyclotomicField::get(n)->units()) tr += x.to_complex(a);
            EXPECT_LT(std::abs(tr - x.trace().convert_to<double>()), 1e-9);
            if (!x.is_zero()) EXPECT_EQ(x * x.inverse(), CyclotomicElement::rational(n, 1));
        }
    }
}

TEST(Cyclotomic, Examples) {
    auto z = CyclotomicElement::zeta(5);
    auto one = CyclotomicElement::rational(5, 1);
    EXPECT_EQ((one + z).norm(), 1);
    auto s = (one + z) * (one + z).conj();
    EXPECT_FALSE(s.is_rational());
    EXPECT_TRUE((z * z.conj()).is_rational());
    auto i = CyclotomicElement::zeta(4);
    EXPECT_EQ(i * i, CyclotomicElement::rational(4, -1));
    EXPECT_EQ(i.pow(-1), -i);
    EXPECT_EQ((CyclotomicElement::rational(4, 1) + Rat(2) * i).norm(), 5);
}

TEST(Cyclotomic, IntegerRings) {
    auto s4 = cyclotomic_scenario(4);
    EXPECT_TRUE(integer_ring_basis(ambient_field(s4)).is_identity());
    auto s5 = cyclotomic_scenario(5);
    FieldHandle F = maximal_totally_real_subfield(ambient_field(s5));
    IntMatrix OF = integer_ring_basis(F);
    ASSERT_EQ(OF.rows(), 2u);
    // Z[(1+sqrt5)/2] = span{1, zeta + zeta^4}
    auto golden = CyclotomicElement::zeta(5, 1) + CyclotomicElement::zeta(5, 4);
    std::vector<Int> g;
    for (const auto& c : golden.coeffs()) g.push_back(num(c));
    IntMatrix expect = row_basis(IntMatrix::from_rows({{1, 0, 0, 0}, g}));
    EXPECT_EQ(row_basis(OF), expect);
    for (int n : {12, 15, 16, 20}) {
        auto sc = cyclotomic_scenario(n);
        for (const auto& H : sc->group().all_subgroups()) {
            FieldHandle E(sc, H);
            EXPECT_EQ(integer_ring_basis(E).rows(), E.degree()) << n;
        }
    }
}

// Point-level reflex norm through the determinant description: over L = Q(zeta_n),
// V (x) L splits into lines indexed by pairs (sigma in Emb(E*), phi in Phi) on which
// e in E acts by (sigma~ phi)(e) and a in E* acts by sigma(a). The E (x) L-determinant of a
// at the identity embedding of E is the product of sigma(a) over lines with sigma~ phi = id.
TEST(ReflexNormDeterminant, RandomPointsMatchCharacterMap) {
    std::mt19937_64 rng(2024);
    for (int n : {4, 5, 7, 12}) {
        auto sc = cyclotomic_scenario(n);
        const auto& G = sc->group();
        for (const auto& H : G.all_subgroups()) {
            FieldHandle E(sc, H);
            if (!is_cm(E)) continue;
            auto types = enumerate_cm_types(E);
            if (types.size() > 8) types.resize(8);
            for (const auto& t : types) {
                FieldHandle Es = reflex_field(t);
                auto N = reflex_norm(t);
                IntMatrix Ob = integer_ring_basis(Es);
                for (int trial = 0; trial < 20; ++trial) {
                    std::vector<Int> coef(Ob.cols(), 0);
                    for (std::size_t r = 0; r < Ob.rows(); ++r) {
                        Int c = Int(static_cast<int>(rng() % 7) - 3);
                        for (std::size_t j = 0; j < Ob.cols(); ++j) coef[j] += c * Ob(r, j);
                    }
                    auto a = CyclotomicElement::from_ints(n, coef);
                    if (a.is_zero()) continue;
                    // determinant side
                    CyclotomicElement det = CyclotomicElement::rational(n, 1);
                    for (std::size_t s = 0; s < Es.degree(); ++s)
                        for (auto phi : t.phi) {
                            int lift = Es.representative(s);
                            if (E.act(lift, phi) == E.embedding_of(G.identity())) det = det * embed(a, Es, s);
                        }
                    ASSERT_TRUE(lies_in(det, E));
                    // character-map side: rho(N(a)) = prod_sigma sigma(a)^{C[sigma][rho]}
                    for (std::size_t rho = 0; rho < E.degree(); ++rho) {
                        CyclotomicElement img = CyclotomicElement::rational(n, 1);
                        for (std::size_t s = 0; s < Es.degree(); ++s)
                            img = img * embed(a, Es, s).pow(N.char_map(s, rho).convert_to<long>());
                        ASSERT_EQ(embed(det, E, rho), img) << "n=" << n << " " << t.to_string();
                    }
                }
            }
        }
    }
}
