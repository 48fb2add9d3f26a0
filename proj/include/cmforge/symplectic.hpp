#pragma once

#include "cmforge/checks.hpp"
#include "cmforge/cm_serre.hpp"
#include "cmforge/cyclotomic.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cmforge {

// Totally imaginary generator of a CM field realized inside Q(zeta_n). Candidates are
// Tr_{L/E}(zeta^a - zeta^-a) for a = 1..n-1, then x - x^iota for small integral x in O_E
// ordered by height; the first generator wins and is divided by its content. With
// `positive_for` set, only generators with Im phi(xi) > 0 for every phi in the type are accepted.
CyclotomicElement totally_imaginary_generator(const FieldHandle& E, const std::optional<CMType>& positive_for = std::nullopt,
                                              int height_bound = 3);

struct SymplecticSummand {
    FieldHandle field;
    CyclotomicElement xi;
    IntMatrix basis;  // Z-basis of O_E, rows in power-basis coordinates
};

// V = direct sum of the E_i with psi = sum Tr_{E_i/Q}(xi_i x y^iota). Coordinates are taken
// with respect to the concatenated O_{E_i} bases, so L_E is Z^dim.
struct SymplecticSpace {
    int n = 0;
    std::vector<SymplecticSummand> summands;
    RatMatrix gram;

    std::size_t dim() const { return gram.rows(); }
    std::size_t offset(std::size_t i) const;
    Rat psi(const std::vector<Rat>& x, const std::vector<Rat>& y) const;
    CyclotomicElement element(std::size_t i, const std::vector<Rat>& coords) const;
    // coordinates of x in E_i (throws if x is not in E_i)
    std::vector<Rat> coordinates(std::size_t i, const CyclotomicElement& x) const;
    // matrix of multiplication by y_i on the i-th summand, block diagonal over summands
    RatMatrix multiplication_matrix(const std::vector<CyclotomicElement>& ys) const;
};

SymplecticSpace build_symplectic(const std::vector<FieldHandle>& fields, const std::vector<CyclotomicElement>& xis);

RatMatrix standard_J(std::size_t dim);

struct IntegralSymplecticBasis {
    Rat q;                              // xi = q^-2 xi~
    SymplecticSpace space;              // rescaled generators
    IntMatrix basis;                    // rows, coordinates in L_E
    std::vector<std::vector<Rat>> rational_basis;  // hyperbolic basis before scaling
};
IntegralSymplecticBasis integral_symplectic_basis(const SymplecticSpace& space);

struct GSpElement {
    RatMatrix matrix;
    Rat nu;
};
// M^T G M = nu G for the gram G
std::optional<GSpElement> gsp_check(const RatMatrix& M, const RatMatrix& gram);

struct ScriptT {
    FieldHandle E;
    Torus torus;
    TorusMorphism inclusion;  // scriptT -> T^E
    IntMatrix killed;         // characters of T^E trivial on scriptT (rows)
};
ScriptT script_T_subtorus(const FieldHandle& E);
bool in_script_T(const CyclotomicElement& x, const FieldHandle& E);

struct CMPointData {
    FieldHandle E;
    std::vector<CMType> collection;
    std::vector<Torus> factors;  // T^{E_i}
    Torus product;               // prod T^{E_i}
    std::vector<Int> mu_cm;      // prod mu_{Phi_i}
    std::pair<std::vector<Int>, std::vector<Int>> h_cm;
    FieldHandle E_tilde;         // compositum of the reflex fields
    TorusMorphism injmap;        // S^E -> prod T^{E_i}
};
CMPointData build_cm_point(const FieldHandle& E);

// T^K -> prod T^{E_i} along the Serre groups
TorusMorphism phi_morphism(const FieldHandle& K, const CMPointData& cp);
// prod N_{K/E_i*} followed by prod N_{Phi_i}
TorusMorphism phi_explicit(const FieldHandle& K, const CMPointData& cp);
// Nm_{K/Q} o Res_{K/Q}(mu_cm')
TorusMorphism eta_morphism(const FieldHandle& K, const CMPointData& cp);
// Image of a point x in K^x under a morphism T^K -> prod T^{E_i}: one element of each E_i.
std::vector<CyclotomicElement> torus_point_image(const TorusMorphism& m, const FieldHandle& K, const CMPointData& cp,
                                                 const CyclotomicElement& x);

struct PhiEtaReport {
    TorusMorphism phi, explicit_phi, eta;
    std::vector<CheckResult> checks;
};
PhiEtaReport phi_eta_suite(const FieldHandle& K);

// Finite adele of GSp: local parts at the primes of `support`, `tail` at every other prime.
struct AdelicGSp {
    std::map<long, RatMatrix> local;
    RatMatrix tail;
};

struct GSpDecomposition {
    GSpElement q;                           // rational, nu > 0
    std::map<long, RatMatrix> gamma_local;  // gamma_p = q^-1 f_p
    RatMatrix gamma_tail;                   // q^-1 tail
};

// Rational p-adic valuation (p prime, x != 0).
long padic_valuation(const Rat& x, long p);
bool is_p_integral(const RatMatrix& M, long p);

// f = q gamma with q in GSp(Q)^+ and gamma integral with unit similitude at every prime.
// `gram` must be integral, alternating and unimodular. A nonzero `variant` picks a different
// starting basis for the lattice, which changes q by an element of Sp(Z).
GSpDecomposition decompose_gsp(const AdelicGSp& f, const RatMatrix& gram, unsigned variant = 0);
// Verifies the round trip and the local conditions; detail names the failing prime.
CheckResult verify_decomposition(const AdelicGSp& f, const GSpDecomposition& d, const RatMatrix& gram);

// Matrix modulo rational scalars: integral, content 1, first nonzero entry positive.
IntMatrix adjoint_project(const RatMatrix& g);

enum class LevelGroup { IntegralUnitSimilitude, Trivial };
struct CriterionReport {
    bool condition_negative_similitude = false;
    bool condition_single_class = false;
    std::size_t samples = 0;
    std::string counterexample;
    bool passed() const { return condition_negative_similitude && condition_single_class; }
};
CriterionReport criterion_check(const RatMatrix& gram, LevelGroup level, std::size_t samples, unsigned long seed,
                                const std::vector<long>& primes = {2, 3, 5, 7, 11, 13}, int max_valuation = 3);
// Random element of GSp(Q_p) with Z[1/p] entries, built from integral symplectic generators
// and diagonal similitudes; used as a sampler.
RatMatrix random_local_gsp(const RatMatrix& gram, long p, int max_valuation, unsigned long seed);

}  // namespace cmforge
