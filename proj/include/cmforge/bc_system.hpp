#pragma once

#include "cmforge/checks.hpp"
#include "cmforge/cyclotomic.hpp"
#include "cmforge/modular.hpp"
#include "cmforge/symplectic.hpp"

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cmforge {

// Class-number-one builtin fields with O_K = Z[zeta_n]: "Q" (n = 2), "qi" (n = 4), "qzeta5" (n = 5).
struct BCField {
    std::string name;
    int n = 0;
    std::size_t degree = 0;
    std::vector<CyclotomicElement> unit_generators;
};
BCField bc_field(const std::string& name);

struct PrimeIdeal {
    CyclotomicElement generator;
    long p = 0;
    int residue_degree = 0;
    Int norm;
};

// Splitting of p in Z[zeta_n] read off from the factorization of Phi_n mod p:
// (residue degree f, number of primes g). Ramified primes report the single prime above p.
std::pair<int, int> splitting_type(int n, long p);
// Prime ideals of norm <= bound, each with its deterministic generator, ordered by norm
// and then by descending coefficient vector.
std::vector<PrimeIdeal> prime_ideals(const BCField& K, long bound);

// O_K / m O_K with canonical coordinate representatives.
class ResidueRing {
public:
    ResidueRing(const BCField& K, const CyclotomicElement& m);
    std::vector<Int> reduce(const CyclotomicElement& x) const;
    CyclotomicElement lift(const std::vector<Int>& r) const;
    std::vector<std::vector<Int>> all() const;
    std::vector<std::vector<Int>> units() const;
    Int size() const;
    const CyclotomicElement& modulus() const { return m_; }

private:
    int n_;
    CyclotomicElement m_;
    IntMatrix H_;  // HNF rows of m O_K
};

// W_m = (O_K/m)^x / image of the global units.
class ShimuraSet {
public:
    ShimuraSet(const BCField& K, const CyclotomicElement& m);
    std::size_t size() const { return reps_.size(); }
    // class of x, which must be prime to m
    int class_of(const CyclotomicElement& x) const;
    int mul(int a, int b) const { return table_[a][b]; }
    int inv(int a) const;
    int identity() const { return 0; }
    std::string label(int c) const;
    const std::vector<Int>& rep(int c) const { return reps_.at(c); }
    const ResidueRing& ring() const { return ring_; }
    std::size_t unit_residue_count() const { return residue_class_.size(); }
    std::size_t unit_image_size() const { return unit_image_; }

private:
    ResidueRing ring_;
    std::map<std::vector<Int>, int> residue_class_;
    std::vector<std::vector<Int>> reps_;
    std::vector<std::vector<int>> table_;
    std::size_t unit_image_ = 0;
};

struct BCParams {
    std::string field = "qi";
    std::vector<Int> modulus{3};  // power-basis coordinates of m
    long bound = 10;
    int cap = 1;
};

// Gamma^2-orbit class of an arrow: g = pi^e (unit part normalized away), rho = pi^v with
// 0 <= v, v + e <= cap, and w the class of the source point in W_m.
struct ClassKey {
    std::vector<int> e, v;
    int w = 0;
    friend bool operator<(const ClassKey& a, const ClassKey& b) {
        if (a.e != b.e) return a.e < b.e;
        if (a.v != b.v) return a.v < b.v;
        return a.w < b.w;
    }
    friend bool operator==(const ClassKey& a, const ClassKey& b) { return a.e == b.e && a.v == b.v && a.w == b.w; }
    std::string to_string() const;
};

struct BCObject {
    std::vector<int> v;
    int w = 0;
    friend bool operator==(const BCObject& a, const BCObject& b) { return a.v == b.v && a.w == b.w; }
};

class FiniteBC {
public:
    explicit FiniteBC(const BCParams& params);

    const BCParams& params() const { return params_; }
    const BCField& field() const { return field_; }
    const std::vector<PrimeIdeal>& primes() const { return primes_; }
    const ShimuraSet& shimura() const { return W_; }
    const CyclotomicElement& working_modulus() const { return M_; }

    std::vector<BCObject> objects() const;
    std::vector<ClassKey> arrows() const;
    bool valid(const ClassKey& k) const;
    BCObject source(const ClassKey& k) const { return {k.v, k.w}; }
    BCObject target(const ClassKey& k) const;
    ClassKey inverse(const ClassKey& k) const;
    // Artin class of the idele prod pi^e
    int artin(const std::vector<int>& e) const;
    // class of a unit idele whose components at the places above m are u (mod m)
    int unit_idele_class(const CyclotomicElement& u) const;
    Rat norm_of(const std::vector<int>& e) const;  // N(g) = prod N(pi)^e

private:
    BCParams params_;
    BCField field_;
    std::vector<PrimeIdeal> primes_;
    ShimuraSet W_;
    std::vector<int> art_prime_;
    CyclotomicElement M_;
};

// prod p^{i s_p}: kept symbolic so the time evolution stays exact
using Phase = std::map<long, Rat>;

class Coefficient {
public:
    Coefficient() = default;
    Coefficient(const GaussRat& c, Phase ph = {});
    const std::map<Phase, GaussRat>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    Coefficient conj() const;
    Coefficient with_phase(const Phase& ph) const;
    Complex evaluate() const;
    std::string to_string() const;

    friend Coefficient operator+(const Coefficient& a, const Coefficient& b);
    friend Coefficient operator*(const Coefficient& a, const Coefficient& b);
    friend bool operator==(const Coefficient& a, const Coefficient& b) { return a.t_ == b.t_; }

private:
    std::map<Phase, GaussRat> t_;
    void add(const Phase& ph, const GaussRat& c);
};

struct AlgebraElement {
    std::map<ClassKey, Coefficient> terms;

    void add(const ClassKey& k, const Coefficient& c);
    Coefficient at(const ClassKey& k) const;
    friend bool operator==(const AlgebraElement& a, const AlgebraElement& b) { return a.terms == b.terms; }
    friend AlgebraElement operator+(const AlgebraElement& a, const AlgebraElement& b);
};

AlgebraElement scale(const AlgebraElement& f, const Coefficient& c);
AlgebraElement delta(const ClassKey& k, const Coefficient& c = Coefficient(GaussRat(1)));
AlgebraElement identity_element(const FiniteBC& bc);
AlgebraElement convolve(const FiniteBC& bc, const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement involution(const FiniteBC& bc, const AlgebraElement& f);
// sigma_t f = N(g)^{it} f
AlgebraElement time_evolution(const FiniteBC& bc, const AlgebraElement& f, const Rat& t);

// Idele class datum: unit part at the places above m and exponents at the truncation primes.
struct IdeleDatum {
    std::vector<Int> unit;       // coordinates of a residue prime to m; empty means 1
    std::vector<int> exponents;  // empty means zero
};
int idele_class(const FiniteBC& bc, const IdeleDatum& nu);
AlgebraElement symmetry_action(const FiniteBC& bc, const IdeleDatum& nu, const AlgebraElement& f);
// rho_omega(f) = f(1, 1, omega)
Coefficient kms_state(const FiniteBC& bc, int omega, const AlgebraElement& f);
// class index of the state nu . rho_omega
int act_on_state(const FiniteBC& bc, const IdeleDatum& nu, int omega);

struct PartitionResult {
    std::string field;
    Rat beta;
    long bound = 0;
    std::size_t ideal_count = 0;
    std::optional<Rat> exact;                 // ideal enumeration, when beta is an integer and bound is small
    std::optional<Rat> exact_from_splitting;  // same sum from the Euler-factor coefficients
    long double enumerated = 0;
    long double from_splitting = 0;
    long double euler_product = 0;            // product over primes of norm <= bound
    double tail_bound = 0;                    // bound on sum_{N(a) > bound} N(a)^-beta
};
PartitionResult partition_function(const std::string& field, const Rat& beta, long bound);

// ---- the Q(i) pipeline: Omega, Theta and arithmetic elements ----

// Arrow before normalization: units are residues mod m, exponents over the truncation primes.
struct RawArrow {
    std::vector<Int> g_unit, rho_unit, l_unit;
    std::vector<int> e, v, l_exp;
};
ClassKey normalize(const FiniteBC& bc, const RawArrow& a);
// Representative raw arrow of a class.
RawArrow representative(const FiniteBC& bc, const ClassKey& k);

// n (x) (a + bi) -> multiplication matrix on the basis {1, i}
RatMatrix omega_group(const GaussRat& x);

struct ThetaImage {
    ClassKey key;
    GSpDecomposition decomposition;  // phi(l) = alpha beta
    RatMatrix alpha;
    GaussRat point;                  // alpha^-1 x_cm
    IntMatrix adjoint_class;         // alpha modulo scalars
    std::map<long, RatMatrix> g_beta_inv, beta_rho;
};
ThetaImage theta_map(const FiniteBC& bc, const RawArrow& a, unsigned variant = 0);

struct ArithmeticElement {
    std::string oracle;
    std::map<ClassKey, Complex> values;  // zero off the unit part
};
ArithmeticElement arithmetic_element(const FiniteBC& bc, const ModularFunctionOracle& f);

struct StateValue {
    int omega = 0;
    Complex value;
    bool fixed_by_symmetries = false;
};
struct PropertyVReport {
    std::vector<StateValue> states;
    // the oracle at diag(2,1) x_cm, a translate outside the image of Theta
    GaussRat translate_point;
    Complex translate_value;
    std::vector<CheckResult> checks;
};
PropertyVReport property_v_report(const FiniteBC& bc, const ModularFunctionOracle& f, unsigned long seed, int moves = 20);

// Randomized *-algebra and time-evolution checks.
std::vector<CheckResult> bc_algebra_suite(const FiniteBC& bc, unsigned long seed, int triples = 200);
// Extremal KMS_infinity states and the symmetry action on them.
std::vector<CheckResult> bc_state_suite(const FiniteBC& bc, unsigned long seed);

AlgebraElement random_element(const FiniteBC& bc, std::mt19937_64& rng, int terms = 3, bool phases = true);

}  // namespace cmforge
