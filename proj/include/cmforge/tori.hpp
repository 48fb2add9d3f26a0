#pragma once

#include "cmforge/galois.hpp"
#include "cmforge/lattice.hpp"

#include <string>
#include <vector>

namespace cmforge {

// A torus is identified with its character lattice X^*(T), a free Z-module with
// an action of the scenario group (on coordinate columns).
class Torus {
public:
    Torus() = default;
    Torus(ScenarioPtr sc, std::vector<IntMatrix> action, std::vector<std::string> labels, std::string name);

    const std::string& name() const { return name_; }
    std::size_t rank() const { return lattice_.rank(); }
    const GModuleLattice& lattice() const { return lattice_; }
    const IntMatrix& action(int g) const { return lattice_.action(g); }
    const std::vector<std::string>& labels() const { return labels_; }
    ScenarioPtr scenario_ptr() const { return sc_; }
    const GaloisScenario& scenario() const { return *sc_; }

    // sigma acting on a cocharacter: A(sigma^{-1})^T mu
    std::vector<Int> act_cocharacter(int sigma, const std::vector<Int>& mu) const;

private:
    ScenarioPtr sc_;
    GModuleLattice lattice_;
    std::vector<std::string> labels_;
    std::string name_;
};

// Morphism source -> target, stored contravariantly: f_source = char_map * f_target
// (char_map is rank(source) x rank(target)).
struct TorusMorphism {
    Torus source, target;
    IntMatrix char_map;

    // Galois equivariance over every group element; throws InvariantError.
    void validate() const;
    // injective on tori <=> surjective on characters
    bool is_injective() const;
    // surjective on tori <=> injective on characters
    bool is_surjective() const;
    // rho_* nu for a cocharacter nu of the source
    std::vector<Int> push(const std::vector<Int>& nu) const { return char_map.transpose().apply(nu); }
};

// first then second
TorusMorphism compose(const TorusMorphism& first, const TorusMorphism& second);
TorusMorphism identity_morphism(const Torus& T);

struct Cocharacter {
    Torus torus;
    std::vector<Int> vector;
};

Int pairing(const Cocharacter& chi, const std::vector<Int>& f);
Subgroup cocharacter_stabilizer(const Torus& T, const std::vector<Int>& mu);
FieldHandle field_of_definition(const Cocharacter& mu);

Torus torus_of_field(const FieldHandle& K);
TorusMorphism norm_morphism(const FieldHandle& L, const FieldHandle& K);
Cocharacter mu_tau(const FieldHandle& K, std::size_t tau);
Cocharacter mu_tau(const FieldHandle& K);

Torus product_torus(const std::vector<Torus>& factors, const std::string& name = "");
// projection from a product onto factor i
TorusMorphism product_projection(const Torus& product, const std::vector<Torus>& factors, std::size_t i);

struct QuotientResult {
    Torus quotient;
    TorusMorphism projection;  // T -> quotient, char map = inclusion Y^T
};
// Quotient torus whose character lattice is the (saturated, Galois-stable)
// sublattice with basis rows `sub` of X^*(T).
QuotientResult quotient_torus(const Torus& T, const IntMatrix& sub, const std::string& name = "");

struct SubtorusResult {
    Torus subtorus;
    TorusMorphism inclusion;  // S -> T, char map = the given surjection
};
SubtorusResult subtorus_from_char_surjection(const Torus& T, const IntMatrix& surjection, const std::string& name = "");

}  // namespace cmforge
