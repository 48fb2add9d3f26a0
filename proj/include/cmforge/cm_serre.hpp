#pragma once

#include "cmforge/checks.hpp"
#include "cmforge/tori.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cmforge {

struct CMType {
    FieldHandle field;
    std::vector<std::size_t> phi;  // sorted embedding indices of `field`

    std::vector<Int> indicator() const;
    std::string to_string() const;
    friend bool operator==(const CMType& a, const CMType& b) { return a.field == b.field && a.phi == b.phi; }
};

// Validates the half-system property.
CMType make_cm_type(const FieldHandle& E, std::vector<std::size_t> phi);
std::vector<CMType> enumerate_cm_types(const FieldHandle& E);
CMType induced_type(const CMType& t, const FieldHandle& L);
bool is_primitive(const CMType& t);
FieldHandle reflex_field(const CMType& t);
Cocharacter mu_phi(const CMType& t);

// Operators whose common kernel is the Serre sublattice; act on character columns.
std::vector<IntMatrix> serre_operators_on_characters(const Torus& T);
// Serre condition for a cocharacter; returns a violating group element if any.
std::optional<int> serre_violation(const Torus& T, const std::vector<Int>& mu);

struct SerreGroup {
    FieldHandle K;
    std::size_t tau = 0;
    Torus T;                  // T^K
    IntMatrix sublattice;     // X^*(S^K) inside X^*(T^K), basis rows
    Torus S;                  // S^K
    TorusMorphism projection; // pi^K : T^K -> S^K
    std::vector<Int> mu;      // mu^K
    std::pair<std::vector<Int>, std::vector<Int>> h_pair;  // (mu^K, iota mu^K)
};

SerreGroup serre_group(const FieldHandle& K, std::optional<std::size_t> tau = std::nullopt);

// Unique rho : S^K -> T with rho o mu^K = mu. Throws PreconditionError naming the
// failing group element when mu is not defined over K or violates the Serre condition.
TorusMorphism universal_rho(const SerreGroup& S, const Torus& T, const std::vector<Int>& mu);

TorusMorphism rho_phi(const CMType& t);
TorusMorphism reflex_norm(const CMType& t);

// Nm_{K/Q} o Res_{K/Q}(mu) : T^K -> T for a cocharacter mu of T defined over K;
// character map [f] -> sum over embeddings sigma of <sigma mu, f> [sigma].
TorusMorphism norm_of_restriction(const FieldHandle& K, const Torus& T, const std::vector<Int>& mu);

// Morphism S^{K'} -> S^K induced by the norm, K subset of K'.
TorusMorphism serre_norm(const SerreGroup& big, const SerreGroup& small);

struct SerreKernelReport {
    bool exact = false;
    std::string detail;
};
SerreKernelReport serre_kernel_check(const FieldHandle& K);

// Diagram checks for a pair of nested fields (small subset of big) and, when
// supplied, a CM type whose reflex field lies in `small`.
std::vector<CheckResult> serre_property_suite(const FieldHandle& big, const FieldHandle& small,
                                              const std::optional<CMType>& type = std::nullopt);

// Composite of norm-restriction maps: Nm_{L'}Res(mu) versus Nm_{L*}Res(mu) o N_{L'/L*}.
CheckResult composite_norm_check(const CMType& t, const FieldHandle& Lprime);

}  // namespace cmforge
