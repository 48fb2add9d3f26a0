#pragma once

#include "cmforge/matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmforge {

// Lattices are represented by basis rows. A matrix M acting "by rows" sends a
// row vector x to xM; the left kernel {x : xM = 0} is what kernel_lattice returns.

struct SNFResult {
    IntMatrix U, D, V;  // U*M*V = D
};
SNFResult smith_normal_form(const IntMatrix& M);

struct HNFResult {
    IntMatrix H, U;  // U*M = H
    std::size_t rank = 0;
};
HNFResult hermite_normal_form(const IntMatrix& M);

struct FGAbelianGroup {
    // d_1 | d_2 | ... ; 0 stands for a free factor Z; units are dropped.
    std::vector<Int> invariant_factors;

    bool trivial() const { return invariant_factors.empty(); }
    std::size_t free_rank() const;
    std::vector<Int> torsion() const;
    bool torsion_free() const { return torsion().empty(); }
    std::string to_string() const;
};

// Z^cols / rowspan(M)
FGAbelianGroup cokernel(const IntMatrix& M);

IntMatrix kernel_lattice(const IntMatrix& M);

// Nonzero rows of the HNF: canonical basis of the row span.
IntMatrix row_basis(const IntMatrix& M);

IntMatrix lattice_intersection(const IntMatrix& A, const IntMatrix& B);

// Column vectors f with O f = 0 for every operator O; basis returned as rows.
IntMatrix solution_sublattice(const std::vector<IntMatrix>& conditions, std::size_t ambient_rank);

std::size_t matrix_rank(const IntMatrix& M);
Int determinant(const IntMatrix& M);
Rat determinant(const RatMatrix& M);
bool is_unimodular(const IntMatrix& M);

// Row span of `rows` is saturated in Z^n (quotient torsion-free).
bool is_saturated(const IntMatrix& rows);

// Coordinates c with c * basis = v, if v lies in the row span over Z.
std::optional<std::vector<Int>> lattice_coordinates(const IntMatrix& basis, const std::vector<Int>& v);

// Unique solution X of A X = B over Q, or nullopt if inconsistent. Throws if
// the solution is not unique.
std::optional<RatMatrix> solve_unique(const RatMatrix& A, const RatMatrix& B);

// Solutions of A x = b over Q: particular solution and a nullspace basis (columns).
struct RatSolution {
    bool consistent = false;
    std::vector<Rat> particular;
    std::vector<std::vector<Rat>> nullspace;
};
RatSolution solve_rational(const RatMatrix& A, const std::vector<Rat>& b);

std::optional<RatMatrix> inverse(const RatMatrix& M);
IntMatrix inverse_unimodular(const IntMatrix& M);

// For a surjection P (rows x cols, integral) onto Z^rows, an integral R with P R = I.
IntMatrix right_inverse(const IntMatrix& P);

// Content (gcd of entries) of a vector.
Int content(const std::vector<Int>& v);

}  // namespace cmforge
