#pragma once

#include "cmforge/galois.hpp"
#include "cmforge/lattice.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace cmforge {

// Q(zeta_n) = Q[x]/Phi_n(x) with the power basis 1, x, ..., x^{phi(n)-1}.
class CyclotomicField {
public:
    static std::shared_ptr<const CyclotomicField> get(int n);

    int n() const { return n_; }
    std::size_t degree() const { return deg_; }
    // coefficients of Phi_n, low degree first
    const std::vector<Int>& polynomial() const { return phi_; }
    // x^k reduced modulo Phi_n, any integer k
    const std::vector<Int>& power(long k) const;
    // Tr_{Q(zeta_n)/Q}(zeta^k)
    Int trace_of_power(long k) const;
    std::vector<int> units() const;
    // matrix of x -> x^a on coordinate columns (integral)
    const IntMatrix& galois_matrix(int a) const;

    explicit CyclotomicField(int n);

private:
    int n_;
    std::size_t deg_;
    std::vector<Int> phi_;
    std::vector<std::vector<Int>> powers_;  // k = 0..n-1
    mutable std::vector<IntMatrix> galois_;  // indexed by a, filled lazily
    mutable std::vector<bool> galois_ready_;
};

using CyclotomicFieldPtr = std::shared_ptr<const CyclotomicField>;

class CyclotomicElement {
public:
    CyclotomicElement() = default;
    CyclotomicElement(CyclotomicFieldPtr f, std::vector<Rat> coeffs);

    static CyclotomicElement zero(int n);
    static CyclotomicElement rational(int n, const Rat& r);
    static CyclotomicElement zeta(int n, long k = 1);
    static CyclotomicElement from_ints(int n, const std::vector<Int>& coeffs);

    int n() const { return field_->n(); }
    const CyclotomicField& field() const { return *field_; }
    CyclotomicFieldPtr field_ptr() const { return field_; }
    const std::vector<Rat>& coeffs() const { return c_; }

    bool is_zero() const;
    bool is_rational() const;
    Rat rational_value() const;  // throws unless is_rational()
    bool is_integral() const;     // in Z[zeta_n]

    CyclotomicElement galois(int a) const;  // zeta -> zeta^a
    CyclotomicElement conj() const { return galois(n() - 1); }
    Rat trace() const;
    Rat norm() const;
    CyclotomicElement inverse() const;
    CyclotomicElement pow(long e) const;
    // matrix of multiplication by this element on coordinate columns
    RatMatrix multiplication_matrix() const;
    // value under zeta -> exp(2 pi i a / n)
    std::complex<double> to_complex(int a = 1) const;
    std::string to_string() const;

    friend CyclotomicElement operator+(const CyclotomicElement& a, const CyclotomicElement& b);
    friend CyclotomicElement operator-(const CyclotomicElement& a, const CyclotomicElement& b);
    friend CyclotomicElement operator*(const CyclotomicElement& a, const CyclotomicElement& b);
    friend CyclotomicElement operator*(const Rat& s, const CyclotomicElement& a);
    CyclotomicElement operator-() const;
    friend bool operator==(const CyclotomicElement& a, const CyclotomicElement& b);
    friend bool operator!=(const CyclotomicElement& a, const CyclotomicElement& b) { return !(a == b); }

private:
    CyclotomicFieldPtr field_;
    std::vector<Rat> c_;
};

// Residue a in (Z/n)^x attached to a group element of a cyclotomic scenario.
int residue_of(const GaloisScenario& sc, int g);
std::vector<int> residues_of(const FieldHandle& E);  // residues of the subgroup H
int cyclotomic_level(const FieldHandle& E);  // throws PreconditionError unless cyclotomic

bool lies_in(const CyclotomicElement& x, const FieldHandle& E);
// Tr_{L/E} for L = Q(zeta_n), E = L^H
CyclotomicElement relative_trace(const CyclotomicElement& x, const FieldHandle& E);
// Tr_{E/Q}(x) for x in E
Rat field_trace(const CyclotomicElement& x, const FieldHandle& E);
// Image of x under the embedding k of E (as an element of L through its coset representative).
CyclotomicElement embed(const CyclotomicElement& x, const FieldHandle& E, std::size_t k);
// Z-basis of O_E = E cap Z[zeta_n], rows in power-basis coordinates.
IntMatrix integer_ring_basis(const FieldHandle& E);
// Number of distinct conjugates of x under Gal(L/Q) / H; equals [E:Q] iff x generates E.
std::size_t conjugate_count(const CyclotomicElement& x, const FieldHandle& E);

}  // namespace cmforge
