#pragma once

#include "cmforge/arith.hpp"
#include "cmforge/matrix.hpp"

#include <complex>
#include <functional>
#include <string>

namespace cmforge {

using Complex = std::complex<double>;

// Exact element a + b i of Q(i); used for points of the upper half plane that arise as
// rational Mobius translates of i.
struct GaussRat {
    Rat re = 0, im = 0;

    GaussRat() = default;
    GaussRat(Rat a, Rat b = 0) : re(std::move(a)), im(std::move(b)) {}

    GaussRat conj() const { return {re, -im}; }
    Rat norm() const { return re * re + im * im; }
    GaussRat inverse() const;
    Complex to_complex() const { return {re.convert_to<double>(), im.convert_to<double>()}; }
    std::string to_string() const;
    bool is_zero() const { return re == 0 && im == 0; }

    friend GaussRat operator+(const GaussRat& a, const GaussRat& b) { return {a.re + b.re, a.im + b.im}; }
    friend GaussRat operator-(const GaussRat& a, const GaussRat& b) { return {a.re - b.re, a.im - b.im}; }
    friend GaussRat operator*(const GaussRat& a, const GaussRat& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussRat operator/(const GaussRat& a, const GaussRat& b) { return a * b.inverse(); }
    friend bool operator==(const GaussRat& a, const GaussRat& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }
    friend bool operator<(const GaussRat& a, const GaussRat& b) { return a.re != b.re ? a.re < b.re : a.im < b.im; }
};

// (a z + b) / (c z + d) for a rational 2x2 matrix
GaussRat mobius(const RatMatrix& g, const GaussRat& z);
Complex mobius(const RatMatrix& g, const Complex& z);

// Partial function on the upper half plane, invariant under the declared group.
struct ModularFunctionOracle {
    std::string name;
    std::string invariance;   // e.g. "SL2(Z)"
    bool rational_coefficients = true;
    std::function<Complex(const Complex&)> eval;  // throws PrecisionError when undefined
};

struct JValue {
    Complex value;
    double tail_bound;   // bound on the dropped q-series terms after reduction
    Complex reduced;     // representative in the standard fundamental domain
};

// j = 1728 E4^3 / (E4^3 - E6^2) through q-series truncated after `terms` terms, evaluated
// after moving z into the fundamental domain.
JValue j_function(const Complex& z, int terms = 30);
Complex eisenstein_e4(const Complex& z, int terms = 30);
Complex eisenstein_e6(const Complex& z, int terms = 30);
Complex reduce_to_fundamental_domain(const Complex& z);

ModularFunctionOracle j_oracle(int terms = 30);
ModularFunctionOracle constant_oracle(Complex value = 1.0);

}  // namespace cmforge
