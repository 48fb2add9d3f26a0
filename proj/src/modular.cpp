#include "cmforge/modular.hpp"

#include <cmath>

namespace cmforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinImag = 1e-9;

// sum_{n=1}^{terms} sigma_k(n) q^n, plus a bound for the tail sum_{n>terms} n^{k+1} |q|^n
std::pair<Complex, double> divisor_series(const Complex& q, int k, int terms) {
    Complex s = 0, qn = 1;
    for (int n = 1; n <= terms; ++n) {
        qn *= q;
        double sig = 0;
        for (int d = 1; d <= n; ++d)
            if (n % d == 0) sig += std::pow(static_cast<double>(d), k);
        s += sig * qn;
    }
    double r = std::abs(q);
    // sigma_k(n) <= n^(k+1); past `terms` consecutive ratios are at most ratio0 < 1
    double ratio0 = std::pow(static_cast<double>(terms + 2) / (terms + 1), k + 1) * r;
    double first = std::pow(static_cast<double>(terms + 1), k + 1) * std::pow(r, terms + 1);
    double tail = ratio0 < 1 ? first / (1 - ratio0) : INFINITY;
    return {s, tail};
}

void require_upper(const Complex& z) {
    if (!(z.imag() > kMinImag)) throw PrecisionError("point " + std::to_string(z.real()) + " + " + std::to_string(z.imag()) +
                                                     "i is too close to the real axis for the q-series");
}

}  // namespace

GaussRat GaussRat::inverse() const {
    Rat n = norm();
    if (n == 0) throw PreconditionError("inverse of zero in Q(i)");
    return {re / n, -im / n};
}

std::string GaussRat::to_string() const {
    return cmforge::to_string(re) + (im < 0 ? " - " : " + ") + cmforge::to_string(im < 0 ? Rat(-im) : im) + "i";
}

GaussRat mobius(const RatMatrix& g, const GaussRat& z) {
    if (g.rows() != 2 || g.cols() != 2) throw PreconditionError("mobius: 2x2 matrix expected");
    GaussRat num = GaussRat(g(0, 0)) * z + GaussRat(g(0, 1));
    GaussRat den = GaussRat(g(1, 0)) * z + GaussRat(g(1, 1));
    return num / den;
}

Complex mobius(const RatMatrix& g, const Complex& z) {
    auto d = [&](int i, int j) { return g(i, j).convert_to<double>(); };
    return (d(0, 0) * z + d(0, 1)) / (d(1, 0) * z + d(1, 1));
}

Complex reduce_to_fundamental_domain(const Complex& z0) {
    require_upper(z0);
    Complex z = z0;
    for (int it = 0; it < 10000; ++it) {
        z -= std::floor(z.real() + 0.5);
        if (std::norm(z) < 1 - 1e-15) {
            z = -1.0 / z;
            continue;
        }
        return z;
    }
    throw PrecisionError("reduction to the fundamental domain did not terminate");
}

Complex eisenstein_e4(const Complex& z, int terms) {
    require_upper(z);
    Complex q = std::exp(Complex(0, 2 * kPi) * z);
    return 1.0 + 240.0 * divisor_series(q, 3, terms).first;
}

Complex eisenstein_e6(const Complex& z, int terms) {
    require_upper(z);
    Complex q = std::exp(Complex(0, 2 * kPi) * z);
    return 1.0 - 504.0 * divisor_series(q, 5, terms).first;
}

JValue j_function(const Complex& z, int terms) {
    if (terms < 1) throw PreconditionError("j_function: at least one q-series term is required");
    Complex w = reduce_to_fundamental_domain(z);
    Complex q = std::exp(Complex(0, 2 * kPi) * w);
    auto [s4, t4] = divisor_series(q, 3, terms);
    auto [s6, t6] = divisor_series(q, 5, terms);
    Complex e4 = 1.0 + 240.0 * s4, e6 = 1.0 - 504.0 * s6;
    Complex e43 = e4 * e4 * e4;
    Complex delta = e43 - e6 * e6;  // 1728 Delta
    if (std::abs(delta) < 1e-300) throw PrecisionError("discriminant vanishes numerically");
    JValue out;
    out.value = 1728.0 * e43 / delta;
    out.reduced = w;
    // first-order propagation of the truncation error through 1728 E4^3 / (E4^3 - E6^2)
    double de4 = 240 * t4, de6 = 504 * t6;
    double a = std::abs(e4), b = std::abs(e6), D = std::abs(delta);
    double dnum = 3 * a * a * de4, dden = 3 * a * a * de4 + 2 * b * de6;
    out.tail_bound = 1728 * (dnum / D + std::abs(e43) * dden / (D * D));
    return out;
}

ModularFunctionOracle j_oracle(int terms) {
    if (terms < 1) throw PreconditionError("j_oracle: at least one q-series term is required");
    return {"j", "SL2(Z)", true, [terms](const Complex& z) { return j_function(z, terms).value; }};
}

ModularFunctionOracle constant_oracle(Complex value) {
    return {"constant", "GL2(Q)+", true, [value](const Complex& z) {
                require_upper(z);
                return value;
            }};
}

}  // namespace cmforge
