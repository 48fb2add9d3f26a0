#include "cmforge/cyclotomic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace cmforge {

namespace {

using Poly = std::vector<Int>;

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// exact division of integer polynomials (divisor monic)
Poly poly_div(Poly a, const Poly& b) {
    trim(a);
    Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, 0);
    while (a.size() >= b.size() && !a.empty()) {
        std::size_t shift = a.size() - b.size();
        Int c = a.back();
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        trim(a);
    }
    if (!a.empty()) throw InvariantError("cyclotomic polynomial division left a remainder");
    return q;
}

Poly cyclotomic_poly(int n) {
    // x^n - 1 divided by Phi_d for proper divisors d
    Poly p(n + 1, 0);
    p[0] = -1;
    p[n] = 1;
    for (int d = 1; d < n; ++d)
        if (n % d == 0) p = poly_div(p, cyclotomic_poly(d));
    return p;
}

int euler_phi(int n) {
    int r = 0;
    for (int a = 1; a <= n; ++a)
        if (std::gcd(a, n) == 1) ++r;
    return r;
}

long mod(long a, long n) { return ((a % n) + n) % n; }

}  // namespace

CyclotomicField::CyclotomicField(int n) : n_(n) {
    if (n < 1) throw PreconditionError("cyclotomic level must be positive");
    phi_ = cyclotomic_poly(n);
    deg_ = phi_.size() - 1;
    if (static_cast<int>(deg_) != euler_phi(n)) throw InvariantError("cyclotomic polynomial has wrong degree");
    powers_.assign(n, Poly(deg_, 0));
    Poly cur(deg_, 0);
    cur[0] = 1;
    if (deg_ == 0) cur.clear();
    for (int k = 0; k < n; ++k) {
        powers_[k] = cur;
        // multiply by x and reduce with the monic Phi_n
        Poly next(deg_, 0);
        Int top = deg_ ? cur[deg_ - 1] : Int(0);
        for (std::size_t i = deg_; i-- > 1;) next[i] = cur[i - 1];
        for (std::size_t i = 0; i < deg_; ++i) next[i] -= top * phi_[i];
        cur = next;
    }
    galois_.resize(n);
    galois_ready_.assign(n, false);
}

std::shared_ptr<const CyclotomicField> CyclotomicField::get(int n) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const CyclotomicField>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto f = std::make_shared<const CyclotomicField>(n);
    cache[n] = f;
    return f;
}

const std::vector<Int>& CyclotomicField::power(long k) const { return powers_[mod(k, n_)]; }

Int CyclotomicField::trace_of_power(long k) const {
    // Ramanujan sum c_n(k) = mu(n/d) phi(n)/phi(n/d), d = gcd(n,k)
    int d = std::gcd(static_cast<int>(mod(k, n_)), n_);
    if (d == 0) d = n_;
    int m = n_ / d;
    int mu = 1, r = m;
    for (int p = 2; p * p <= r; ++p) {
        if (r % p) continue;
        r /= p;
        if (r % p == 0) return 0;
        mu = -mu;
    }
    if (r > 1) mu = -mu;
    return Int(mu * (static_cast<int>(deg_) / euler_phi(m)));
}

std::vector<int> CyclotomicField::units() const {
    std::vector<int> u;
    for (int a = 1; a <= n_; ++a)
        if (std::gcd(a, n_) == 1) u.push_back(a % n_);
    std::sort(u.begin(), u.end());
    return u;
}

const IntMatrix& CyclotomicField::galois_matrix(int a) const {
    a = static_cast<int>(mod(a, n_));
    if (std::gcd(a, n_) != 1 && n_ > 1) throw PreconditionError("Galois exponent not coprime to n");
    // filled once per exponent; callers only read afterwards
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (!galois_ready_[a]) {
        IntMatrix G(deg_, deg_);
        for (std::size_t j = 0; j < deg_; ++j) {
            const auto& col = power(static_cast<long>(a) * static_cast<long>(j));
            for (std::size_t i = 0; i < deg_; ++i) G(i, j) = col[i];
        }
        galois_[a] = G;
        galois_ready_[a] = true;
    }
    return galois_[a];
}

CyclotomicElement::CyclotomicElement(CyclotomicFieldPtr f, std::vector<Rat> coeffs) : field_(std::move(f)), c_(std::move(coeffs)) {
    if (c_.size() != field_->degree()) throw PreconditionError("coefficient vector has wrong length");
}

CyclotomicElement CyclotomicElement::zero(int n) {
    auto f = CyclotomicField::get(n);
    return CyclotomicElement(f, std::vector<Rat>(f->degree(), 0));
}

CyclotomicElement CyclotomicElement::rational(int n, const Rat& r) {
    auto e = zero(n);
    e.c_[0] = r;
    return e;
}

CyclotomicElement CyclotomicElement::zeta(int n, long k) {
    auto f = CyclotomicField::get(n);
    const auto& p = f->power(k);
    return CyclotomicElement(f, std::vector<Rat>(p.begin(), p.end()));
}

CyclotomicElement CyclotomicElement::from_ints(int n, const std::vector<Int>& coeffs) {
    auto f = CyclotomicField::get(n);
    return CyclotomicElement(f, std::vector<Rat>(coeffs.begin(), coeffs.end()));
}

bool CyclotomicElement::is_zero() const {
    for (const auto& c : c_)
        if (c != 0) return false;
    return true;
}

bool CyclotomicElement::is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
        if (c_[i] != 0) return false;
    return true;
}

Rat CyclotomicElement::rational_value() const {
    if (!is_rational()) throw PreconditionError("element " + to_string() + " is not rational");
    return c_.empty() ? Rat(0) : c_[0];
}

bool CyclotomicElement::is_integral() const {
    for (const auto& c : c_)
        if (!cmforge::is_integral(c)) return false;
    return true;
}

CyclotomicElement CyclotomicElement::galois(int a) const {
    const IntMatrix& G = field_->galois_matrix(a);
    std::vector<Rat> out(c_.size(), 0);
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (c_[j] == 0) continue;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (G(i, j) != 0) out[i] += Rat(G(i, j)) * c_[j];
    }
    return CyclotomicElement(field_, std::move(out));
}

Rat CyclotomicElement::trace() const {
    Rat t = 0;
    for (std::size_t k = 0; k < c_.size(); ++k)
        if (c_[k] != 0) t += c_[k] * Rat(field_->trace_of_power(static_cast<long>(k)));
    return t;
}

Rat CyclotomicElement::norm() const {
    CyclotomicElement p = rational(n(), 1);
    for (int a : field_->units()) p = p * galois(a);
    return p.rational_value();
}

CyclotomicElement CyclotomicElement::inverse() const {
    if (is_zero()) throw PreconditionError("zero has no inverse");
    // x^{-1} = (product of the other conjugates) / N(x)
    CyclotomicElement p = rational(n(), 1);
    for (int a : field_->units())
        if (a != 1 % n()) p = p * galois(a);
    Rat N = (p * *this).rational_value();
    return (Rat(1) / N) * p;
}

CyclotomicElement CyclotomicElement::pow(long e) const {
    CyclotomicElement base = e < 0 ? inverse() : *this;
    unsigned long k = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    CyclotomicElement r = rational(n(), 1);
    while (k) {
        if (k & 1) r = r * base;
        base = base * base;
        k >>= 1;
    }
    return r;
}

RatMatrix CyclotomicElement::multiplication_matrix() const {
    std::size_t d = c_.size();
    RatMatrix M(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        auto col = (*this * zeta(n(), static_cast<long>(j))).coeffs();
        for (std::size_t i = 0; i < d; ++i) M(i, j) = col[i];
    }
    return M;
}

std::complex<double> CyclotomicElement::to_complex(int a) const {
    std::complex<double> z = 0;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (std::size_t k = 0; k < c_.size(); ++k) {
        if (c_[k] == 0) continue;
        double ang = two_pi * static_cast<double>(a) * static_cast<double>(k) / n();
        z += c_[k].convert_to<double>() * std::polar(1.0, ang);
    }
    return z;
}

std::string CyclotomicElement::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < c_.size(); ++k) {
        if (c_[k] == 0) continue;
        if (!first) os << (c_[k] < 0 ? " - " : " + ");
        else if (c_[k] < 0) os << "-";
        Rat a = c_[k] < 0 ? Rat(-c_[k]) : c_[k];
        bool unit = a == 1 && k > 0;
        if (!unit) os << cmforge::to_string(a);
        if (k > 0) os << (unit ? "" : "*") << "z" << (k > 1 ? "^" + std::to_string(k) : "");
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

CyclotomicElement operator+(const CyclotomicElement& a, const CyclotomicElement& b) {
    if (a.n() != b.n()) throw PreconditionError("elements of different cyclotomic fields");
    std::vector<Rat> c = a.c_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.c_[i];
    return CyclotomicElement(a.field_, std::move(c));
}

CyclotomicElement operator-(const CyclotomicElement& a, const CyclotomicElement& b) { return a + (-b); }

CyclotomicElement CyclotomicElement::operator-() const {
    std::vector<Rat> c = c_;
    for (auto& x : c) x = -x;
    return CyclotomicElement(field_, std::move(c));
}

CyclotomicElement operator*(const CyclotomicElement& a, const CyclotomicElement& b) {
    if (a.n() != b.n()) throw PreconditionError("elements of different cyclotomic fields");
    std::size_t d = a.c_.size();
    std::vector<Rat> raw(d ? 2 * d - 1 : 0, 0);
    for (std::size_t i = 0; i < d; ++i) {
        if (a.c_[i] == 0) continue;
        for (std::size_t j = 0; j < d; ++j)
            if (b.c_[j] != 0) raw[i + j] += a.c_[i] * b.c_[j];
    }
    std::vector<Rat> out(d, 0);
    for (std::size_t k = 0; k < raw.size(); ++k) {
        if (raw[k] == 0) continue;
        const auto& p = a.field_->power(static_cast<long>(k));
        for (std::size_t i = 0; i < d; ++i)
            if (p[i] != 0) out[i] += raw[k] * Rat(p[i]);
    }
    return CyclotomicElement(a.field_, std::move(out));
}

CyclotomicElement operator*(const Rat& s, const CyclotomicElement& a) {
    std::vector<Rat> c = a.c_;
    for (auto& x : c) x *= s;
    return CyclotomicElement(a.field_, std::move(c));
}

bool operator==(const CyclotomicElement& a, const CyclotomicElement& b) { return a.n() == b.n() && a.c_ == b.c_; }

int residue_of(const GaloisScenario& sc, int g) {
    if (!sc.cyclotomic_n()) throw PreconditionError("scenario '" + sc.name() + "' has no cyclotomic realization");
    return std::stoi(sc.group().label(g));
}

int cyclotomic_level(const FieldHandle& E) {
    auto n = E.scenario().cyclotomic_n();
    if (!n) throw PreconditionError("field " + E.name() + " of scenario '" + E.scenario().name() + "' has no cyclotomic realization");
    return *n;
}

std::vector<int> residues_of(const FieldHandle& E) {
    cyclotomic_level(E);
    std::vector<int> r;
    for (int h : E.subgroup()) r.push_back(residue_of(E.scenario(), h));
    return r;
}

bool lies_in(const CyclotomicElement& x, const FieldHandle& E) {
    if (x.n() != cyclotomic_level(E)) throw PreconditionError("element and field live in different cyclotomic fields");
    for (int a : residues_of(E))
        if (x.galois(a) != x) return false;
    return true;
}

CyclotomicElement relative_trace(const CyclotomicElement& x, const FieldHandle& E) {
    CyclotomicElement t = CyclotomicElement::zero(x.n());
    for (int a : residues_of(E)) t = t + x.galois(a);
    return t;
}

Rat field_trace(const CyclotomicElement& x, const FieldHandle& E) {
    if (!lies_in(x, E)) throw PreconditionError("element " + x.to_string() + " is not in the field");
    return x.trace() / Rat(static_cast<long>(E.subgroup().size()));
}

CyclotomicElement embed(const CyclotomicElement& x, const FieldHandle& E, std::size_t k) {
    return x.galois(residue_of(E.scenario(), E.representative(k)));
}

IntMatrix integer_ring_basis(const FieldHandle& E) {
    int n = cyclotomic_level(E);
    auto F = CyclotomicField::get(n);
    std::vector<IntMatrix> ops;
    IntMatrix I = IntMatrix::identity(F->degree());
    for (int a : residues_of(E)) ops.push_back(F->galois_matrix(a) - I);
    return solution_sublattice(ops, F->degree());
}

std::size_t conjugate_count(const CyclotomicElement& x, const FieldHandle& E) {
    std::set<std::vector<Rat>> seen;
    for (std::size_t k = 0; k < E.degree(); ++k) seen.insert(embed(x, E, k).coeffs());
    return seen.size();
}

}  // namespace cmforge
