#include "cmforge/symplectic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace cmforge {

namespace {

Int lcm_den(const std::vector<Rat>& v) {
    Int l = 1;
    for (const auto& x : v) l = lcm_int(l, den(x));
    return l;
}

// xi / content so that its coordinates are coprime integers
CyclotomicElement primitive_part(const CyclotomicElement& x) {
    Int l = lcm_den(x.coeffs());
    Int g = 0;
    for (const auto& c : x.coeffs()) g = gcd_int(g, num(c * Rat(l)));
    return (Rat(l) / Rat(g)) * x;
}

bool positive_on(const CyclotomicElement& xi, const CMType& t) {
    const auto& E = t.field;
    for (auto k : t.phi)
        if (embed(xi, E, k).to_complex(1).imag() <= 0) return false;
    return true;
}

bool is_generator(const CyclotomicElement& x, const FieldHandle& E) {
    return !x.is_zero() && x.conj() == -x && conjugate_count(x, E) == E.degree();
}

RatMatrix gram_block(const FieldHandle& E, const CyclotomicElement& xi, const IntMatrix& basis) {
    const int n = xi.n();
    std::vector<CyclotomicElement> b;
    for (std::size_t r = 0; r < basis.rows(); ++r) b.push_back(CyclotomicElement::from_ints(n, basis.row(r)));
    RatMatrix G(b.size(), b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) G(i, j) = field_trace(xi * b[i] * b[j].conj(), E);
    return G;
}

Rat form(const RatMatrix& G, const std::vector<Rat>& x, const std::vector<Rat>& y) {
    Rat s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] != 0 && G(i, j) != 0) s += x[i] * G(i, j) * y[j];
    }
    return s;
}

Int iform(const IntMatrix& G, const std::vector<Int>& x, const std::vector<Int>& y) {
    Int s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] != 0 && G(i, j) != 0) s += x[i] * G(i, j) * y[j];
    }
    return s;
}

std::vector<Rat> axpy(const std::vector<Rat>& w, const Rat& a, const std::vector<Rat>& x) {
    std::vector<Rat> r = w;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += a * x[i];
    return r;
}

bool all_zero(const std::vector<Rat>& v) {
    return std::all_of(v.begin(), v.end(), [](const Rat& x) { return x == 0; });
}

// Symplectic basis of (Z^n, A) for A integral alternating unimodular: rows e_1..e_g, f_1..f_g
// with A(e_i, f_i) = 1. `start` is the starting Z-basis (rows).
IntMatrix integral_symplectic_rows(const IntMatrix& A, IntMatrix start) {
    const std::size_t n = A.rows();
    std::vector<std::vector<Int>> es, fs;
    std::vector<std::vector<Int>> W = start.to_rows();
    while (!W.empty()) {
        std::vector<Int> x = W.front();
        std::vector<Int> y(n, 0);
        Int g = 0;
        // combine the remaining vectors by extended gcd so that A(x, y) = gcd
        for (std::size_t k = 1; k < W.size(); ++k) {
            Int v = iform(A, x, W[k]);
            if (v == 0) continue;
            Int s, t;
            Int ng = ext_gcd(g, v, s, t);
            for (std::size_t i = 0; i < n; ++i) y[i] = s * y[i] + t * W[k][i];
            g = ng;
        }
        if (g != 1) throw InvariantError("form is not unimodular on the lattice (pairing gcd " + to_string(g) + ")");
        es.push_back(x);
        fs.push_back(y);
        std::vector<std::vector<Int>> proj;
        for (std::size_t k = 1; k < W.size(); ++k) {
            Int a = iform(A, W[k], y), b = iform(A, W[k], x);
            std::vector<Int> w = W[k];
            for (std::size_t i = 0; i < n; ++i) w[i] = w[i] - a * x[i] + b * y[i];
            proj.push_back(w);
        }
        if (proj.empty()) {
            W.clear();
            break;
        }
        IntMatrix P = row_basis(IntMatrix::from_rows(proj, n));
        W = P.to_rows();
    }
    std::vector<std::vector<Int>> rows = es;
    rows.insert(rows.end(), fs.begin(), fs.end());
    return IntMatrix::from_rows(rows, n);
}

IntMatrix random_unimodular(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    IntMatrix U = IntMatrix::identity(n);
    if (n < 2) return U;
    for (int s = 0; s < 6 * static_cast<int>(n); ++s) {
        std::size_t i = rng() % n, k = rng() % n;
        if (i == k) continue;
        U.add_row(i, k, Int(static_cast<int>(rng() % 5) - 2));
    }
    return U;
}

std::vector<long> prime_factors(Int x) {
    std::vector<long> ps;
    x = abs_int(x);
    for (long p = 2; Int(p) * p <= x; ++p) {
        if (x % p != 0) continue;
        ps.push_back(p);
        while (x % p == 0) x /= p;
    }
    if (x > 1) ps.push_back(x.convert_to<long>());
    return ps;
}

bool supported_on(const Int& x, const std::set<long>& S) {
    for (long p : prime_factors(x))
        if (!S.count(p)) return false;
    return true;
}

}  // namespace

CyclotomicElement totally_imaginary_generator(const FieldHandle& E, const std::optional<CMType>& positive_for, int height_bound) {
    int n = cyclotomic_level(E);
    if (!is_cm(E)) throw PreconditionError("totally_imaginary_generator: field " + E.name() + " is not CM");
    auto accept = [&](const CyclotomicElement& x) -> std::optional<CyclotomicElement> {
        if (!is_generator(x, E)) return std::nullopt;
        CyclotomicElement p = primitive_part(x);
        if (positive_for && !positive_on(p, *positive_for)) return std::nullopt;
        return p;
    };
    for (int a = 1; a < n; ++a) {
        auto c = relative_trace(CyclotomicElement::zeta(n, a) - CyclotomicElement::zeta(n, -a), E);
        if (auto r = accept(c)) return *r;
    }
    IntMatrix O = integer_ring_basis(E);
    const std::size_t d = O.rows();
    for (int h = 1; h <= height_bound; ++h) {
        // all coefficient vectors of height exactly h, lexicographic
        std::vector<int> c(d, -h);
        while (true) {
            int ht = 0;
            for (int v : c) ht = std::max(ht, std::abs(v));
            if (ht == h) {
                std::vector<Int> coords(O.cols(), 0);
                for (std::size_t r = 0; r < d; ++r)
                    for (std::size_t j = 0; j < O.cols(); ++j) coords[j] += Int(c[r]) * O(r, j);
                auto x = CyclotomicElement::from_ints(n, coords);
                if (auto r = accept(x - x.conj())) return *r;
            }
            std::size_t k = 0;
            while (k < d && c[k] == h) c[k++] = -h;
            if (k == d) break;
            ++c[k];
        }
    }
    throw PreconditionError("totally_imaginary_generator: no generator of " + E.name() + " found up to height " +
                            std::to_string(height_bound));
}

std::size_t SymplecticSpace::offset(std::size_t i) const {
    std::size_t o = 0;
    for (std::size_t k = 0; k < i; ++k) o += summands[k].basis.rows();
    return o;
}

Rat SymplecticSpace::psi(const std::vector<Rat>& x, const std::vector<Rat>& y) const { return form(gram, x, y); }

CyclotomicElement SymplecticSpace::element(std::size_t i, const std::vector<Rat>& coords) const {
    const auto& B = summands.at(i).basis;
    std::vector<Rat> c(B.cols(), 0);
    for (std::size_t r = 0; r < B.rows(); ++r)
        for (std::size_t j = 0; j < B.cols(); ++j) c[j] += coords.at(r) * Rat(B(r, j));
    return CyclotomicElement(CyclotomicField::get(n), c);
}

std::vector<Rat> SymplecticSpace::coordinates(std::size_t i, const CyclotomicElement& x) const {
    const auto& B = summands.at(i).basis;
    auto sol = solve_unique(to_rat(B.transpose()), RatMatrix::column(x.coeffs()));
    if (!sol) throw PreconditionError("element " + x.to_string() + " is not in " + summands[i].field.name());
    return sol->col(0);
}

RatMatrix SymplecticSpace::multiplication_matrix(const std::vector<CyclotomicElement>& ys) const {
    if (ys.size() != summands.size()) throw PreconditionError("one multiplier per summand expected");
    std::vector<RatMatrix> blocks;
    for (std::size_t i = 0; i < summands.size(); ++i) {
        const auto& B = summands[i].basis;
        RatMatrix M(B.rows(), B.rows());
        for (std::size_t j = 0; j < B.rows(); ++j) {
            std::vector<Rat> e(B.rows(), 0);
            e[j] = 1;
            auto col = coordinates(i, ys[i] * element(i, e));
            for (std::size_t r = 0; r < B.rows(); ++r) M(r, j) = col[r];
        }
        blocks.push_back(M);
    }
    return block_diag(blocks);
}

SymplecticSpace build_symplectic(const std::vector<FieldHandle>& fields, const std::vector<CyclotomicElement>& xis) {
    if (fields.empty() || fields.size() != xis.size()) throw PreconditionError("build_symplectic: one generator per field expected");
    SymplecticSpace V;
    V.n = cyclotomic_level(fields.front());
    std::vector<RatMatrix> blocks;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto& E = fields[i];
        if (cyclotomic_level(E) != V.n || xis[i].n() != V.n) throw PreconditionError("build_symplectic: mixed cyclotomic levels");
        if (!lies_in(xis[i], E)) throw PreconditionError("build_symplectic: xi is not in " + E.name());
        if (!is_generator(xis[i], E)) throw PreconditionError("build_symplectic: " + xis[i].to_string() + " is not a totally imaginary generator");
        SymplecticSummand s{E, xis[i], integer_ring_basis(E)};
        blocks.push_back(gram_block(E, xis[i], s.basis));
        V.summands.push_back(std::move(s));
    }
    V.gram = block_diag(blocks);
    if (V.gram.transpose() != -V.gram) throw InvariantError("build_symplectic: form is not alternating");
    if (determinant(V.gram) == 0) throw InvariantError("build_symplectic: form is degenerate");
    return V;
}

RatMatrix standard_J(std::size_t dim) {
    if (dim % 2) throw PreconditionError("symplectic dimension must be even");
    std::size_t g = dim / 2;
    RatMatrix J(dim, dim);
    for (std::size_t i = 0; i < g; ++i) {
        J(i, g + i) = 1;
        J(g + i, i) = -1;
    }
    return J;
}

IntegralSymplecticBasis integral_symplectic_basis(const SymplecticSpace& space) {
    const std::size_t d = space.dim();
    std::vector<std::vector<Rat>> W;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<Rat> e(d, 0);
        e[i] = 1;
        W.push_back(e);
    }
    std::vector<std::vector<Rat>> es, fs;
    while (!W.empty()) {
        std::vector<Rat> x = W.front();
        std::size_t k = 1;
        while (k < W.size() && space.psi(x, W[k]) == 0) ++k;
        if (k == W.size()) throw InvariantError("integral_symplectic_basis: form is degenerate");
        Rat s = space.psi(x, W[k]);
        std::vector<Rat> y = W[k];
        for (auto& c : y) c /= s;
        std::vector<std::vector<Rat>> rest;
        for (std::size_t j = 1; j < W.size(); ++j) {
            if (j == k) continue;
            auto w = axpy(W[j], -space.psi(W[j], y), x);
            w = axpy(w, space.psi(W[j], x), y);
            if (!all_zero(w)) rest.push_back(w);
        }
        es.push_back(x);
        fs.push_back(y);
        W = rest;
    }
    IntegralSymplecticBasis out;
    out.rational_basis = es;
    out.rational_basis.insert(out.rational_basis.end(), fs.begin(), fs.end());
    Int q = 1;
    for (std::size_t j = 0; j < es.size(); ++j) {
        std::vector<Rat> both = es[j];
        both.insert(both.end(), fs[j].begin(), fs[j].end());
        q *= lcm_den(both);
    }
    out.q = Rat(q);
    out.space = space;
    for (auto& s : out.space.summands) s.xi = (Rat(1) / (out.q * out.q)) * s.xi;
    out.space.gram = (Rat(1) / (out.q * out.q)) * space.gram;
    std::vector<std::vector<Int>> rows;
    for (const auto& v : out.rational_basis) {
        std::vector<Int> r;
        for (const auto& c : v) {
            Rat scaled = c * out.q;
            if (!is_integral(scaled)) throw InvariantError("integral_symplectic_basis: scaled vector is not in L_E");
            r.push_back(num(scaled));
        }
        rows.push_back(r);
    }
    out.basis = IntMatrix::from_rows(rows, d);
    RatMatrix B = to_rat(out.basis);
    if (B * out.space.gram * B.transpose() != standard_J(d)) throw InvariantError("integral_symplectic_basis: gram is not the standard form");
    return out;
}

std::optional<GSpElement> gsp_check(const RatMatrix& M, const RatMatrix& gram) {
    if (M.rows() != gram.rows() || M.cols() != gram.cols()) throw PreconditionError("gsp_check: size mismatch");
    RatMatrix T = M.transpose() * gram * M;
    std::optional<Rat> nu;
    for (std::size_t i = 0; i < gram.rows() && !nu; ++i)
        for (std::size_t j = 0; j < gram.cols() && !nu; ++j)
            if (gram(i, j) != 0) nu = T(i, j) / gram(i, j);
    if (!nu || *nu == 0) return std::nullopt;
    if (T != *nu * gram) return std::nullopt;
    return GSpElement{M, *nu};
}

ScriptT script_T_subtorus(const FieldHandle& E) {
    if (!is_cm(E)) throw PreconditionError("script_T_subtorus: " + E.name() + " is not CM");
    FieldHandle F = maximal_totally_real_subfield(E);
    Torus TE = torus_of_field(E);
    IntMatrix C = norm_morphism(E, F).char_map;  // rank_E x rank_F
    IntMatrix ones(1, F.degree());
    for (std::size_t j = 0; j < F.degree(); ++j) ones(0, j) = 1;
    IntMatrix Y = solution_sublattice({ones}, F.degree());  // characters of T^F trivial on G_m
    IntMatrix killed = Y.rows() ? row_basis(Y * C.transpose()) : IntMatrix(0, E.degree());
    if (!is_saturated(killed)) throw InvariantError("script_T_subtorus: kernel of the norm to T^F/G_m is disconnected");
    const std::size_t r = E.degree(), k = killed.rows();
    IntMatrix P;
    if (k == 0) {
        P = IntMatrix::identity(r);
    } else {
        auto snf = smith_normal_form(killed);
        IntMatrix Vt = snf.V.transpose();
        P = Vt.block(k, 0, r - k, r);
    }
    auto sub = subtorus_from_char_surjection(TE, P, "scriptT^" + E.name());
    return ScriptT{E, sub.subtorus, sub.inclusion, killed};
}

bool in_script_T(const CyclotomicElement& x, const FieldHandle& E) {
    return !x.is_zero() && lies_in(x, E) && (x * x.conj()).is_rational();
}

namespace {

IntMatrix hstack_all(const std::vector<IntMatrix>& parts, std::size_t rows) {
    IntMatrix M(rows, 0);
    for (const auto& p : parts) M = hstack(M, p);
    return M;
}

}  // namespace

CMPointData build_cm_point(const FieldHandle& E) {
    if (!is_cm(E)) throw PreconditionError("build_cm_point: " + E.name() + " is not CM");
    auto sc = E.scenario_ptr();
    SerreGroup SE = serre_group(E);
    std::vector<CMType> chosen;
    std::vector<IntMatrix> parts;
    std::vector<Torus> factors;
    auto current_map = [&]() { return hstack_all(parts, SE.S.rank()); };
    auto injective = [&](const IntMatrix& C) {
        return C.cols() > 0 && matrix_rank(C) == SE.S.rank() && cokernel(C.transpose()).trivial();
    };
    for (const auto& Ei : cm_subfields(ambient_field(sc))) {
        for (const auto& t : enumerate_cm_types(Ei)) {
            if (injective(current_map())) break;
            if (!is_primitive(t)) continue;
            FieldHandle Es = reflex_field(t);
            if (!E.contains(Es)) continue;
            SerreGroup SEs = serre_group(Es, Es.embedding_of(sc->group().identity()));
            IntMatrix comp = serre_norm(SE, SEs).char_map * rho_phi(t).char_map;
            IntMatrix trial = hstack(current_map(), comp);
            // keep a type only if it enlarges the image or removes torsion from the cokernel
            bool gain = matrix_rank(trial) > matrix_rank(current_map()) ||
                        (matrix_rank(trial) == SE.S.rank() && cokernel(trial.transpose()).invariant_factors.size() <
                                                                  cokernel(current_map().transpose()).invariant_factors.size());
            if (!gain) continue;
            chosen.push_back(t);
            parts.push_back(comp);
            factors.push_back(torus_of_field(t.field));
        }
        if (injective(current_map())) break;
    }
    IntMatrix C = current_map();
    if (!injective(C))
        throw InvariantError("build_cm_point: no collection of primitive CM types in scenario '" + sc->name() +
                             "' gives an injective map on S^" + E.name());
    CMPointData cp;
    cp.E = E;
    cp.collection = chosen;
    cp.factors = factors;
    cp.product = product_torus(factors, "prod T^{E_i}");
    for (const auto& t : chosen) {
        auto ind = t.indicator();
        cp.mu_cm.insert(cp.mu_cm.end(), ind.begin(), ind.end());
    }
    cp.h_cm = {cp.mu_cm, cp.product.act_cocharacter(sc->iota(), cp.mu_cm)};
    cp.injmap = TorusMorphism{SE.S, cp.product, C};
    cp.injmap.validate();
    FieldHandle Et = reflex_field(chosen.front());
    for (std::size_t i = 1; i < chosen.size(); ++i) Et = compositum(Et, reflex_field(chosen[i]));
    cp.E_tilde = Et;
    if (!E.contains(Et)) throw InvariantError("build_cm_point: composite of the reflex fields is not inside " + E.name());
    if (field_of_definition(Cocharacter{cp.product, cp.mu_cm}) != Et)
        throw InvariantError("build_cm_point: mu_cm is not defined exactly over the composite of the reflex fields");
    if (cp.injmap.push(SE.mu) != cp.mu_cm) throw InvariantError("build_cm_point: h_cm differs from the product of the h_Phi");
    return cp;
}

TorusMorphism phi_morphism(const FieldHandle& K, const CMPointData& cp) {
    FieldHandle E = maximal_cm_subfield(K);
    if (E != cp.E) throw PreconditionError("phi_morphism: CM point was built on " + cp.E.name() + ", not on the maximal CM subfield of " + K.name());
    SerreGroup SK = serre_group(K), SE = serre_group(E);
    IntMatrix C = SK.projection.char_map * serre_norm(SK, SE).char_map * cp.injmap.char_map;
    TorusMorphism phi{SK.T, cp.product, C};
    phi.validate();
    // image lies in prod scriptT^{E_i}
    std::size_t off = 0;
    for (std::size_t i = 0; i < cp.collection.size(); ++i) {
        ScriptT st = script_T_subtorus(cp.collection[i].field);
        IntMatrix block = C.block(0, off, C.rows(), cp.factors[i].rank());
        if (st.killed.rows() && !(block * st.killed.transpose()).is_zero())
            throw InvariantError("phi_morphism: image is not contained in scriptT^" + cp.collection[i].field.name());
        off += cp.factors[i].rank();
    }
    return phi;
}

TorusMorphism phi_explicit(const FieldHandle& K, const CMPointData& cp) {
    std::vector<IntMatrix> parts;
    for (const auto& t : cp.collection) parts.push_back(norm_morphism(K, reflex_field(t)).char_map * reflex_norm(t).char_map);
    TorusMorphism m{torus_of_field(K), cp.product, hstack_all(parts, K.degree())};
    m.validate();
    return m;
}

TorusMorphism eta_morphism(const FieldHandle& K, const CMPointData& cp) {
    if (!K.contains(cp.E_tilde)) throw PreconditionError("eta_morphism: mu_cm is not defined over " + K.name());
    auto eta = norm_of_restriction(K, cp.product, cp.mu_cm);
    eta.validate();
    return eta;
}

std::vector<CyclotomicElement> torus_point_image(const TorusMorphism& m, const FieldHandle& K, const CMPointData& cp,
                                                 const CyclotomicElement& x) {
    if (!lies_in(x, K) || x.is_zero()) throw PreconditionError("torus_point_image: point is not in K^x");
    const int id = K.group().identity();
    std::vector<CyclotomicElement> conj;
    for (std::size_t s = 0; s < K.degree(); ++s) conj.push_back(embed(x, K, s));
    std::vector<CyclotomicElement> out;
    std::size_t off = 0;
    for (std::size_t i = 0; i < cp.collection.size(); ++i) {
        const auto& Ei = cp.collection[i].field;
        auto image_at = [&](std::size_t rho) {
            CyclotomicElement y = CyclotomicElement::rational(x.n(), 1);
            for (std::size_t s = 0; s < K.degree(); ++s) {
                long e = m.char_map(s, off + rho).convert_to<long>();
                if (e) y = y * conj[s].pow(e);
            }
            return y;
        };
        CyclotomicElement y = image_at(Ei.embedding_of(id));
        if (!lies_in(y, Ei)) throw InvariantError("torus_point_image: component is not in " + Ei.name());
        out.push_back(y);
        off += cp.factors[i].rank();
    }
    return out;
}

PhiEtaReport phi_eta_suite(const FieldHandle& K) {
    FieldHandle E = maximal_cm_subfield(K);
    CMPointData cp = build_cm_point(E);
    PhiEtaReport r{phi_morphism(K, cp), phi_explicit(K, cp), eta_morphism(K, cp), {}};
    auto add = [&](std::string name, std::string ref, bool ok, std::string detail) {
        r.checks.push_back({std::move(name), std::move(ref), ok, std::move(detail)});
    };
    add("phi_equals_eta", "phi-equals-eta", r.phi.char_map == r.eta.char_map,
        "phi = " + r.phi.char_map.to_string() + ", eta = " + r.eta.char_map.to_string());
    add("phi_explicit_composite", "phi-as-reflex-norms", r.phi.char_map == r.explicit_phi.char_map,
        "explicit = " + r.explicit_phi.char_map.to_string());
    auto muK = mu_tau(K).vector;
    const int iota = K.scenario().iota();
    bool hcomp = r.phi.push(muK) == cp.h_cm.first &&
                 r.phi.push(torus_of_field(K).act_cocharacter(iota, muK)) == cp.h_cm.second;
    add("phi_h_compatibility", "phi-compatible-with-h", hcomp, "phi_*(mu_K) against mu_cm'");
    bool reflex_in_E = true;
    for (const auto& t : cp.collection) reflex_in_E = reflex_in_E && E.contains(reflex_field(t));
    add("reflex_fields_in_E", "cm-collection-reflex-condition", reflex_in_E, std::to_string(cp.collection.size()) + " type(s)");
    add("cm_point_injective", "cm-collection-injectivity", cp.injmap.is_injective(), "S^E -> prod T^{E_i}");
    add("field_of_definition", "cm-point-field-of-definition",
        field_of_definition(Cocharacter{cp.product, cp.mu_cm}) == cp.E_tilde && E.contains(cp.E_tilde),
        "E~ of degree " + std::to_string(cp.E_tilde.degree()));
    return r;
}

long padic_valuation(const Rat& x, long p) {
    if (x == 0) throw PreconditionError("valuation of zero");
    long v = 0;
    Int a = abs_int(num(x)), b = den(x);
    while (a % p == 0) {
        a /= p;
        ++v;
    }
    while (b % p == 0) {
        b /= p;
        --v;
    }
    return v;
}

bool is_p_integral(const RatMatrix& M, long p) {
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j)
            if (den(M(i, j)) % p == 0) return false;
    return true;
}

namespace {

// r in Z[1/p] with v_p(x - r) >= prec
Rat padic_approx(const Rat& x, long p, long prec) {
    if (x == 0) return 0;
    long k = padic_valuation(x, p);
    if (k >= prec) return 0;
    Rat unit = x / rpow(Rat(p), k);
    Int m = ipow(Int(p), static_cast<unsigned>(prec - k));
    Int s, t;
    ext_gcd(floor_mod(den(unit), m), m, s, t);
    Int r = floor_mod(num(unit) * s, m);
    return Rat(r) * rpow(Rat(p), k);
}

// symplectic Z-basis S of (Z^n, gram): S^T gram S = J
IntMatrix standard_frame(const RatMatrix& gram) {
    if (!is_integral(gram)) throw PreconditionError("decompose_gsp: gram must be integral");
    IntMatrix A = to_int(gram);
    if (abs_int(determinant(A)) != 1) throw PreconditionError("decompose_gsp: gram must be unimodular");
    return integral_symplectic_rows(A, IntMatrix::identity(A.rows())).transpose();
}

}  // namespace

GSpDecomposition decompose_gsp(const AdelicGSp& f, const RatMatrix& gram, unsigned variant) {
    const std::size_t n = gram.rows();
    if (f.tail.rows() != n || f.tail.cols() != n) throw PreconditionError("decompose_gsp: tail has wrong size");
    std::set<long> S;
    for (const auto& [p, m] : f.local) S.insert(p);
    auto tail = gsp_check(f.tail, gram);
    if (!tail) throw PreconditionError("decompose_gsp: tail is not a similitude");
    {
        auto tinv = inverse(f.tail);
        Int d = lcm_int(common_denominator(f.tail), common_denominator(*tinv));
        if (!supported_on(d, S) || !supported_on(num(tail->nu), S) || !supported_on(den(tail->nu), S))
            throw PreconditionError("decompose_gsp: tail is not integral with unit similitude outside the support");
    }
    Rat nu = 1;
    Int D = 1;
    std::map<long, std::pair<RatMatrix, long>> approx;
    for (const auto& [p, F] : f.local) {
        auto g = gsp_check(F, gram);
        if (!g) throw PreconditionError("decompose_gsp: local part at " + std::to_string(p) + " is not a similitude");
        nu *= rpow(Rat(p), padic_valuation(g->nu, p));
        // p^a Z_p^n lies inside F Z_p^n, so F only matters modulo p^a
        long a = 0;
        RatMatrix Finv = *inverse(F);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (Finv(i, j) != 0) a = std::max(a, -padic_valuation(Finv(i, j), p));
        RatMatrix Fa(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) Fa(i, j) = padic_approx(F(i, j), p, a);
        approx[p] = {Fa, a};
        D = lcm_int(D, common_denominator(Fa));
    }
    // D * Lambda as an integral lattice, where Lambda_p = F_p Z_p^n and Z_l^n elsewhere
    // Lambda is cut out prime by prime. The generators for p give Lambda_p at p, Z_l^n outside
    // the support and something large enough to be harmless at the other primes of the support.
    std::map<long, long> pole;  // Lambda_q inside q^-k Z_q^n
    for (const auto& [p, F] : f.local) {
        long k = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (F(i, j) != 0) k = std::max(k, -padic_valuation(F(i, j), p));
        pole[p] = k;
    }
    std::vector<RatMatrix> gens;
    for (const auto& [p, fa] : approx) {
        const auto& [Fa, a] = fa;
        Rat M = 1;
        for (const auto& [q, k] : pole)
            if (q != p) M *= rpow(Rat(q), k);
        Rat pa(ipow(Int(p), static_cast<unsigned>(a)));
        gens.push_back(vstack(Fa.transpose(), (pa / M) * RatMatrix::identity(n)));
        D = lcm_int(D, common_denominator(gens.back()));
    }
    IntMatrix lattice = to_int(Rat(D) * RatMatrix::identity(n));
    if (!gens.empty()) {
        lattice = row_basis(to_int(Rat(D) * gens.front()));
        for (std::size_t i = 1; i < gens.size(); ++i) lattice = lattice_intersection(lattice, row_basis(to_int(Rat(D) * gens[i])));
    }
    if (lattice.rows() != n) throw InvariantError("decompose_gsp: lattice has wrong rank");
    RatMatrix B = (Rat(1) / Rat(D)) * to_rat(lattice);  // rows span Lambda
    RatMatrix A = (Rat(1) / nu) * (B * gram * B.transpose());
    if (!is_integral(A)) throw InvariantError("decompose_gsp: form on the lattice is not divisible by nu = " + to_string(nu));
    IntMatrix start = variant ? random_unimodular(n, variant) : IntMatrix::identity(n);
    IntMatrix frame = integral_symplectic_rows(to_int(A), start);  // rows in B-coordinates, A-gram = J
    RatMatrix Q = (to_rat(frame) * B).transpose();                 // columns: nu-hyperbolic basis of Lambda
    // Q^T gram Q = nu J; move the standard form back to gram
    IntMatrix Sg = standard_frame(gram);
    RatMatrix q = Q * *inverse(to_rat(Sg));
    auto qg = gsp_check(q, gram);
    if (!qg || qg->nu != nu) throw InvariantError("decompose_gsp: rational part has wrong similitude");
    GSpDecomposition d;
    d.q = *qg;
    RatMatrix qinv = *inverse(q);
    for (const auto& [p, F] : f.local) d.gamma_local[p] = qinv * F;
    d.gamma_tail = qinv * f.tail;
    return d;
}

CheckResult verify_decomposition(const AdelicGSp& f, const GSpDecomposition& d, const RatMatrix& gram) {
    CheckResult r{"decomposition", "gsp-adelic-decomposition", true, "ok"};
    auto fail = [&](const std::string& why) {
        r.passed = false;
        r.detail = why;
        return r;
    };
    if (d.q.nu <= 0) return fail("nu(q) = " + to_string(d.q.nu) + " is not positive");
    if (!gsp_check(d.q.matrix, gram)) return fail("q is not a similitude");
    std::set<long> S;
    for (const auto& [p, F] : f.local) {
        S.insert(p);
        auto it = d.gamma_local.find(p);
        if (it == d.gamma_local.end()) return fail("missing local part at " + std::to_string(p));
        const RatMatrix& g = it->second;
        if (d.q.matrix * g != F) return fail("q * gamma_p != f_p at p = " + std::to_string(p));
        auto gg = gsp_check(g, gram);
        if (!gg) return fail("gamma_p is not a similitude at p = " + std::to_string(p));
        if (!is_p_integral(g, p)) return fail("gamma_p is not integral at p = " + std::to_string(p));
        if (padic_valuation(gg->nu, p) != 0) return fail("nu(gamma_p) is not a unit at p = " + std::to_string(p));
    }
    if (d.q.matrix * d.gamma_tail != f.tail) return fail("q * gamma != f away from the support");
    auto gt = gsp_check(d.gamma_tail, gram);
    if (!gt) return fail("gamma is not a similitude away from the support");
    if (!supported_on(common_denominator(d.gamma_tail), S)) return fail("gamma is not integral at some prime outside the support");
    if (!supported_on(num(gt->nu), S) || !supported_on(den(gt->nu), S)) return fail("nu(gamma) is not a unit outside the support");
    return r;
}

IntMatrix adjoint_project(const RatMatrix& g) {
    Int l = common_denominator(g);
    IntMatrix M = to_int(Rat(l) * g);
    Int c = 0;
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) c = gcd_int(c, M(i, j));
    if (c == 0) throw PreconditionError("adjoint_project: zero matrix");
    bool neg = false;
    for (std::size_t i = 0, done = 0; i < M.rows() && !done; ++i)
        for (std::size_t j = 0; j < M.cols(); ++j)
            if (M(i, j) != 0) {
                neg = M(i, j) < 0;
                done = 1;
                break;
            }
    IntMatrix out(M.rows(), M.cols());
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) = (neg ? -M(i, j) : M(i, j)) / c;
    return out;
}

RatMatrix random_local_gsp(const RatMatrix& gram, long p, int max_valuation, unsigned long seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = gram.rows(), g = n / 2;
    RatMatrix S = to_rat(standard_frame(gram));
    RatMatrix Sinv = *inverse(S);
    auto small = [&](int b) { return Int(static_cast<int>(rng() % (2 * b + 1)) - b); };
    RatMatrix M = RatMatrix::identity(n);
    for (int step = 0; step < 4; ++step) {
        RatMatrix X(n, n);
        int kind = static_cast<int>(rng() % 3);
        if (kind == 0) {
            // [[I, Y],[0, I]] with Y symmetric, entries in p^-k Z
            int k = static_cast<int>(rng() % (max_valuation + 1));
            X = RatMatrix::identity(n);
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = i; j < g; ++j) {
                    Rat y = Rat(small(3)) / Rat(ipow(Int(p), static_cast<unsigned>(k)));
                    X(i, g + j) = y;
                    X(j, g + i) = y;
                }
        } else if (kind == 1) {
            // lower unipotent [[I, 0],[Y, I]]
            X = RatMatrix::identity(n);
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = i; j < g; ++j) {
                    Rat y = Rat(small(3));
                    X(g + i, j) = y;
                    X(g + j, i) = y;
                }
        } else {
            // similitude diag(nu I, I), nu = +-p^a
            int a = static_cast<int>(rng() % (2 * max_valuation + 1)) - max_valuation;
            Rat nu = rpow(Rat(p), a) * (rng() % 2 ? 1 : -1);
            X = RatMatrix::identity(n);
            for (std::size_t i = 0; i < g; ++i) X(i, i) = nu;
        }
        M = M * X;
    }
    return S * M * Sinv;
}

CriterionReport criterion_check(const RatMatrix& gram, LevelGroup level, std::size_t samples, unsigned long seed,
                                const std::vector<long>& primes, int max_valuation) {
    CriterionReport rep;
    const std::size_t n = gram.rows(), g = n / 2;
    RatMatrix S = to_rat(standard_frame(gram));
    RatMatrix D = RatMatrix::identity(n);
    for (std::size_t i = g; i < n; ++i) D(i, i) = -1;
    RatMatrix neg = S * D * *inverse(S);
    auto ng = gsp_check(neg, gram);
    bool integral_negative = ng && ng->nu < 0 && is_integral(neg);
    // the trivial level group only contains the identity, which has nu = 1
    rep.condition_negative_similitude = level == LevelGroup::IntegralUnitSimilitude ? integral_negative : false;
    if (!rep.condition_negative_similitude && rep.counterexample.empty())
        rep.counterexample = "no element of G(Q) in the level group has negative similitude";

    std::mt19937_64 rng(seed);
    rep.condition_single_class = true;
    for (std::size_t s = 0; s < samples; ++s) {
        AdelicGSp f;
        f.tail = RatMatrix::identity(n);
        std::size_t count = 1 + rng() % 2;
        for (std::size_t k = 0; k < count; ++k) {
            long p = primes[rng() % primes.size()];
            f.local[p] = random_local_gsp(gram, p, max_valuation, rng());
        }
        rep.samples = s + 1;
        if (level == LevelGroup::Trivial) {
            // f = q * 1 forces every local part to equal the rational tail
            for (const auto& [p, F] : f.local)
                if (F != f.tail) {
                    rep.condition_single_class = false;
                    rep.counterexample = "sample " + std::to_string(s) + ": local part at " + std::to_string(p) + " " +
                                         F.to_string() + " differs from the tail; no rational q works";
                    break;
                }
        } else {
            try {
                auto d = decompose_gsp(f, gram);
                auto v = verify_decomposition(f, d, gram);
                if (!v.passed) {
                    rep.condition_single_class = false;
                    rep.counterexample = "sample " + std::to_string(s) + ": " + v.detail;
                }
            } catch (const std::exception& e) {
                rep.condition_single_class = false;
                rep.counterexample = "sample " + std::to_string(s) + ": " + e.what();
            }
        }
        if (!rep.condition_single_class) break;
    }
    return rep;
}

}  // namespace cmforge
