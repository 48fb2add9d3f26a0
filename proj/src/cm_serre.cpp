#include "cmforge/cm_serre.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cmforge {

std::vector<Int> CMType::indicator() const {
    std::vector<Int> v(field.degree(), 0);
    for (auto k : phi) v[k] = 1;
    return v;
}

std::string CMType::to_string() const {
    std::ostringstream os;
    os << "(" << field.name() << ",{";
    for (std::size_t i = 0; i < phi.size(); ++i) os << (i ? "," : "") << field.embedding_label(phi[i]);
    os << "})";
    return os.str();
}

CMType make_cm_type(const FieldHandle& E, std::vector<std::size_t> phi) {
    if (!is_cm(E)) throw PreconditionError("CM type on non-CM field " + E.name());
    std::sort(phi.begin(), phi.end());
    phi.erase(std::unique(phi.begin(), phi.end()), phi.end());
    const int iota = E.scenario().iota();
    std::set<std::size_t> s(phi.begin(), phi.end()), conj;
    for (auto k : phi) {
        if (k >= E.degree()) throw PreconditionError("CM type lists a non-existent embedding");
        conj.insert(E.act(iota, k));
    }
    for (auto k : conj)
        if (s.count(k)) throw PreconditionError("CM type meets its conjugate");
    if (s.size() + conj.size() != E.degree()) throw PreconditionError("CM type and its conjugate do not cover all embeddings");
    return {E, phi};
}

std::vector<CMType> enumerate_cm_types(const FieldHandle& E) {
    if (!is_cm(E)) throw PreconditionError("enumerate_cm_types: " + E.name() + " is not a CM field");
    const int iota = E.scenario().iota();
    std::vector<std::pair<std::size_t, std::size_t>> orbits;
    std::vector<bool> seen(E.degree(), false);
    for (std::size_t k = 0; k < E.degree(); ++k) {
        if (seen[k]) continue;
        std::size_t c = E.act(iota, k);
        seen[k] = seen[c] = true;
        orbits.push_back({std::min(k, c), std::max(k, c)});
    }
    std::vector<CMType> out;
    const std::size_t g = orbits.size();
    for (unsigned long mask = 0; mask < (1ul << g); ++mask) {
        std::vector<std::size_t> phi;
        for (std::size_t i = 0; i < g; ++i) phi.push_back((mask >> i) & 1 ? orbits[i].second : orbits[i].first);
        out.push_back(make_cm_type(E, phi));
    }
    return out;
}

CMType induced_type(const CMType& t, const FieldHandle& L) {
    if (!L.contains(t.field)) throw PreconditionError("induced_type: " + L.name() + " does not contain " + t.field.name());
    std::vector<std::size_t> phi;
    for (std::size_t r = 0; r < L.degree(); ++r)
        if (std::binary_search(t.phi.begin(), t.phi.end(), L.restrict_embedding(r, t.field))) phi.push_back(r);
    return make_cm_type(L, phi);
}

bool is_primitive(const CMType& t) {
    for (const auto& F : cm_subfields(t.field)) {
        if (F == t.field) continue;
        for (const auto& s : enumerate_cm_types(F))
            if (induced_type(s, t.field) == t) return false;
    }
    return true;
}

FieldHandle reflex_field(const CMType& t) {
    const auto& G = t.field.group();
    Subgroup stab;
    for (int g = 0; g < static_cast<int>(G.order()); ++g) {
        std::vector<std::size_t> img;
        for (auto k : t.phi) img.push_back(t.field.act(g, k));
        std::sort(img.begin(), img.end());
        if (img == t.phi) stab.push_back(g);
    }
    return FieldHandle(t.field.scenario_ptr(), stab);
}

Cocharacter mu_phi(const CMType& t) { return {torus_of_field(t.field), t.indicator()}; }

std::vector<IntMatrix> serre_operators_on_characters(const Torus& T) {
    const auto& G = T.scenario().group();
    const IntMatrix I = IntMatrix::identity(T.rank());
    const IntMatrix iota_plus = T.action(T.scenario().iota()) + I;
    std::vector<IntMatrix> ops;
    for (int s = 0; s < static_cast<int>(G.order()); ++s) {
        IntMatrix sm = T.action(s) - I;
        ops.push_back(sm * iota_plus);
        ops.push_back(iota_plus * sm);
    }
    return ops;
}

std::optional<int> serre_violation(const Torus& T, const std::vector<Int>& mu) {
    const auto& G = T.scenario().group();
    const int iota = T.scenario().iota();
    for (int s = 0; s < static_cast<int>(G.order()); ++s) {
        // (iota+1)(s-1)mu and (s-1)(iota+1)mu with the cocharacter action
        std::vector<Int> smu = T.act_cocharacter(s, mu);
        std::vector<Int> a(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) a[i] = smu[i] - mu[i];
        std::vector<Int> ia = T.act_cocharacter(iota, a);
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (ia[i] + a[i] != 0) return s;
        std::vector<Int> imu = T.act_cocharacter(iota, mu);
        std::vector<Int> b(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) b[i] = imu[i] + mu[i];
        std::vector<Int> sb = T.act_cocharacter(s, b);
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (sb[i] - b[i] != 0) return s;
    }
    return std::nullopt;
}

SerreGroup serre_group(const FieldHandle& K, std::optional<std::size_t> tau) {
    SerreGroup sg;
    sg.K = K;
    sg.tau = tau.value_or(K.tau_embedding());
    if (sg.tau >= K.degree()) throw PreconditionError("serre_group: tau is not an embedding of " + K.name());
    sg.T = torus_of_field(K);
    sg.sublattice = solution_sublattice(serre_operators_on_characters(sg.T), sg.T.rank());
    auto q = quotient_torus(sg.T, sg.sublattice, "S^" + K.name());
    sg.S = q.quotient;
    sg.projection = q.projection;
    sg.mu = sg.projection.push(mu_tau(K, sg.tau).vector);
    sg.h_pair = {sg.mu, sg.S.act_cocharacter(K.scenario().iota(), sg.mu)};
    return sg;
}

TorusMorphism universal_rho(const SerreGroup& S, const Torus& T, const std::vector<Int>& mu) {
    const auto& G = T.scenario().group();
    if (mu.size() != T.rank()) throw PreconditionError("universal_rho: cocharacter does not belong to the target torus");
    for (int h : S.K.subgroup())
        if (T.act_cocharacter(h, mu) != mu)
            throw PreconditionError("universal_rho: cocharacter is not defined over " + S.K.name() + " (moved by " + G.label(h) + ")");
    if (auto v = serre_violation(T, mu))
        throw PreconditionError("universal_rho: Serre condition fails for sigma = " + G.label(*v));

    const std::size_t s = S.S.rank(), t = T.rank();
    const std::size_t nvar = s * t;
    auto var = [t](std::size_t i, std::size_t j) { return i * t + j; };
    std::vector<std::vector<Rat>> rows;
    std::vector<Rat> rhs;
    for (int g = 0; g < static_cast<int>(G.order()); ++g) {
        const IntMatrix& AT = T.action(g);
        const IntMatrix& AS = S.S.action(g);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < t; ++j) {
                std::vector<Rat> row(nvar, Rat(0));
                for (std::size_t k = 0; k < t; ++k) row[var(i, k)] += Rat(AT(k, j));
                for (std::size_t k = 0; k < s; ++k) row[var(k, j)] -= Rat(AS(i, k));
                rows.push_back(row);
                rhs.push_back(0);
            }
        std::vector<Int> gmuK = S.S.act_cocharacter(g, S.mu), gmu = T.act_cocharacter(g, mu);
        for (std::size_t j = 0; j < t; ++j) {
            std::vector<Rat> row(nvar, Rat(0));
            for (std::size_t i = 0; i < s; ++i) row[var(i, j)] = Rat(gmuK[i]);
            rows.push_back(row);
            rhs.push_back(Rat(gmu[j]));
        }
    }
    RatMatrix A(rows.size(), nvar);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < nvar; ++c) A(r, c) = rows[r][c];
    auto sol = solve_rational(A, rhs);
    if (!sol.consistent) throw InvariantError("universal_rho: no morphism from " + S.S.name() + " realizes the cocharacter");
    if (!sol.nullspace.empty())
        throw InvariantError("universal_rho: solution space has dimension " + std::to_string(sol.nullspace.size()) + ", expected 0");
    IntMatrix R(s, t);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < t; ++j) {
            const Rat& x = sol.particular[var(i, j)];
            if (!is_integral(x)) throw InvariantError("universal_rho: character map is not integral");
            R(i, j) = num(x);
        }
    TorusMorphism m{S.S, T, R};
    m.validate();
    if (m.push(S.mu) != mu) throw InvariantError("universal_rho: rho o mu^K differs from mu");
    return m;
}

TorusMorphism rho_phi(const CMType& t) {
    FieldHandle Estar = reflex_field(t);
    SerreGroup S = serre_group(Estar, Estar.embedding_of(t.field.group().identity()));
    Torus TE = torus_of_field(t.field);
    TorusMorphism rho = universal_rho(S, TE, t.indicator());
    // h-compatibility as a cocharacter pair identity
    auto pushed_first = rho.push(S.h_pair.first), pushed_second = rho.push(S.h_pair.second);
    std::vector<Int> mphi = t.indicator();
    if (pushed_first != mphi || pushed_second != TE.act_cocharacter(t.field.scenario().iota(), mphi))
        throw InvariantError("rho_phi: h_Phi differs from rho o h^{E*}");
    return rho;
}

TorusMorphism reflex_norm(const CMType& t) {
    FieldHandle Estar = reflex_field(t);
    SerreGroup S = serre_group(Estar, Estar.embedding_of(t.field.group().identity()));
    TorusMorphism rho = rho_phi(t);
    TorusMorphism nm = compose(S.projection, rho);
    nm.validate();
    return nm;
}

TorusMorphism norm_of_restriction(const FieldHandle& K, const Torus& T, const std::vector<Int>& mu) {
    if (mu.size() != T.rank()) throw PreconditionError("norm_of_restriction: cocharacter rank mismatch");
    for (int h : K.subgroup())
        if (T.act_cocharacter(h, mu) != mu) throw PreconditionError("norm_of_restriction: cocharacter is not defined over " + K.name());
    Torus TK = torus_of_field(K);
    IntMatrix C(K.degree(), T.rank());
    for (std::size_t k = 0; k < K.degree(); ++k) {
        auto smu = T.act_cocharacter(K.representative(k), mu);
        for (std::size_t j = 0; j < T.rank(); ++j) C(k, j) = smu[j];
    }
    TorusMorphism m{TK, T, C};
    m.validate();
    return m;
}

TorusMorphism serre_norm(const SerreGroup& big, const SerreGroup& small) {
    TorusMorphism N = norm_morphism(big.K, small.K);
    IntMatrix lhs = big.sublattice.transpose();
    IntMatrix rhs = N.char_map * small.sublattice.transpose();
    if (small.sublattice.rows() == 0) return {big.S, small.S, IntMatrix(big.S.rank(), 0)};
    auto sol = solve_unique(to_rat(lhs), to_rat(rhs));
    if (!sol) throw InvariantError("serre_norm: the norm does not map Serre characters of " + small.K.name() + " to Serre characters of " + big.K.name());
    if (!is_integral(*sol)) throw InvariantError("serre_norm: induced character map is not integral");
    TorusMorphism m{big.S, small.S, to_int(*sol)};
    m.validate();
    return m;
}

SerreKernelReport serre_kernel_check(const FieldHandle& K) {
    SerreKernelReport rep;
    auto sc = K.scenario_ptr();
    FieldHandle E, F;
    try {
        E = maximal_cm_subfield(K);
        F = maximal_totally_real_subfield(E);
    } catch (const NoCMSubfieldError&) {
        E = rational_field(sc);
        F = E;
    }
    SerreGroup SE = serre_group(E);
    // X^*(T^E) -> X^*(T^F) (restriction) -> X^*(ker N_{F/Q}) = Z^F / Z(1,...,1)
    IntMatrix res = norm_morphism(E, F).char_map.transpose();
    const std::size_t d = F.degree();
    IntMatrix quo(d - 1, d);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        quo(i, i) = 1;
        quo(i, d - 1) = -1;
    }
    IntMatrix M = quo * res;
    IntMatrix ker = solution_sublattice({M}, E.degree());
    std::ostringstream os;
    bool kernel_ok = row_basis(ker) == row_basis(SE.sublattice);
    bool surj_ok = cokernel(M.transpose()).trivial();
    os << "E=" << E.name() << " F=" << F.name() << "; rank X*(T^E)=" << E.degree() << ", rank X*(S^E)=" << SE.S.rank()
       << ", rank X*(ker N_F/Q)=" << d - 1 << "; kernel matches Serre lattice: " << (kernel_ok ? "yes" : "no")
       << "; restriction surjective: " << (surj_ok ? "yes" : "no");
    rep.exact = kernel_ok && surj_ok;
    if (K != E) {
        SerreGroup SK = serre_group(K);
        bool iso = false;
        try {
            auto N = serre_norm(SK, SE);
            iso = N.char_map.is_square() && is_unimodular(N.char_map);
        } catch (const std::exception&) {
            iso = false;
        }
        os << "; S^K -> S^E isomorphism: " << (iso ? "yes" : "no");
        rep.exact = rep.exact && iso;
    }
    rep.detail = os.str();
    return rep;
}

namespace {

CheckResult make_check(std::string name, std::string ref, bool ok, std::string detail = "") {
    return {std::move(name), std::move(ref), ok, std::move(detail)};
}

}  // namespace

std::vector<CheckResult> serre_property_suite(const FieldHandle& big, const FieldHandle& small, const std::optional<CMType>& type) {
    std::vector<CheckResult> out;
    if (!big.contains(small)) throw PreconditionError("serre_property_suite: " + small.name() + " is not contained in " + big.name());
    SerreGroup SB = serre_group(big);
    SerreGroup SS = serre_group(small, big.restrict_embedding(SB.tau, small));

    for (const SerreGroup* sg : {&SB, &SS}) {
        bool stable = true;
        for (int g = 0; g < static_cast<int>(sg->K.group().order()); ++g)
            for (std::size_t i = 0; i < sg->sublattice.rows(); ++i)
                if (!lattice_coordinates(sg->sublattice, sg->T.action(g).apply(sg->sublattice.row(i)))) stable = false;
        bool sat = is_saturated(sg->sublattice);
        bool norm_char = lattice_coordinates(sg->sublattice, std::vector<Int>(sg->T.rank(), 1)).has_value();
        out.push_back(make_check("serre lattice of " + sg->K.name() + " is Galois-stable, saturated, contains the norm character",
                                 "serre-lattice", stable && sat && norm_char));
        // Hodge compatibility: pi_* (mu_tau, iota mu_tau) = (mu^K, iota mu^K)
        auto mt = mu_tau(sg->K, sg->tau).vector;
        auto imt = sg->T.act_cocharacter(sg->K.scenario().iota(), mt);
        bool hodge = sg->projection.push(mt) == sg->h_pair.first && sg->projection.push(imt) == sg->h_pair.second;
        out.push_back(make_check("h_K lifts h^K through pi for " + sg->K.name(), "hodge-lift", hodge));
    }

    TorusMorphism NS;
    try {
        NS = serre_norm(SB, SS);
        TorusMorphism N = norm_morphism(big, small);
        bool square = N.char_map * SS.sublattice.transpose() == SB.sublattice.transpose() * NS.char_map;
        out.push_back(make_check("norm " + big.name() + "->" + small.name() + " descends to Serre groups", "serre-norm-square", square));
    } catch (const std::exception& e) {
        out.push_back(make_check("norm " + big.name() + "->" + small.name() + " descends to Serre groups", "serre-norm-square", false, e.what()));
        return out;
    }
    bool hnorm = NS.push(SB.h_pair.first) == SS.h_pair.first && NS.push(SB.h_pair.second) == SS.h_pair.second;
    out.push_back(make_check("N_{K/E} o h^K = h^E", "serre-norm-h", hnorm));

    FieldHandle Emax;
    try {
        Emax = maximal_cm_subfield(big);
    } catch (const NoCMSubfieldError&) {
        Emax = rational_field(big.scenario_ptr());
    }
    if (Emax == small) {
        bool iso = false;
        std::string detail;
        if (NS.char_map.is_square()) {
            auto snf = smith_normal_form(NS.char_map);
            iso = snf.D.is_identity();
            detail = "SNF diagonal all ones: " + std::string(iso ? "yes" : "no");
        } else {
            detail = "ranks differ: " + std::to_string(NS.char_map.rows()) + " vs " + std::to_string(NS.char_map.cols());
        }
        out.push_back(make_check("S^K -> S^E is an isomorphism for E the maximal CM subfield", "serre-norm-iso", iso, detail));
    }

    if (type) {
        FieldHandle Estar = reflex_field(*type);
        if (!small.contains(Estar)) throw PreconditionError("serre_property_suite: reflex field is not contained in " + small.name());
        Torus TE = torus_of_field(type->field);
        auto mphi = type->indicator();
        try {
            auto r1 = universal_rho(SS, TE, mphi);
            auto r2 = universal_rho(SB, TE, mphi);
            bool ok = NS.char_map * r1.char_map == r2.char_map;
            out.push_back(make_check("rho_{Phi,1} o N = rho_{Phi,2}", "rho-norm", ok));
        } catch (const std::exception& e) {
            out.push_back(make_check("rho_{Phi,1} o N = rho_{Phi,2}", "rho-norm", false, e.what()));
        }
        try {
            auto rn = reflex_norm(*type);
            auto closed = norm_of_restriction(Estar, TE, mphi);
            out.push_back(make_check("rho_Phi o pi^{E*} = Nm_{E*/Q} o Res(mu_Phi)", "reflex-norm-factorization", rn.char_map == closed.char_map));
        } catch (const std::exception& e) {
            out.push_back(make_check("rho_Phi o pi^{E*} = Nm_{E*/Q} o Res(mu_Phi)", "reflex-norm-factorization", false, e.what()));
        }
    }
    return out;
}

CheckResult composite_norm_check(const CMType& t, const FieldHandle& Lprime) {
    FieldHandle Lstar = reflex_field(t);
    if (!Lprime.contains(Lstar)) throw PreconditionError("composite_norm_check: " + Lprime.name() + " does not contain the reflex field");
    Torus TL = torus_of_field(t.field);
    auto mphi = t.indicator();
    auto top = norm_of_restriction(Lprime, TL, mphi);
    auto bottom = compose(norm_morphism(Lprime, Lstar), norm_of_restriction(Lstar, TL, mphi));
    CheckResult r;
    r.name = "Nm_{L'} Res(mu) = Nm_{L*} Res(mu) o N_{L'/L*} for " + t.to_string() + ", L'=" + Lprime.name();
    r.ref = "norm-restriction-composite";
    r.passed = top.char_map == bottom.char_map;
    r.detail = "top=" + top.char_map.to_string() + " bottom=" + bottom.char_map.to_string();
    return r;
}

}  // namespace cmforge
