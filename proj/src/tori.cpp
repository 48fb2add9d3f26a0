#include "cmforge/tori.hpp"

namespace cmforge {

Torus::Torus(ScenarioPtr sc, std::vector<IntMatrix> action, std::vector<std::string> labels, std::string name)
    : sc_(std::move(sc)), lattice_(sc_->group_ptr(), std::move(action)), labels_(std::move(labels)), name_(std::move(name)) {
    if (labels_.size() != lattice_.rank()) throw PreconditionError("torus: one basis label per rank required");
    lattice_.validate();
}

std::vector<Int> Torus::act_cocharacter(int sigma, const std::vector<Int>& mu) const {
    return action(sc_->group().inv(sigma)).transpose().apply(mu);
}

void TorusMorphism::validate() const {
    if (char_map.rows() != source.rank() || char_map.cols() != target.rank())
        throw InvariantError("torus morphism " + source.name() + " -> " + target.name() + ": character map has the wrong shape");
    const auto& G = source.scenario().group();
    for (int g = 0; g < static_cast<int>(G.order()); ++g)
        if (char_map * target.action(g) != source.action(g) * char_map)
            throw InvariantError("torus morphism " + source.name() + " -> " + target.name() + " is not equivariant at " + G.label(g));
}

bool TorusMorphism::is_injective() const { return cokernel(char_map.transpose()).trivial(); }

bool TorusMorphism::is_surjective() const { return matrix_rank(char_map) == target.rank(); }

TorusMorphism compose(const TorusMorphism& first, const TorusMorphism& second) {
    if (first.target.rank() != second.source.rank()) throw PreconditionError("compose: incompatible tori");
    return {first.source, second.target, first.char_map * second.char_map};
}

TorusMorphism identity_morphism(const Torus& T) { return {T, T, IntMatrix::identity(T.rank())}; }

Int pairing(const Cocharacter& chi, const std::vector<Int>& f) {
    if (f.size() != chi.vector.size()) throw PreconditionError("pairing: character and cocharacter live on different tori");
    Int s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += chi.vector[i] * f[i];
    return s;
}

Subgroup cocharacter_stabilizer(const Torus& T, const std::vector<Int>& mu) {
    Subgroup S;
    for (int g = 0; g < static_cast<int>(T.scenario().group().order()); ++g)
        if (T.act_cocharacter(g, mu) == mu) S.push_back(g);
    return S;
}

FieldHandle field_of_definition(const Cocharacter& mu) {
    return FieldHandle(mu.torus.scenario_ptr(), cocharacter_stabilizer(mu.torus, mu.vector));
}

Torus torus_of_field(const FieldHandle& K) {
    const auto& G = K.group();
    const std::size_t d = K.degree();
    std::vector<IntMatrix> action;
    for (int g = 0; g < static_cast<int>(G.order()); ++g) {
        IntMatrix A(d, d);
        for (std::size_t k = 0; k < d; ++k) A(K.act(g, k), k) = 1;
        action.push_back(A);
    }
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < d; ++k) labels.push_back(K.embedding_label(k));
    return Torus(K.scenario_ptr(), action, labels, "T^" + K.name());
}

TorusMorphism norm_morphism(const FieldHandle& L, const FieldHandle& K) {
    if (!L.contains(K)) throw PreconditionError("norm_morphism: " + K.name() + " is not a subfield of " + L.name());
    Torus TL = torus_of_field(L), TK = torus_of_field(K);
    IntMatrix C(L.degree(), K.degree());
    for (std::size_t r = 0; r < L.degree(); ++r) C(r, L.restrict_embedding(r, K)) = 1;
    TorusMorphism m{TL, TK, C};
    m.validate();
    return m;
}

Cocharacter mu_tau(const FieldHandle& K, std::size_t tau) {
    if (tau >= K.degree()) throw PreconditionError("mu_tau: not an embedding");
    std::vector<Int> v(K.degree(), 0);
    v[tau] = 1;
    return {torus_of_field(K), v};
}

Cocharacter mu_tau(const FieldHandle& K) { return mu_tau(K, K.tau_embedding()); }

Torus product_torus(const std::vector<Torus>& factors, const std::string& name) {
    if (factors.empty()) throw PreconditionError("product_torus: empty product");
    auto sc = factors[0].scenario_ptr();
    std::vector<IntMatrix> action;
    for (int g = 0; g < static_cast<int>(sc->group().order()); ++g) {
        std::vector<IntMatrix> blocks;
        for (const auto& T : factors) {
            if (T.scenario_ptr() != sc) throw PreconditionError("product_torus: factors over different scenarios");
            blocks.push_back(T.action(g));
        }
        action.push_back(block_diag(blocks));
    }
    std::vector<std::string> labels;
    std::string nm;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        for (const auto& l : factors[i].labels()) labels.push_back(std::to_string(i) + "." + l);
        nm += (i ? " x " : "") + factors[i].name();
    }
    return Torus(sc, action, labels, name.empty() ? nm : name);
}

TorusMorphism product_projection(const Torus& product, const std::vector<Torus>& factors, std::size_t i) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < i; ++k) off += factors[k].rank();
    IntMatrix C(product.rank(), factors[i].rank());
    for (std::size_t k = 0; k < factors[i].rank(); ++k) C(off + k, k) = 1;
    TorusMorphism m{product, factors[i], C};
    m.validate();
    return m;
}

QuotientResult quotient_torus(const Torus& T, const IntMatrix& sub, const std::string& name) {
    if (sub.cols() != T.rank()) throw PreconditionError("quotient_torus: sublattice lives in a lattice of different rank");
    if (matrix_rank(sub) != sub.rows()) throw PreconditionError("quotient_torus: sublattice basis rows are linearly dependent");
    auto coker = cokernel(sub);
    if (!coker.torsion_free())
        throw PreconditionError("quotient_torus: sublattice is not saturated (quotient has torsion " + coker.to_string() + ")");
    const auto& G = T.scenario().group();
    IntMatrix Yt = sub.transpose();
    std::vector<IntMatrix> action;
    for (int g = 0; g < static_cast<int>(G.order()); ++g) {
        const std::size_t k = sub.rows();
        IntMatrix A(k, k);
        if (k > 0) {
            auto sol = solve_unique(to_rat(Yt), to_rat(T.action(g) * Yt));
            if (!sol || !is_integral(*sol)) throw PreconditionError("quotient_torus: sublattice is not stable under " + G.label(g));
            A = to_int(*sol);
        }
        action.push_back(A);
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < sub.rows(); ++i) labels.push_back("y" + std::to_string(i));
    Torus S(T.scenario_ptr(), action, labels, name.empty() ? T.name() + "/sub" : name);
    TorusMorphism proj{T, S, Yt};
    proj.validate();
    return {S, proj};
}

SubtorusResult subtorus_from_char_surjection(const Torus& T, const IntMatrix& P, const std::string& name) {
    if (P.cols() != T.rank()) throw PreconditionError("subtorus_from_char_surjection: map does not start at X^*(T)");
    IntMatrix R = right_inverse(P);
    const auto& G = T.scenario().group();
    std::vector<IntMatrix> action;
    for (int g = 0; g < static_cast<int>(G.order()); ++g) action.push_back(P * T.action(g) * R);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < P.rows(); ++i) labels.push_back("s" + std::to_string(i));
    try {
        Torus S(T.scenario_ptr(), action, labels, name.empty() ? "sub(" + T.name() + ")" : name);
        TorusMorphism inc{S, T, P};
        inc.validate();
        return {S, inc};
    } catch (const InvariantError&) {
        throw PreconditionError("subtorus_from_char_surjection: kernel of the surjection is not Galois-stable");
    }
}

}  // namespace cmforge
