#include "cmforge/group.hpp"
#include "cmforge/lattice.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace cmforge {

FiniteGroup::FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> table)
    : labels_(std::move(labels)), table_(std::move(table)) {
    const int n = static_cast<int>(labels_.size());
    if (n == 0) throw ConfigError("group has no elements");
    if (static_cast<int>(table_.size()) != n) throw ConfigError("multiplication table has wrong number of rows");
    for (int i = 0; i < n; ++i) {
        if (!index_.emplace(labels_[i], i).second) throw ConfigError("duplicate element label '" + labels_[i] + "'");
        if (static_cast<int>(table_[i].size()) != n) throw ConfigError("multiplication table row has wrong length");
        for (int v : table_[i])
            if (v < 0 || v >= n) throw ConfigError("multiplication table entry out of range");
    }
    e_ = -1;
    for (int i = 0; i < n && e_ < 0; ++i) {
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) ok = table_[i][j] == j && table_[j][i] == j;
        if (ok) e_ = i;
    }
    if (e_ < 0) throw ConfigError("multiplication table has no identity");
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                if (table_[table_[a][b]][c] != table_[a][table_[b][c]]) throw ConfigError("multiplication table is not associative");
    inv_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b)
            if (table_[a][b] == e_ && table_[b][a] == e_) inv_[a] = b;
        if (inv_[a] < 0) throw ConfigError("element '" + labels_[a] + "' has no inverse");
    }
}

int FiniteGroup::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw ConfigError("unknown group element '" + label + "'");
    return it->second;
}

bool FiniteGroup::is_abelian() const {
    for (std::size_t a = 0; a < order(); ++a)
        for (std::size_t b = 0; b < order(); ++b)
            if (table_[a][b] != table_[b][a]) return false;
    return true;
}

Subgroup FiniteGroup::closure(const std::vector<int>& generators) const {
    std::set<int> s{e_};
    std::deque<int> todo{e_};
    while (!todo.empty()) {
        int x = todo.front();
        todo.pop_front();
        for (int g : generators) {
            int y = mul(x, g);
            if (s.insert(y).second) todo.push_back(y);
        }
    }
    return Subgroup(s.begin(), s.end());
}

bool FiniteGroup::is_subgroup(const std::vector<int>& elems) const {
    if (elems.empty()) return false;
    std::set<int> s(elems.begin(), elems.end());
    for (int a : s)
        for (int b : s)
            if (!s.count(mul(a, b))) return false;
    return true;  // finite: closed under products suffices
}

std::vector<Subgroup> FiniteGroup::all_subgroups() const {
    if (!subgroup_cache_.empty()) return subgroup_cache_;
    std::set<Subgroup> seen;
    std::deque<Subgroup> todo;
    Subgroup triv{e_};
    seen.insert(triv);
    todo.push_back(triv);
    while (!todo.empty()) {
        Subgroup H = todo.front();
        todo.pop_front();
        for (int g = 0; g < static_cast<int>(order()); ++g) {
            if (std::binary_search(H.begin(), H.end(), g)) continue;
            std::vector<int> gens = H;
            gens.push_back(g);
            Subgroup K = closure(gens);
            if (seen.insert(K).second) todo.push_back(K);
        }
    }
    std::vector<Subgroup> out(seen.begin(), seen.end());
    std::stable_sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) { return a.size() < b.size(); });
    subgroup_cache_ = out;
    return out;
}

std::vector<Subgroup> FiniteGroup::subgroups_containing(const Subgroup& H) const {
    std::vector<Subgroup> out;
    for (const auto& K : all_subgroups())
        if (subgroup_contains(K, H)) out.push_back(K);
    return out;
}

bool subgroup_contains(const Subgroup& big, const Subgroup& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

Subgroup subgroup_intersection(const Subgroup& a, const Subgroup& b) {
    Subgroup r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

GModuleLattice::GModuleLattice(std::shared_ptr<const FiniteGroup> group, std::vector<IntMatrix> action)
    : group_(std::move(group)), action_(std::move(action)) {
    if (!group_) throw PreconditionError("GModuleLattice: null group");
    if (action_.size() != group_->order()) throw PreconditionError("GModuleLattice: one action matrix per group element required");
    rank_ = action_.empty() ? 0 : action_[0].rows();
    for (const auto& A : action_)
        if (A.rows() != rank_ || A.cols() != rank_) throw PreconditionError("GModuleLattice: action matrices must be square of the lattice rank");
}

void GModuleLattice::validate() const {
    const auto& G = *group_;
    if (!action_[G.identity()].is_identity()) throw InvariantError("GModuleLattice: identity does not act trivially");
    for (std::size_t g = 0; g < G.order(); ++g) {
        if (!is_unimodular(action_[g])) throw InvariantError("GModuleLattice: action of '" + G.label(g) + "' is not unimodular");
        for (std::size_t h = 0; h < G.order(); ++h)
            if (action_[G.mul(g, h)] != action_[g] * action_[h])
                throw InvariantError("GModuleLattice: action is not a homomorphism at (" + G.label(g) + "," + G.label(h) + ")");
    }
}

}  // namespace cmforge
