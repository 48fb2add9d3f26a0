#pragma once

#include "cmforge/matrix.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace cmforge {

// Subgroups are sorted vectors of element indices.
using Subgroup = std::vector<int>;

class FiniteGroup {
public:
    FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> table);

    std::size_t order() const { return labels_.size(); }
    int mul(int a, int b) const { return table_[a][b]; }
    int inv(int a) const { return inv_[a]; }
    int identity() const { return e_; }
    // g^{-1} x g
    int conj(int x, int g) const { return mul(mul(inv(g), x), g); }
    const std::string& label(int a) const { return labels_.at(a); }
    const std::vector<std::string>& labels() const { return labels_; }
    int index_of(const std::string& label) const;
    bool is_abelian() const;

    Subgroup closure(const std::vector<int>& generators) const;
    bool is_subgroup(const std::vector<int>& elems) const;
    std::vector<Subgroup> all_subgroups() const;
    std::vector<Subgroup> subgroups_containing(const Subgroup& H) const;

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<int>> table_;
    std::map<std::string, int> index_;
    std::vector<int> inv_;
    int e_ = 0;
    mutable std::vector<Subgroup> subgroup_cache_;
};

bool subgroup_contains(const Subgroup& big, const Subgroup& small);
Subgroup subgroup_intersection(const Subgroup& a, const Subgroup& b);

// Free Z-module with a left action g -> A(g) on coordinate columns:
// A(gh) = A(g) A(h), A(e) = I, every A(g) unimodular.
class GModuleLattice {
public:
    GModuleLattice() = default;
    GModuleLattice(std::shared_ptr<const FiniteGroup> group, std::vector<IntMatrix> action);

    std::size_t rank() const { return rank_; }
    const FiniteGroup& group() const { return *group_; }
    std::shared_ptr<const FiniteGroup> group_ptr() const { return group_; }
    const IntMatrix& action(int g) const { return action_.at(g); }
    const std::vector<IntMatrix>& actions() const { return action_; }
    std::vector<Int> act(int g, const std::vector<Int>& v) const { return action_.at(g).apply(v); }

    // Exhaustive check of the action axioms; throws InvariantError on failure.
    void validate() const;

private:
    std::shared_ptr<const FiniteGroup> group_;
    std::vector<IntMatrix> action_;
    std::size_t rank_ = 0;
};

}  // namespace cmforge
