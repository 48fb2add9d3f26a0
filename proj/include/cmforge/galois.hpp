#pragma once

#include "cmforge/group.hpp"

#include "json.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cmforge {

// Finite model of Gal(L/Q) together with the complex conjugation iota
// (determined by a fixed embedding of L into C). Fields are subgroups.
class GaloisScenario {
public:
    GaloisScenario(std::string name, std::shared_ptr<const FiniteGroup> group, int iota,
                   std::map<std::string, Subgroup> fields, std::optional<int> cyclotomic_n = std::nullopt,
                   int tau = -1);

    const std::string& name() const { return name_; }
    const FiniteGroup& group() const { return *group_; }
    std::shared_ptr<const FiniteGroup> group_ptr() const { return group_; }
    int iota() const { return iota_; }
    // element whose cosets give the distinguished embedding tau (identity by default)
    int tau() const { return tau_; }
    std::optional<int> cyclotomic_n() const { return cyclotomic_n_; }
    const std::map<std::string, Subgroup>& fields() const { return fields_; }
    const Subgroup& field_subgroup(const std::string& name) const;
    // name of a registered field with this subgroup, if any
    std::optional<std::string> name_of(const Subgroup& H) const;

    nlohmann::json to_json() const;

private:
    std::string name_;
    std::shared_ptr<const FiniteGroup> group_;
    int iota_;
    int tau_;
    std::map<std::string, Subgroup> fields_;
    std::optional<int> cyclotomic_n_;
};

using ScenarioPtr = std::shared_ptr<const GaloisScenario>;

// Number field K = L^H. Embeddings are the left cosets gH, enumerated in order
// of first occurrence while scanning g = 0, 1, ...; sigma acts by left multiplication.
class FieldHandle {
public:
    FieldHandle() = default;
    FieldHandle(ScenarioPtr scenario, Subgroup H, std::string name = "");

    const GaloisScenario& scenario() const { return *sc_; }
    ScenarioPtr scenario_ptr() const { return sc_; }
    const FiniteGroup& group() const { return sc_->group(); }
    const Subgroup& subgroup() const { return H_; }
    const std::string& name() const { return name_; }
    std::size_t degree() const { return cosets_.size(); }

    std::size_t embedding_of(int g) const { return coset_of_.at(g); }
    int representative(std::size_t k) const { return cosets_.at(k).front(); }
    const std::vector<int>& coset(std::size_t k) const { return cosets_.at(k); }
    // sigma . (gH) = (sigma g) H
    std::size_t act(int sigma, std::size_t k) const { return coset_of_[group().mul(sigma, representative(k))]; }
    std::string embedding_label(std::size_t k) const;
    std::size_t tau_embedding() const { return embedding_of(sc_->tau()); }

    // Does this field contain `sub` (as a subfield)?
    bool contains(const FieldHandle& sub) const { return subgroup_contains(sub.H_, H_); }
    // Embedding of `sub` obtained by restricting embedding k of this field.
    std::size_t restrict_embedding(std::size_t k, const FieldHandle& sub) const;

    friend bool operator==(const FieldHandle& a, const FieldHandle& b) { return a.sc_ == b.sc_ && a.H_ == b.H_; }
    friend bool operator!=(const FieldHandle& a, const FieldHandle& b) { return !(a == b); }

private:
    ScenarioPtr sc_;
    Subgroup H_;
    std::string name_;
    std::vector<std::vector<int>> cosets_;
    std::vector<std::size_t> coset_of_;
};

FieldHandle field(ScenarioPtr sc, const std::string& name);
FieldHandle field_from_subgroup(ScenarioPtr sc, const Subgroup& H);
FieldHandle ambient_field(ScenarioPtr sc);
FieldHandle rational_field(ScenarioPtr sc);

bool is_totally_real(const FieldHandle& K);
// Conjugation element c (smallest element of the coset cH) when K is CM.
std::optional<int> cm_conjugation(const FieldHandle& K);
inline bool is_cm(const FieldHandle& K) { return cm_conjugation(K).has_value(); }

FieldHandle maximal_cm_subfield(const FieldHandle& K);
FieldHandle maximal_totally_real_subfield(const FieldHandle& E);
FieldHandle compositum(const FieldHandle& a, const FieldHandle& b);
FieldHandle field_intersection(const FieldHandle& a, const FieldHandle& b);
// All CM subfields of K (including K when CM), ascending degree.
std::vector<FieldHandle> cm_subfields(const FieldHandle& K);

struct NoCMSubfieldError : PreconditionError {
    using PreconditionError::PreconditionError;
};

ScenarioPtr cyclotomic_scenario(int n);
ScenarioPtr builtin_scenario(const std::string& name);
std::vector<std::string> list_builtins();
ScenarioPtr scenario_from_json(const nlohmann::json& j, const std::string& name = "custom");
ScenarioPtr load_scenario(const std::string& name_or_path);

}  // namespace cmforge
