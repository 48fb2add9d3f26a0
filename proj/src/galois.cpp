#include "cmforge/galois.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

namespace cmforge {

GaloisScenario::GaloisScenario(std::string name, std::shared_ptr<const FiniteGroup> group, int iota,
                               std::map<std::string, Subgroup> fields, std::optional<int> cyclotomic_n, int tau)
    : name_(std::move(name)), group_(std::move(group)), iota_(iota), tau_(tau), cyclotomic_n_(cyclotomic_n) {
    const auto& G = *group_;
    const int n = static_cast<int>(G.order());
    if (iota_ < 0 || iota_ >= n) throw ConfigError("iota is not a group element");
    if (G.mul(iota_, iota_) != G.identity()) throw ConfigError("iota does not square to the identity");
    if (tau_ < 0) tau_ = G.identity();
    if (tau_ >= n) throw ConfigError("tau is not a group element");
    bool has_trivial = false, has_full = false;
    for (auto& [fname, H] : fields) {
        std::sort(H.begin(), H.end());
        H.erase(std::unique(H.begin(), H.end()), H.end());
        for (int h : H)
            if (h < 0 || h >= n) throw ConfigError("field '" + fname + "' lists an element outside the group");
        if (!G.is_subgroup(H)) throw ConfigError("field '" + fname + "' is not a subgroup");
        if (H.size() == 1) has_trivial = true;
        if (static_cast<int>(H.size()) == n) has_full = true;
        fields_[fname] = H;
    }
    if (!has_trivial && !fields_.count("L")) fields_["L"] = Subgroup{G.identity()};
    if (!has_full && !fields_.count("Q")) {
        Subgroup all(n);
        std::iota(all.begin(), all.end(), 0);
        fields_["Q"] = all;
    }
}

const Subgroup& GaloisScenario::field_subgroup(const std::string& name) const {
    auto it = fields_.find(name);
    if (it == fields_.end()) throw ConfigError("scenario '" + name_ + "' has no field named '" + name + "'");
    return it->second;
}

std::optional<std::string> GaloisScenario::name_of(const Subgroup& H) const {
    for (const auto& [n, K] : fields_)
        if (K == H) return n;
    return std::nullopt;
}

nlohmann::json GaloisScenario::to_json() const {
    const auto& G = *group_;
    nlohmann::json j;
    if (cyclotomic_n_) {
        j["cyclotomic_n"] = *cyclotomic_n_;
    } else {
        nlohmann::json table = nlohmann::json::array();
        for (std::size_t a = 0; a < G.order(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t b = 0; b < G.order(); ++b) row.push_back(G.label(G.mul(a, b)));
            table.push_back(row);
        }
        j["group_table"] = {{"elements", G.labels()}, {"table", table}};
    }
    j["iota"] = G.label(iota_);
    j["tau"] = G.label(tau_);
    nlohmann::json f = nlohmann::json::object();
    for (const auto& [n, H] : fields_) {
        std::vector<std::string> labels;
        for (int h : H) labels.push_back(G.label(h));
        f[n] = labels;
    }
    j["fields"] = f;
    return j;
}

FieldHandle::FieldHandle(ScenarioPtr scenario, Subgroup H, std::string name) : sc_(std::move(scenario)), H_(std::move(H)), name_(std::move(name)) {
    const auto& G = sc_->group();
    std::sort(H_.begin(), H_.end());
    if (!G.is_subgroup(H_)) throw PreconditionError("field handle: not a subgroup");
    if (name_.empty()) {
        if (auto n = sc_->name_of(H_))
            name_ = *n;
        else {
            name_ = "{";
            for (std::size_t i = 0; i < H_.size(); ++i) name_ += (i ? "," : "") + G.label(H_[i]);
            name_ += "}";
        }
    }
    const std::size_t n = G.order();
    coset_of_.assign(n, static_cast<std::size_t>(-1));
    std::vector<int> scan{G.identity()};
    for (int g = 0; g < static_cast<int>(n); ++g)
        if (g != G.identity()) scan.push_back(g);
    for (int g : scan) {
        if (coset_of_[g] != static_cast<std::size_t>(-1)) continue;
        std::vector<int> c;
        for (int h : H_) c.push_back(G.mul(g, h));
        // representative: g itself (first occurrence), remaining members sorted
        std::sort(c.begin(), c.end());
        c.erase(std::find(c.begin(), c.end(), g));
        c.insert(c.begin(), g);
        for (int x : c) coset_of_[x] = cosets_.size();
        cosets_.push_back(c);
    }
}

std::string FieldHandle::embedding_label(std::size_t k) const {
    if (H_.size() == 1) return group().label(representative(k));
    return group().label(representative(k)) + "H";
}

std::size_t FieldHandle::restrict_embedding(std::size_t k, const FieldHandle& sub) const {
    if (!contains(sub)) throw PreconditionError("restrict_embedding: not a subfield");
    return sub.embedding_of(representative(k));
}

FieldHandle field(ScenarioPtr sc, const std::string& name) {
    if (!name.empty() && name.front() == '{') {
        if (name.back() != '}') throw ConfigError("malformed subgroup literal '" + name + "'");
        std::string body = name.substr(1, name.size() - 2);
        std::vector<int> elems;
        std::size_t pos = 0;
        while (pos <= body.size() && !body.empty()) {
            auto next = body.find(',', pos);
            std::string tok = body.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            elems.push_back(sc->group().index_of(tok));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        Subgroup H = sc->group().closure(elems);
        return FieldHandle(sc, H);
    }
    return FieldHandle(sc, sc->field_subgroup(name), name);
}

FieldHandle field_from_subgroup(ScenarioPtr sc, const Subgroup& H) { return FieldHandle(sc, H); }

FieldHandle ambient_field(ScenarioPtr sc) { return FieldHandle(sc, Subgroup{sc->group().identity()}); }

FieldHandle rational_field(ScenarioPtr sc) {
    Subgroup all(sc->group().order());
    std::iota(all.begin(), all.end(), 0);
    return FieldHandle(sc, all);
}

bool is_totally_real(const FieldHandle& K) {
    const auto& G = K.group();
    const int iota = K.scenario().iota();
    for (int g = 0; g < static_cast<int>(G.order()); ++g)
        if (!std::binary_search(K.subgroup().begin(), K.subgroup().end(), G.conj(iota, g))) return false;
    return true;
}

std::optional<int> cm_conjugation(const FieldHandle& K) {
    const auto& G = K.group();
    const int iota = K.scenario().iota();
    const auto& H = K.subgroup();
    if (std::binary_search(H.begin(), H.end(), iota)) return std::nullopt;
    // every conjugate g^{-1} iota g must lie in the single coset iota H
    const std::size_t target = K.embedding_of(iota);
    for (int g = 0; g < static_cast<int>(G.order()); ++g) {
        int x = G.conj(iota, g);
        if (std::binary_search(H.begin(), H.end(), x)) return std::nullopt;  // a real embedding
        if (K.embedding_of(x) != target) return std::nullopt;
    }
    const auto& c = K.coset(target);
    return *std::min_element(c.begin(), c.end());
}

std::vector<FieldHandle> cm_subfields(const FieldHandle& K) {
    std::vector<FieldHandle> out;
    auto subs = K.group().subgroups_containing(K.subgroup());
    // descending subgroup order = ascending degree
    std::stable_sort(subs.begin(), subs.end(), [](const Subgroup& a, const Subgroup& b) { return a.size() > b.size(); });
    for (const auto& S : subs) {
        FieldHandle F(K.scenario_ptr(), S);
        if (is_cm(F)) out.push_back(F);
    }
    return out;
}

FieldHandle maximal_cm_subfield(const FieldHandle& K) {
    auto cms = cm_subfields(K);
    if (cms.empty()) throw NoCMSubfieldError("no CM subfield in " + K.name());
    const FieldHandle& best = cms.back();  // largest degree
    for (const auto& F : cms)
        if (!best.contains(F))
            throw InvariantError("maximal CM subfield of " + K.name() + " is not unique: " + F.name() + " is not contained in " + best.name());
    return best;
}

FieldHandle maximal_totally_real_subfield(const FieldHandle& E) {
    auto c = cm_conjugation(E);
    if (!c) throw PreconditionError("maximal_totally_real_subfield: " + E.name() + " is not a CM field");
    std::vector<int> gens = E.subgroup();
    gens.push_back(*c);
    return FieldHandle(E.scenario_ptr(), E.group().closure(gens));
}

FieldHandle compositum(const FieldHandle& a, const FieldHandle& b) {
    if (a.scenario_ptr() != b.scenario_ptr()) throw PreconditionError("compositum: fields from different scenarios");
    return FieldHandle(a.scenario_ptr(), subgroup_intersection(a.subgroup(), b.subgroup()));
}

FieldHandle field_intersection(const FieldHandle& a, const FieldHandle& b) {
    if (a.scenario_ptr() != b.scenario_ptr()) throw PreconditionError("field_intersection: fields from different scenarios");
    std::vector<int> gens = a.subgroup();
    gens.insert(gens.end(), b.subgroup().begin(), b.subgroup().end());
    return FieldHandle(a.scenario_ptr(), a.group().closure(gens));
}

namespace {

std::shared_ptr<const FiniteGroup> unit_group(int n, std::vector<int>& residues) {
    residues.clear();
    for (int a = 1; a < n; ++a)
        if (std::gcd(a, n) == 1) residues.push_back(a);
    std::vector<std::string> labels;
    std::map<int, int> idx;
    for (std::size_t i = 0; i < residues.size(); ++i) {
        labels.push_back(std::to_string(residues[i]));
        idx[residues[i]] = static_cast<int>(i);
    }
    std::vector<std::vector<int>> table(residues.size(), std::vector<int>(residues.size()));
    for (std::size_t i = 0; i < residues.size(); ++i)
        for (std::size_t j = 0; j < residues.size(); ++j) table[i][j] = idx[(residues[i] * residues[j]) % n];
    return std::make_shared<FiniteGroup>(labels, table);
}

Subgroup labels_to_subgroup(const FiniteGroup& G, const std::vector<std::string>& labels) {
    Subgroup H;
    for (const auto& l : labels) H.push_back(G.index_of(l));
    std::sort(H.begin(), H.end());
    return H;
}

ScenarioPtr cyclotomic_named(int n, const std::string& name, const std::map<std::string, std::vector<std::string>>& extra) {
    if (n < 3) throw PreconditionError("cyclotomic scenario requires n >= 3");
    std::vector<int> res;
    auto G = unit_group(n, res);
    std::map<std::string, Subgroup> fields;
    for (const auto& [k, v] : extra) fields[k] = labels_to_subgroup(*G, v);
    return std::make_shared<GaloisScenario>(name, G, G->index_of(std::to_string(n - 1)), fields, n);
}

ScenarioPtr c2_times_s3() {
    const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}}};
    const std::array<std::string, 6> pn{"e", "(01)", "(02)", "(12)", "(012)", "(021)"};
    auto perm_index = [&](const std::array<int, 3>& p) {
        for (int k = 0; k < 6; ++k)
            if (perms[k] == p) return k;
        return -1;
    };
    std::vector<std::string> labels;
    for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 6; ++k) labels.push_back(std::to_string(a) + ":" + pn[k]);
    std::vector<std::vector<int>> table(12, std::vector<int>(12));
    for (int x = 0; x < 12; ++x)
        for (int y = 0; y < 12; ++y) {
            int a = x / 6, p = x % 6, b = y / 6, q = y % 6;
            std::array<int, 3> comp{};
            for (int t = 0; t < 3; ++t) comp[t] = perms[p][perms[q][t]];
            table[x][y] = ((a + b) % 2) * 6 + perm_index(comp);
        }
    auto G = std::make_shared<FiniteGroup>(labels, table);
    std::map<std::string, Subgroup> fields;
    fields["K"] = labels_to_subgroup(*G, {"0:e", "0:(12)"});
    fields["E"] = labels_to_subgroup(*G, {"0:e", "0:(01)", "0:(02)", "0:(12)", "0:(012)", "0:(021)"});
    return std::make_shared<GaloisScenario>("qi-cbrt2", G, G->index_of("1:(12)"), fields);
}

ScenarioPtr dihedral4() {
    // r^a s^b, index b*4 + a;  (r^a s^b)(r^c s^d) = r^{a + (-1)^b c} s^{b+d}
    std::vector<std::string> labels{"e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"};
    std::vector<std::vector<int>> table(8, std::vector<int>(8));
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            int a = x % 4, b = x / 4, c = y % 4, d = y / 4;
            int e = ((a + (b ? -c : c)) % 4 + 4) % 4;
            table[x][y] = ((b + d) % 2) * 4 + e;
        }
    auto G = std::make_shared<FiniteGroup>(labels, table);
    std::map<std::string, Subgroup> fields;
    fields["K"] = labels_to_subgroup(*G, {"e", "s"});
    fields["F"] = labels_to_subgroup(*G, {"e", "s", "r2", "r2s"});
    return std::make_shared<GaloisScenario>("d4-cm", G, G->index_of("r2"), fields);
}

}  // namespace

ScenarioPtr cyclotomic_scenario(int n) { return cyclotomic_named(n, "cyclo-" + std::to_string(n), {}); }

std::vector<std::string> list_builtins() {
    std::vector<std::string> out{"qi", "qzeta5", "qi-cbrt2", "d4-cm"};
    for (int n = 3; n <= 60; ++n) out.push_back("cyclo-" + std::to_string(n));
    return out;
}

ScenarioPtr builtin_scenario(const std::string& name) {
    if (name == "qi") return cyclotomic_named(4, "qi", {{"K", {"1"}}, {"E", {"1"}}});
    if (name == "qzeta5") return cyclotomic_named(5, "qzeta5", {{"K", {"1"}}, {"E", {"1"}}, {"F", {"1", "4"}}});
    if (name == "qi-cbrt2") return c2_times_s3();
    if (name == "d4-cm") return dihedral4();
    if (name.rfind("cyclo-", 0) == 0) {
        int n = 0;
        try {
            n = std::stoi(name.substr(6));
        } catch (...) {
            throw ConfigError("unknown builtin scenario '" + name + "'");
        }
        if (n < 3 || n > 60) throw ConfigError("builtin cyclotomic scenarios cover 3 <= n <= 60");
        return cyclotomic_scenario(n);
    }
    throw ConfigError("unknown builtin scenario '" + name + "'");
}

namespace {

std::string element_label(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ConfigError("group elements must be given as strings or integers");
}

}  // namespace

ScenarioPtr scenario_from_json(const nlohmann::json& j, const std::string& name) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    if (j.contains("group_table") == j.contains("cyclotomic_n"))
        throw ConfigError("scenario needs exactly one of 'group_table' or 'cyclotomic_n'");
    std::shared_ptr<const FiniteGroup> G;
    std::optional<int> cyc;
    if (j.contains("cyclotomic_n")) {
        if (!j["cyclotomic_n"].is_number_integer()) throw ConfigError("'cyclotomic_n' must be an integer");
        int n = j["cyclotomic_n"].get<int>();
        if (n < 3) throw ConfigError("'cyclotomic_n' must be at least 3");
        std::vector<int> res;
        G = unit_group(n, res);
        cyc = n;
    } else {
        const auto& gt = j["group_table"];
        if (!gt.is_object() || !gt.contains("elements") || !gt.contains("table")) throw ConfigError("'group_table' needs 'elements' and 'table'");
        std::vector<std::string> labels;
        for (const auto& e : gt["elements"]) labels.push_back(element_label(e));
        std::map<std::string, int> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) idx[labels[i]] = static_cast<int>(i);
        std::vector<std::vector<int>> table;
        if (!gt["table"].is_array()) throw ConfigError("'table' must be an array of rows");
        for (const auto& row : gt["table"]) {
            std::vector<int> r;
            if (!row.is_array()) throw ConfigError("'table' rows must be arrays");
            for (const auto& e : row) {
                auto it = idx.find(element_label(e));
                if (it == idx.end()) throw ConfigError("table entry '" + element_label(e) + "' is not a listed element");
                r.push_back(it->second);
            }
            table.push_back(r);
        }
        G = std::make_shared<FiniteGroup>(labels, table);
    }
    int iota;
    if (j.contains("iota"))
        iota = G->index_of(element_label(j["iota"]));
    else if (cyc)
        iota = G->index_of(std::to_string(*cyc - 1));
    else
        throw ConfigError("scenario needs 'iota'");
    if (cyc && G->label(iota) != std::to_string(*cyc - 1))
        throw ConfigError("cyclotomic scenario: iota must be the class of -1 (" + std::to_string(*cyc - 1) + ")");
    std::map<std::string, Subgroup> fields;
    if (j.contains("fields")) {
        if (!j["fields"].is_object()) throw ConfigError("'fields' must be an object");
        for (const auto& [fname, elems] : j["fields"].items()) {
            if (!elems.is_array()) throw ConfigError("field '" + fname + "' must list subgroup elements");
            Subgroup H;
            for (const auto& e : elems) H.push_back(G->index_of(element_label(e)));
            fields[fname] = H;
        }
    }
    int tau = -1;
    if (j.contains("tau")) tau = G->index_of(element_label(j["tau"]));
    std::string nm = j.value("name", name);
    return std::make_shared<GaloisScenario>(nm, G, iota, fields, cyc, tau);
}

ScenarioPtr load_scenario(const std::string& name_or_path) {
    auto names = list_builtins();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin_scenario(name_or_path);
    if (!std::filesystem::exists(name_or_path)) throw ConfigError("scenario '" + name_or_path + "' is neither a builtin nor a readable file");
    std::ifstream in(name_or_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario file is not valid JSON: ") + e.what());
    }
    return scenario_from_json(j, std::filesystem::path(name_or_path).stem().string());
}

}  // namespace cmforge
