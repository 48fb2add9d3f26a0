#include "cmforge/report.hpp"

#include "cmforge/bc_system.hpp"
#include "cmforge/cm_serre.hpp"
#include "cmforge/cyclotomic.hpp"
#include "cmforge/symplectic.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace cmforge {

using nlohmann::json;

namespace {

json jint(const Int& x) {
    if (x >= std::numeric_limits<long long>::min() && x <= std::numeric_limits<long long>::max()) return x.convert_to<long long>();
    return cmforge::to_string(x);
}

json jmat(const IntMatrix& M) {
    json rows = json::array();
    for (std::size_t i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < M.cols(); ++j) r.push_back(jint(M(i, j)));
        rows.push_back(r);
    }
    return rows;
}

json jmat(const RatMatrix& M) {
    json rows = json::array();
    for (std::size_t i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < M.cols(); ++j) r.push_back(cmforge::to_string(M(i, j)));
        rows.push_back(r);
    }
    return rows;
}

json jvec(const std::vector<Int>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(jint(x));
    return a;
}

std::string decimal(long double x, int digits = 15) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, x);
    return buf;
}

std::string complex_string(const Complex& z) {
    return decimal(z.real(), 12) + (z.imag() < 0 ? " - " : " + ") + decimal(std::abs(z.imag()), 12) + "i";
}

std::string field_label(const FieldHandle& F) {
    if (auto n = F.scenario().name_of(F.subgroup())) return *n;
    if (!F.name().empty()) return F.name();
    std::ostringstream os;
    os << "fixed field of {";
    for (std::size_t i = 0; i < F.subgroup().size(); ++i) os << (i ? "," : "") << F.group().label(F.subgroup()[i]);
    os << "}";
    return os.str();
}

// Checks and timings of one run; every check carries its descriptive tag.
class Recorder {
public:
    explicit Recorder(std::string prefix = "") : prefix_(std::move(prefix)) {}

    template <class F>
    auto timed(F&& f) {
        auto t0 = std::chrono::steady_clock::now();
        auto r = f();
        last_ms_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }
    void add(const CheckResult& c) { add(c, last_ms_); }
    void add(const CheckResult& c, double ms) {
        checks_.push_back({{"name", prefix_ + c.name},
                           {"ref", c.ref},
                           {"status", c.passed ? "pass" : "fail"},
                           {"detail", c.detail},
                           {"timing_ms", std::round(ms * 1000) / 1000}});
        passed_ = passed_ && c.passed;
    }
    void add_all(const std::vector<CheckResult>& cs) {
        for (const auto& c : cs) add(c);
    }
    const json& checks() const { return checks_; }
    bool passed() const { return passed_; }
    void merge(const Recorder& other) {
        for (const auto& c : other.checks_) checks_.push_back(c);
        passed_ = passed_ && other.passed_;
    }

private:
    std::string prefix_;
    json checks_ = json::array();
    bool passed_ = true;
    double last_ms_ = 0;
};

// the scenario's field "K" when it names one, else the ambient field
FieldHandle principal_field(const ScenarioPtr& sc) { return sc->fields().count("K") ? field(sc, "K") : ambient_field(sc); }

FieldHandle resolve_field(const RunConfig& cfg) {
    auto sc = load_scenario(cfg.scenario);
    if (cfg.field.empty()) return principal_field(sc);
    if (sc->fields().count(cfg.field)) return field(sc, cfg.field);
    auto names = list_builtins();
    if (std::find(names.begin(), names.end(), cfg.field) != names.end()) return principal_field(builtin_scenario(cfg.field));
    throw ConfigError("field '" + cfg.field + "' is neither a field of scenario " + sc->name() + " nor a builtin scenario");
}

FieldHandle require_cm(const FieldHandle& E) {
    if (!is_cm(E)) {
        std::string hint;
        try {
            hint = "; its maximal CM subfield is " + field_label(maximal_cm_subfield(E));
        } catch (const NoCMSubfieldError&) {
            hint = "; it has no CM subfield";
        }
        throw PreconditionError("field " + field_label(E) + " is not a CM field" + hint);
    }
    return E;
}

json morphism_json(const TorusMorphism& m) {
    return {{"source", m.source.name()}, {"target", m.target.name()}, {"char_map", jmat(m.char_map)}};
}

json cmd_scenario(const RunConfig& cfg, Recorder& rec) {
    auto sc = rec.timed([&] { return load_scenario(cfg.scenario); });
    json out = sc->to_json();
    json fields = json::object();
    for (const auto& [name, H] : sc->fields()) {
        FieldHandle F = field(sc, name);
        fields[name] = {{"degree", F.degree()}, {"cm", is_cm(F)}, {"totally_real", is_totally_real(F)}};
    }
    out["field_summary"] = fields;
    out["group_order"] = sc->group().order();
    rec.add({"scenario_loaded", "scenario-consistency", true, sc->name() + " with " + std::to_string(sc->fields().size()) + " named fields"});
    return out;
}

json cmd_cm_types(const RunConfig& cfg, Recorder& rec) {
    FieldHandle E = require_cm(resolve_field(cfg));
    auto types = rec.timed([&] { return enumerate_cm_types(E); });
    json arr = json::array();
    std::size_t primitive = 0;
    for (const auto& t : types) {
        FieldHandle R = reflex_field(t);
        primitive += is_primitive(t);
        json labels = json::array();
        for (auto k : t.phi) labels.push_back(E.embedding_label(k));
        arr.push_back({{"type", t.to_string()}, {"embeddings", labels}, {"primitive", is_primitive(t)}, {"reflex_field", field_label(R)},
                       {"reflex_degree", R.degree()}});
    }
    std::size_t expected = std::size_t(1) << (E.degree() / 2);
    rec.add({"cm_type_count", "cm-types-are-half-systems", types.size() == expected,
             std::to_string(types.size()) + " types for degree " + std::to_string(E.degree())});
    return {{"field", field_label(E)}, {"degree", E.degree()}, {"types", arr}, {"primitive_count", primitive}};
}

json cmd_reflex(const RunConfig& cfg, Recorder& rec) {
    FieldHandle E = require_cm(resolve_field(cfg));
    json arr = json::array();
    bool ok = true;
    std::string detail = "all types";
    rec.timed([&] {
        for (const auto& t : enumerate_cm_types(E)) {
            auto rn = reflex_norm(t);
            auto closed = norm_of_restriction(reflex_field(t), torus_of_field(E), t.indicator());
            if (rn.char_map != closed.char_map) {
                ok = false;
                detail = "type " + t.to_string() + " differs";
            }
            arr.push_back({{"type", t.to_string()}, {"reflex_field", field_label(reflex_field(t))}, {"reflex_norm", morphism_json(rn)}});
        }
        return 0;
    });
    rec.add({"reflex_norm_factorization", "reflex-norm-through-serre-group", ok, detail});
    return {{"field", field_label(E)}, {"types", arr}};
}

json cmd_serre(const RunConfig& cfg, Recorder& rec) {
    FieldHandle K = resolve_field(cfg);
    auto S = rec.timed([&] { return serre_group(K); });
    json out{{"field", field_label(K)},
             {"rank_T", S.T.rank()},
             {"rank_S", S.S.rank()},
             {"sublattice", jmat(S.sublattice)},
             {"mu", jvec(S.mu)},
             {"projection", morphism_json(S.projection)}};
    auto kr = rec.timed([&] { return serre_kernel_check(K); });
    rec.add({"serre_kernel_sequence", "serre-group-kernel-of-norm", kr.exact, kr.detail});
    try {
        FieldHandle E = maximal_cm_subfield(K);
        out["maximal_cm_subfield"] = field_label(E);
        rec.add_all(rec.timed([&] { return serre_property_suite(K, E); }));
    } catch (const NoCMSubfieldError&) {
        out["maximal_cm_subfield"] = nullptr;
    }
    return out;
}

json cmd_symplectic(const RunConfig& cfg, Recorder& rec) {
    FieldHandle E = require_cm(resolve_field(cfg));
    auto xi = totally_imaginary_generator(E);
    auto basis = rec.timed([&] { return integral_symplectic_basis(build_symplectic({E}, {xi})); });
    RatMatrix B = to_rat(basis.basis);
    RatMatrix G = B * basis.space.gram * B.transpose();
    // integral coordinates place the vectors in L_E; they span a full-rank sublattice
    Int index = abs_int(determinant(basis.basis));
    rec.add({"basis_in_lattice", "integral-symplectic-basis", index != 0,
             "integral coordinates in L_E, index " + cmforge::to_string(index)});
    rec.add({"gram_is_standard", "integral-symplectic-basis", G == standard_J(G.rows()), "gram on the output basis"});
    return {{"field", field_label(E)},
            {"xi", xi.to_string()},
            {"xi_rescaled", basis.space.summands.front().xi.to_string()},
            {"q", cmforge::to_string(basis.q)},
            {"basis", jmat(basis.basis)},
            {"gram", jmat(G)}};
}

json cmd_phi_eta(const RunConfig& cfg, Recorder& rec) {
    FieldHandle K = resolve_field(cfg);
    auto rep = rec.timed([&] { return phi_eta_suite(K); });
    rec.add_all(rep.checks);
    return {{"field", field_label(K)}, {"phi", morphism_json(rep.phi)}, {"phi_explicit", morphism_json(rep.explicit_phi)},
            {"eta", morphism_json(rep.eta)}};
}

// random adelic elements: local parts at a few primes <= 13 and a tail in Sp with rational entries
AdelicGSp random_adelic(const RatMatrix& gram, std::mt19937_64& rng) {
    static const long primes[] = {2, 3, 5, 7, 11, 13};
    AdelicGSp f;
    f.tail = RatMatrix::identity(gram.rows());
    int count = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < count; ++i) {
        long p = primes[rng() % 6];
        f.local[p] = random_local_gsp(gram, p, 3, rng());
    }
    return f;
}

json cmd_decompose(const RunConfig& cfg, Recorder& rec) {
    std::mt19937_64 rng(cfg.seed);
    json dims = json::object();
    for (std::size_t dim : {2u, 4u}) {
        RatMatrix J = standard_J(dim);
        int ok = 0, ambiguity_ok = 0;
        std::string first_failure;
        rec.timed([&] {
            for (int s = 0; s < cfg.samples; ++s) {
                auto f = random_adelic(J, rng);
                auto d = decompose_gsp(f, J);
                auto v = verify_decomposition(f, d, J);
                ok += v.passed;
                if (!v.passed && first_failure.empty()) first_failure = v.detail;
                // a second decomposition differs by an element of Gamma+
                auto d2 = decompose_gsp(f, J, 1 + static_cast<unsigned>(s));
                RatMatrix delta = *inverse(d.q.matrix) * d2.q.matrix;
                auto g = gsp_check(delta, J);
                ambiguity_ok += is_integral(delta) && g && g->nu == 1;
            }
            return 0;
        });
        std::string tag = "dim" + std::to_string(dim);
        rec.add({"decomposition_" + tag, "gsp-adelic-decomposition", ok == cfg.samples,
                 std::to_string(ok) + "/" + std::to_string(cfg.samples) + " round trips" + (first_failure.empty() ? "" : "; " + first_failure)});
        rec.add({"ambiguity_" + tag, "decomposition-ambiguity-in-gamma-plus", ambiguity_ok == cfg.samples,
                 std::to_string(ambiguity_ok) + "/" + std::to_string(cfg.samples) + " ambiguities integral with similitude 1"});
        dims[tag] = {{"samples", cfg.samples}, {"round_trips", ok}};
    }
    // the Q(i) realization: gram of the integral symplectic basis
    auto Qi = ambient_field(cyclotomic_scenario(4));
    auto basis = integral_symplectic_basis(build_symplectic({Qi}, {totally_imaginary_generator(Qi)}));
    RatMatrix G = to_rat(basis.basis) * basis.space.gram * to_rat(basis.basis).transpose();
    auto pos = rec.timed([&] { return criterion_check(G, LevelGroup::IntegralUnitSimilitude, 30, cfg.seed); });
    rec.add({"criterion_integral_level", "criterion-conditions", pos.passed(),
             std::string("negative similitude: ") + (pos.condition_negative_similitude ? "yes" : "no") +
                 ", single class: " + (pos.condition_single_class ? "yes" : "no") + (pos.counterexample.empty() ? "" : "; " + pos.counterexample)});
    auto neg = rec.timed([&] { return criterion_check(G, LevelGroup::Trivial, 30, cfg.seed); });
    rec.add({"criterion_negative_control", "criterion-conditions", !neg.passed(),
             "trivial level group rejected: " + (neg.counterexample.empty() ? std::string("no counterexample recorded") : neg.counterexample)});
    return {{"samples", dims}, {"criterion_gram", jmat(G)}};
}

BCParams bc_params(const RunConfig& cfg) {
    BCParams p;
    p.field = cfg.bc_field;
    p.modulus = parse_modulus(cfg.modulus);
    p.bound = cfg.bound;
    p.cap = cfg.cap;
    return p;
}

json bc_summary(const FiniteBC& bc) {
    json primes = json::array();
    for (const auto& P : bc.primes())
        primes.push_back({{"generator", P.generator.to_string()}, {"p", P.p}, {"residue_degree", P.residue_degree}, {"norm", jint(P.norm)}});
    json states = json::array();
    for (std::size_t w = 0; w < bc.shimura().size(); ++w) states.push_back(bc.shimura().label(static_cast<int>(w)));
    return {{"field", bc.field().name},
            {"modulus", bc.shimura().ring().modulus().to_string()},
            {"working_modulus", bc.working_modulus().to_string()},
            {"primes", primes},
            {"cap", bc.params().cap},
            {"W_m", states},
            {"objects", bc.objects().size()},
            {"arrows", bc.arrows().size()}};
}

json cmd_bc_sim(const RunConfig& cfg, Recorder& rec) {
    FiniteBC bc = rec.timed([&] { return FiniteBC(bc_params(cfg)); });
    json out = bc_summary(bc);
    rec.add_all(rec.timed([&] { return bc_algebra_suite(bc, cfg.seed, cfg.samples * 2); }));
    return out;
}

json cmd_states(const RunConfig& cfg, Recorder& rec) {
    FiniteBC bc = rec.timed([&] { return FiniteBC(bc_params(cfg)); });
    json out = bc_summary(bc);
    out["state_count"] = bc.shimura().size();
    out["unit_residues"] = bc.shimura().unit_residue_count();
    out["unit_image"] = bc.shimura().unit_image_size();
    rec.add_all(rec.timed([&] { return bc_state_suite(bc, cfg.seed); }));
    return out;
}

json cmd_zeta(const RunConfig& cfg, Recorder& rec) {
    Rat beta = parse_rational(cfg.beta);
    auto r = rec.timed([&] { return partition_function(cfg.bc_field, beta, cfg.bound); });
    json out{{"field", r.field},
             {"beta", cmforge::to_string(r.beta)},
             {"bound", r.bound},
             {"ideal_count", r.ideal_count},
             {"partial_sum", decimal(r.enumerated)},
             {"partial_sum_from_euler_factors", decimal(r.from_splitting)},
             {"truncated_euler_product", decimal(r.euler_product)},
             {"tail_bound", decimal(r.tail_bound, 6)}};
    if (r.exact) out["partial_sum_exact"] = cmforge::to_string(*r.exact);
    bool agree = std::abs(static_cast<double>(r.enumerated - r.from_splitting)) < 1e-12;
    if (r.exact) agree = agree && *r.exact == *r.exact_from_splitting;
    rec.add({"enumeration_matches_euler_factors", "partition-function-as-dedekind-zeta", agree,
             "ideal enumeration and splitting coefficients" + std::string(r.exact ? " agree exactly" : " agree numerically")});
    rec.add({"euler_product_dominates", "partition-function-as-dedekind-zeta", r.euler_product + 1e-15L >= r.enumerated,
             "truncated Euler product " + decimal(r.euler_product) + " >= partial sum"});
    return out;
}

ModularFunctionOracle make_oracle(const RunConfig& cfg) {
    if (cfg.oracle == "j") return j_oracle(cfg.terms);
    if (cfg.oracle == "constant") return constant_oracle(1.0);
    throw ConfigError("unknown oracle '" + cfg.oracle + "' (expected j or constant)");
}

json cmd_eval(const RunConfig& cfg, Recorder& rec) {
    FiniteBC bc = rec.timed([&] { return FiniteBC(bc_params(cfg)); });
    auto f = make_oracle(cfg);
    auto rep = rec.timed([&] { return property_v_report(bc, f, cfg.seed); });
    rec.add_all(rep.checks);
    json states = json::array();
    for (const auto& s : rep.states)
        states.push_back({{"state", bc.shimura().label(s.omega)}, {"value", complex_string(s.value)}, {"fixed_by_symmetries", s.fixed_by_symmetries}});
    if (f.name == "j") {
        bool all_1728 = std::all_of(rep.states.begin(), rep.states.end(), [](const StateValue& s) { return std::abs(s.value - Complex(1728)) <= 1e-6; });
        rec.add({"values_at_cm_point", "state-values-are-cm-values", all_1728, "j at the CM point of Q(i) is 1728"});
    }
    return {{"oracle", f.name},
            {"invariance", f.invariance},
            {"states", states},
            {"translate_point", rep.translate_point.to_string()},
            {"translate_value", complex_string(rep.translate_value)}};
}

using Command = std::function<json(const RunConfig&, Recorder&)>;

const std::map<std::string, Command>& command_table() {
    static const std::map<std::string, Command> table{
        {"scenario", cmd_scenario}, {"cm-types", cmd_cm_types}, {"reflex", cmd_reflex}, {"serre", cmd_serre},
        {"symplectic", cmd_symplectic}, {"phi-eta", cmd_phi_eta}, {"decompose", cmd_decompose}, {"bc-sim", cmd_bc_sim},
        {"zeta", cmd_zeta}, {"states", cmd_states}, {"eval", cmd_eval},
    };
    return table;
}

// fixed battery for `all`
std::vector<std::pair<std::string, RunConfig>> all_runs(const RunConfig& base) {
    std::vector<std::pair<std::string, RunConfig>> runs;
    auto add = [&](const std::string& label, const std::string& cmd, std::function<void(RunConfig&)> tweak) {
        RunConfig c = base;
        c.command = cmd;
        tweak(c);
        runs.push_back({label, c});
    };
    for (std::string f : {"qi", "qzeta5", "qi-cbrt2"}) {
        add("phi-eta/" + f, "phi-eta", [f](RunConfig& c) { c.field = f; });
        add("serre/" + f, "serre", [f](RunConfig& c) { c.field = f; });
    }
    for (std::string f : {"qi", "qzeta5"}) {
        add("cm-types/" + f, "cm-types", [f](RunConfig& c) { c.field = f; });
        add("reflex/" + f, "reflex", [f](RunConfig& c) { c.field = f; });
        add("symplectic/" + f, "symplectic", [f](RunConfig& c) { c.field = f; });
    }
    add("decompose", "decompose", [](RunConfig&) {});
    add("bc-sim/Q", "bc-sim", [](RunConfig& c) {
        c.bc_field = "Q";
        c.modulus = "2";
        c.bound = 3;
    });
    add("bc-sim/qi", "bc-sim", [](RunConfig& c) {
        c.bc_field = "qi";
        c.modulus = "3";
        c.bound = 10;
    });
    add("zeta/qi", "zeta", [](RunConfig& c) {
        c.bc_field = "qi";
        c.beta = "2";
        c.bound = 10;
    });
    add("states/qi", "states", [](RunConfig& c) {
        c.bc_field = "qi";
        c.modulus = "3";
        c.bound = 10;
    });
    add("eval/qi", "eval", [](RunConfig& c) {
        c.bc_field = "qi";
        c.modulus = "3";
        c.bound = 10;
        c.oracle = "j";
    });
    return runs;
}

json config_echo(const RunConfig& cfg) {
    return {{"scenario", cfg.scenario}, {"field", cfg.field},   {"bc_field", cfg.bc_field}, {"modulus", cfg.modulus},
            {"bound", cfg.bound},       {"cap", cfg.cap},       {"beta", cfg.beta},         {"oracle", cfg.oracle},
            {"terms", cfg.terms},       {"samples", cfg.samples}, {"out", cfg.out}};
}

}  // namespace

std::vector<std::string> commands() {
    std::vector<std::string> out;
    for (const auto& [name, cmd] : command_table()) out.push_back(name);
    out.push_back("all");
    out.push_back("list-builtins");
    return out;
}

std::vector<Int> parse_modulus(const std::string& s) {
    std::vector<Int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(item, &used);
            if (item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("modulus must be comma-separated integers, got '" + s + "'");
        }
    }
    if (out.empty()) throw ConfigError("modulus is empty");
    return out;
}

Rat parse_rational(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) {
            auto dot = s.find('.');
            if (dot == std::string::npos) return Rat(Int(s));
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            return Rat(Int(digits), ipow(Int(10), static_cast<unsigned>(s.size() - dot - 1)));
        }
        Int d(s.substr(slash + 1));
        if (d == 0) throw std::invalid_argument("zero denominator");
        return Rat(Int(s.substr(0, slash)), d);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse '" + s + "' as a rational number");
    }
}

void validate(const RunConfig& cfg) {
    auto cmds = commands();
    if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end()) throw ConfigError("unknown command '" + cfg.command + "'");
    if (cfg.bound < 1) throw ConfigError("--bound must be positive");
    if (cfg.cap < 0) throw ConfigError("--cap must be nonnegative");
    if (cfg.terms < 1 || cfg.terms > 500) throw ConfigError("--terms must lie in [1, 500]");
    if (cfg.samples < 1) throw ConfigError("--samples must be positive");
    if (cfg.oracle != "j" && cfg.oracle != "constant") throw ConfigError("unknown oracle '" + cfg.oracle + "' (expected j or constant)");
    parse_modulus(cfg.modulus);
    parse_rational(cfg.beta);
}

json builtin_inventory() {
    return {{"scenarios", list_builtins()},
            {"bc_fields", {"Q", "qi", "qzeta5"}},
            {"oracles", {"j", "constant"}},
            {"commands", commands()},
            {"non_abelian_scenarios", {"qi-cbrt2", "d4-cm"}}};
}

RunResult run(const RunConfig& cfg) {
    RunResult res;
    json& rep = res.report;
    rep["tool"] = "cmforge";
    rep["version"] = kToolVersion;
    rep["command"] = cfg.command;
    rep["config"] = config_echo(cfg);
    rep["seed"] = cfg.seed;
    rep["seed_source"] = cfg.seed_source;
    Recorder rec;
    try {
        validate(cfg);
        if (cfg.command == "list-builtins") {
            rep["results"] = builtin_inventory();
        } else if (cfg.command == "all") {
            json results = json::object();
            for (const auto& [label, c] : all_runs(cfg)) {
                Recorder sub(label + "/");
                results[label] = command_table().at(c.command)(c, sub);
                rec.merge(sub);
            }
            rep["results"] = results;
        } else {
            rep["results"] = command_table().at(cfg.command)(cfg, rec);
        }
        res.exit_code = rec.passed() ? 0 : 1;
    } catch (const ConfigError& e) {
        rep["error"] = {{"kind", "config"}, {"message", e.what()}};
        res.exit_code = 2;
    } catch (const PreconditionError& e) {
        rep["error"] = {{"kind", "precondition"}, {"message", e.what()}};
        res.exit_code = 2;
    } catch (const InvariantError& e) {
        rep["error"] = {{"kind", "invariant"}, {"message", e.what()}};
        res.exit_code = 1;
    } catch (const PrecisionError& e) {
        rep["error"] = {{"kind", "precision"}, {"message", e.what()}};
        res.exit_code = 1;
    }
    rep["checks"] = rec.checks();
    rep["status"] = res.exit_code == 0 ? "pass" : "fail";
    return res;
}

json strip_timings(json j) {
    if (j.is_object()) {
        j.erase("timing_ms");
        for (auto& [k, v] : j.items()) v = strip_timings(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_timings(v);
    }
    return j;
}

}  // namespace cmforge
