#pragma once
// JSON run configuration and the operations behind the CLI: value (backward
// fit), validate (out-of-sample diagnostics), oracle (independent estimates).
//
// The manifest written next to coefficients.csv pins the model, capital
// parameters, horizon and basis labels behind one identity hash; validation
// refuses artifacts produced under a different setup.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ar_garch.hpp"
#include "basis.hpp"
#include "csv_io.hpp"
#include "errors.hpp"
#include "life_model.hpp"
#include "lsm_engine.hpp"
#include "oracle.hpp"
#include "validation.hpp"

namespace lsmcoc {

using Json = nlohmann::ordered_json;

enum class ModelFamily { ar_garch, ar_garch_sum, life };

struct ModelSpec {
    ModelFamily family = ModelFamily::ar_garch;
    ArGarchParams ar;
    int components = 10;  // ar-garch-sum
    LifeParams life;
    std::string mortality_name = "makeham-male";
    Json canonical;  // resolved model block; hashed into the manifest identity
};

struct BasisSpec {
    std::vector<double> strikes = {200.0, 162.0, 124.0, 103.0};
    bool strike_selection = false;
    std::size_t strike_count = 4;
    std::vector<double> strike_candidates = {60.0,  80.0,  100.0, 103.0, 110.0, 120.0,
                                             124.0, 140.0, 162.0, 180.0, 200.0, 220.0,
                                             240.0, 260.0, 280.0, 300.0};
};

struct OracleSpec {
    std::string mode = "nested";  // nested | terminal
    std::size_t outer = 2000;
    std::size_t inner = 100000;
    int batches = 20;
    std::uint64_t seed = 1;
    double l = 0.0, sigma = 1.0;  // evaluation point of the terminal closed form
};

struct ResolvedConfig {
    ModelSpec model;
    int horizon = 6;
    RunConfig run;
    ValidationConfig validation;
    BasisSpec basis;
    OracleSpec oracle;
    std::optional<int> threads_in_config;
    std::string output_dir = "out";
};

// ---------------------------------------------------------------------------
// JSON access with section-qualified diagnostics

namespace cfgdetail {

inline std::string where(const char* section, const char* key) {
    return std::string(section) + "." + key;
}

inline void check_keys(const Json& obj, const char* section,
                       const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unrecognized key '" + it.key() + "' in section '" +
                              section + "'");
    }
}

inline double num(const Json& obj, const char* key, double fallback, const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number())
        throw ConfigError("config: " + where(section, key) + " must be a number");
    return it->get<double>();
}

inline bool flag(const Json& obj, const char* key, bool fallback, const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean())
        throw ConfigError("config: " + where(section, key) + " must be a boolean");
    return it->get<bool>();
}

inline std::string str(const Json& obj, const char* key, const std::string& fallback,
                       const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string())
        throw ConfigError("config: " + where(section, key) + " must be a string");
    return it->get<std::string>();
}

inline std::size_t count(const Json& obj, const char* key, std::size_t fallback,
                         const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
        throw ConfigError("config: " + where(section, key) + " must be a positive integer");
    return it->get<std::size_t>();
}

inline int int_val(const Json& obj, const char* key, int fallback, const char* section,
                   int min_value) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() < min_value)
        throw ConfigError("config: " + where(section, key) + " must be an integer >= " +
                          std::to_string(min_value));
    return it->get<int>();
}

inline std::uint64_t seed_val(const Json& obj, const char* key, std::uint64_t fallback,
                              const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    if (it->is_number_integer() && it->get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(it->get<std::int64_t>());
    throw ConfigError("config: " + where(section, key) + " must be a nonnegative integer");
}

inline std::vector<double> num_array(const Json& obj, const char* key,
                                     const std::vector<double>& fallback, const char* section) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array())
        throw ConfigError("config: " + where(section, key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number())
            throw ConfigError("config: " + where(section, key) + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline const Json& section(const Json& root, const char* name, const Json& empty) {
    auto it = root.find(name);
    if (it == root.end()) return empty;
    if (!it->is_object())
        throw ConfigError(std::string("config: section '") + name + "' must be an object");
    return *it;
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace cfgdetail

// ---------------------------------------------------------------------------
// Model resolution

namespace cfgdetail {

inline ArGarchParams parse_ar_params(const Json& m) {
    ArGarchParams p;
    p.a0 = num(m, "a0", p.a0, "model");
    p.a1 = num(m, "a1", p.a1, "model");
    p.a2 = num(m, "a2", p.a2, "model");
    p.a3 = num(m, "a3", p.a3, "model");
    p.a4 = num(m, "a4", p.a4, "model");
    p.l0 = num(m, "l0", p.l0, "model");
    p.sigma1 = num(m, "sigma1", p.sigma1, "model");
    return p;
}

inline Json ar_canonical(const ArGarchParams& p) {
    Json j;
    j["a0"] = p.a0;
    j["a1"] = p.a1;
    j["a2"] = p.a2;
    j["a3"] = p.a3;
    j["a4"] = p.a4;
    j["l0"] = p.l0;
    j["sigma1"] = p.sigma1;
    return j;
}

inline std::vector<Cohort> parse_cohorts(const Json& m) {
    auto it = m.find("cohorts");
    if (it == m.end() || !it->is_array() || it->empty())
        throw ConfigError("config: model.cohorts must be a nonempty array of {size, age}");
    std::vector<Cohort> cohorts;
    for (const auto& c : *it) {
        if (!c.is_object())
            throw ConfigError("config: model.cohorts entries must be objects {size, age}");
        check_keys(c, "model.cohorts[]", {"size", "age"});
        Cohort cc;
        cc.size = num(c, "size", -1.0, "model.cohorts[]");
        cc.age = num(c, "age", -1.0, "model.cohorts[]");
        if (cc.size < 0.0 || cc.age < 0.0)
            throw ConfigError("config: model.cohorts entries need nonnegative size and age");
        cohorts.push_back(cc);
    }
    return cohorts;
}

inline std::vector<Cohort> preset_cohorts(const std::vector<double>& ages, double size) {
    std::vector<Cohort> cohorts;
    for (double a : ages) cohorts.push_back({size, a});
    return cohorts;
}

}  // namespace cfgdetail

inline ModelSpec parse_model(const Json& m) {
    using namespace cfgdetail;
    if (!m.is_object()) throw ConfigError("config: section 'model' must be an object");
    std::string type = str(m, "type", "", "model");
    if (type.empty()) throw ConfigError("config: model.type is required");

    std::string family = type;
    if (type == "custom") {
        family = str(m, "family", "", "model");
        if (family != "ar-garch" && family != "ar-garch-sum" && family != "life")
            throw ConfigError(
                "config: model.family must be one of ar-garch, ar-garch-sum, life");
    } else if (type == "life-small" || type == "life-large") {
        family = "life";
    } else if (type != "ar-garch" && type != "ar-garch-sum") {
        throw ConfigError("config: model.type must be one of ar-garch, ar-garch-sum, "
                          "life-small, life-large, custom");
    }

    ModelSpec spec;
    const std::vector<std::string> ar_keys = {"type", "family", "a0", "a1", "a2", "a3",
                                              "a4",   "l0",     "sigma1"};
    if (family == "ar-garch") {
        check_keys(m, "model", ar_keys);
        spec.family = ModelFamily::ar_garch;
        spec.ar = parse_ar_params(m);
        spec.canonical = ar_canonical(spec.ar);
        spec.canonical["family"] = "ar-garch";
    } else if (family == "ar-garch-sum") {
        auto keys = ar_keys;
        keys.push_back("components");
        check_keys(m, "model", keys);
        spec.family = ModelFamily::ar_garch_sum;
        spec.ar = parse_ar_params(m);
        spec.components = int_val(m, "components", 10, "model", 1);
        spec.canonical = ar_canonical(spec.ar);
        spec.canonical["family"] = "ar-garch-sum";
        spec.canonical["components"] = spec.components;
    } else {
        std::vector<std::string> keys = {"type",          "mu_y",
                                         "mu_f",          "sigma_y",
                                         "sigma_f",       "rho",
                                         "y0",            "f0",
                                         "death_benefit", "survival_benefit",
                                         "premium_offset", "mortality"};
        if (type == "custom") {
            keys.push_back("family");
            keys.push_back("cohorts");
        } else {
            keys.push_back("cohort_size");
        }
        check_keys(m, "model", keys);
        spec.family = ModelFamily::life;
        LifeParams& p = spec.life;
        p.mu_y = num(m, "mu_y", p.mu_y, "model");
        p.mu_f = num(m, "mu_f", p.mu_f, "model");
        p.sigma_y = num(m, "sigma_y", p.sigma_y, "model");
        p.sigma_f = num(m, "sigma_f", p.sigma_f, "model");
        p.rho = num(m, "rho", p.rho, "model");
        p.y0 = num(m, "y0", p.y0, "model");
        p.f0 = num(m, "f0", p.f0, "model");
        p.death_benefit = num(m, "death_benefit", p.death_benefit, "model");
        p.survival_benefit = num(m, "survival_benefit", p.survival_benefit, "model");
        p.premium_offset = num(m, "premium_offset", p.premium_offset, "model");
        spec.mortality_name = str(m, "mortality", "makeham-male", "model");
        if (spec.mortality_name == "makeham-male") {
            p.mortality = makeham_law(false);
        } else if (spec.mortality_name == "makeham-female") {
            p.mortality = makeham_law(true);
        } else {
            throw ConfigError(
                "config: model.mortality must be makeham-male or makeham-female");
        }
        if (type == "custom") {
            p.cohorts = parse_cohorts(m);
        } else {
            double size = num(m, "cohort_size", 1000.0, "model");
            if (!(size >= 0.0) || size != std::floor(size))
                throw ConfigError("config: model.cohort_size must be a nonnegative integer");
            std::vector<double> ages;
            if (type == "life-small") {
                ages = {50.0, 60.0, 70.0, 80.0};
            } else {
                for (double a = 40.0; a <= 85.0; a += 5.0) ages.push_back(a);
            }
            p.cohorts = preset_cohorts(ages, size);
        }
        spec.canonical["family"] = "life";
        spec.canonical["mu_y"] = p.mu_y;
        spec.canonical["mu_f"] = p.mu_f;
        spec.canonical["sigma_y"] = p.sigma_y;
        spec.canonical["sigma_f"] = p.sigma_f;
        spec.canonical["rho"] = p.rho;
        spec.canonical["y0"] = p.y0;
        spec.canonical["f0"] = p.f0;
        spec.canonical["death_benefit"] = p.death_benefit;
        spec.canonical["survival_benefit"] = p.survival_benefit;
        spec.canonical["premium_offset"] = p.premium_offset;
        spec.canonical["mortality"] = spec.mortality_name;
        Json cohorts = Json::array();
        for (const auto& c : p.cohorts) {
            Json cj;
            cj["size"] = c.size;
            cj["age"] = c.age;
            cohorts.push_back(cj);
        }
        spec.canonical["cohorts"] = cohorts;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Full configuration

inline ResolvedConfig parse_config(const std::string& text, const std::string& source = "config") {
    using namespace cfgdetail;
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(source + ": JSON parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(source + ": top level must be an object");
    check_keys(root, "top level",
               {"model", "run", "validation", "basis", "oracle", "output"});
    if (!root.contains("model")) throw ConfigError("config: missing required section 'model'");

    ResolvedConfig cfg;
    try {
        cfg.model = parse_model(root["model"]);

        static const Json empty = Json::object();
        const Json& run = section(root, "run", empty);
        check_keys(run, "run",
                   {"outer", "inner", "horizon", "alpha", "eta", "seed", "threads"});
        std::size_t default_outer = cfg.model.family == ModelFamily::life ? 50000 : 10000;
        cfg.run.outer = count(run, "outer", default_outer, "run");
        cfg.run.inner = count(run, "inner", 100000, "run");
        cfg.horizon = int_val(run, "horizon", 6, "run", 1);
        cfg.run.coc.alpha = num(run, "alpha", 0.995, "run");
        cfg.run.coc.eta = num(run, "eta", 0.06, "run");
        cfg.run.seed = seed_val(run, "seed", 1, "run");
        if (run.contains("threads")) {
            cfg.threads_in_config = int_val(run, "threads", 0, "run", 0);
            cfg.run.threads = *cfg.threads_in_config;
        }

        const Json& val = section(root, "validation", empty);
        check_keys(val, "validation", {"outer", "inner", "seed", "bins", "band_lo", "band_hi"});
        cfg.validation.outer = count(val, "outer", 10000, "validation");
        cfg.validation.inner = count(val, "inner", 100000, "validation");
        cfg.validation.seed = seed_val(val, "seed", 2, "validation");
        cfg.validation.bins = int_val(val, "bins", 30, "validation", 1);
        cfg.validation.band_lo = num(val, "band_lo", 0.025, "validation");
        cfg.validation.band_hi = num(val, "band_hi", 0.975, "validation");
        cfg.validation.threads = cfg.run.threads;

        const Json& basis = section(root, "basis", empty);
        if (cfg.model.family != ModelFamily::life) {
            if (!basis.empty())
                throw ConfigError("config: the basis section applies to the life model only");
        } else {
            check_keys(basis, "basis",
                       {"strikes", "strike_selection", "strike_count", "strike_candidates"});
            cfg.basis.strikes = num_array(basis, "strikes", cfg.basis.strikes, "basis");
            cfg.basis.strike_selection =
                flag(basis, "strike_selection", cfg.basis.strike_selection, "basis");
            cfg.basis.strike_count =
                count(basis, "strike_count", cfg.basis.strike_count, "basis");
            cfg.basis.strike_candidates =
                num_array(basis, "strike_candidates", cfg.basis.strike_candidates, "basis");
            if (cfg.basis.strike_selection &&
                cfg.basis.strike_count > cfg.basis.strike_candidates.size())
                throw ConfigError("config: basis.strike_count exceeds the candidate count");
        }

        const Json& oracle = section(root, "oracle", empty);
        check_keys(oracle, "oracle",
                   {"mode", "outer", "inner", "batches", "seed", "l", "sigma"});
        cfg.oracle.mode = str(oracle, "mode", "nested", "oracle");
        if (cfg.oracle.mode != "nested" && cfg.oracle.mode != "terminal")
            throw ConfigError("config: oracle.mode must be nested or terminal");
        cfg.oracle.outer = count(oracle, "outer", 2000, "oracle");
        cfg.oracle.inner = count(oracle, "inner", 100000, "oracle");
        cfg.oracle.batches = int_val(oracle, "batches", 20, "oracle", 2);
        cfg.oracle.seed = seed_val(oracle, "seed", cfg.run.seed, "oracle");
        cfg.oracle.l = num(oracle, "l", cfg.model.ar.l0, "oracle");
        cfg.oracle.sigma = num(oracle, "sigma", cfg.model.ar.sigma1, "oracle");

        const Json& output = section(root, "output", empty);
        check_keys(output, "output", {"dir"});
        cfg.output_dir = str(output, "dir", cfg.output_dir, "output");

        cfg.run.validate();
        cfg.validation.validate();
        if (cfg.model.family == ModelFamily::life) cfg.model.life.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ResolvedConfig load_config(const std::string& path) {
    return parse_config(read_file(path), path);
}

// Thread count precedence: command line, then config, then LSMCOC_THREADS,
// then all hardware threads.
inline int threads_from_env() {
    const char* env = std::getenv("LSMCOC_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 0)
        throw ConfigError("LSMCOC_THREADS must be a nonnegative integer");
    return static_cast<int>(v);
}

inline void apply_thread_request(ResolvedConfig& cfg, std::optional<int> cli_threads) {
    int threads = 0;
    if (cli_threads) {
        threads = *cli_threads;
    } else if (cfg.threads_in_config) {
        threads = *cfg.threads_in_config;
    } else {
        threads = threads_from_env();
    }
    cfg.run.threads = threads;
    cfg.validation.threads = threads;
}

// ---------------------------------------------------------------------------
// Model and basis construction

using AnyModel = std::variant<ArGarchModel, ArGarchSumModel, LifeModel>;

inline AnyModel build_model(const ModelSpec& spec, int horizon) {
    switch (spec.family) {
        case ModelFamily::ar_garch:
            return ArGarchModel(spec.ar, horizon);
        case ModelFamily::ar_garch_sum:
            return ArGarchSumModel(spec.ar, spec.components, horizon);
        case ModelFamily::life:
            return LifeModel(spec.life, horizon);
    }
    throw std::logic_error("build_model: unreachable");
}

inline std::vector<BasisSet> build_bases(const ModelSpec& spec, int horizon,
                                         const std::vector<double>& strikes) {
    std::vector<BasisSet> bases;
    for (int t = 1; t < horizon; ++t) {
        switch (spec.family) {
            case ModelFamily::ar_garch:
                bases.push_back(build_basis_ar_garch(t));
                break;
            case ModelFamily::ar_garch_sum:
                bases.push_back(build_basis_ar_garch_sum(t, spec.components));
                break;
            case ModelFamily::life:
                bases.push_back(build_basis_life(spec.life, t, horizon, strikes));
                break;
        }
    }
    return bases;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string compute_identity(const Json& model_canonical, const CocParams& coc,
                                    int horizon, const std::vector<std::string>& labels) {
    std::string blob = model_canonical.dump();
    blob += '|';
    blob += format_double(coc.alpha);
    blob += '|';
    blob += format_double(coc.eta);
    blob += '|';
    blob += std::to_string(horizon);
    for (const auto& l : labels) {
        blob += '|';
        blob += l;
    }
    return fnv1a_hex(blob);
}

struct ValueArtifacts {
    CoefficientTable table;
    std::vector<std::pair<int, double>> step_seconds;
    std::vector<std::pair<int, std::vector<std::string>>> pruned_columns;
    std::vector<double> strikes;  // strikes in the basis (life family; else empty)
    StrikeSelection selection;
    bool selection_ran = false;
    Json manifest;
};

inline Json make_manifest(const ResolvedConfig& cfg, const ValueArtifacts& art) {
    Json m;
    m["format"] = "lsmcoc-manifest-v1";
    m["identity"] =
        compute_identity(cfg.model.canonical, cfg.run.coc, cfg.horizon, art.table.labels);
    m["model"] = cfg.model.canonical;
    Json run;
    run["outer"] = cfg.run.outer;
    run["inner"] = cfg.run.inner;
    run["horizon"] = cfg.horizon;
    run["alpha"] = cfg.run.coc.alpha;
    run["eta"] = cfg.run.coc.eta;
    run["seed"] = cfg.run.seed;
    m["run"] = run;
    Json val;
    val["outer"] = cfg.validation.outer;
    val["inner"] = cfg.validation.inner;
    val["seed"] = cfg.validation.seed;
    val["bins"] = cfg.validation.bins;
    val["band_lo"] = cfg.validation.band_lo;
    val["band_hi"] = cfg.validation.band_hi;
    m["validation"] = val;
    Json basis;
    basis["strikes"] = art.strikes;
    basis["labels"] = art.table.labels;
    m["basis"] = basis;
    if (art.selection_ran) {
        Json sel;
        sel["candidates"] = cfg.basis.strike_candidates;
        sel["selected"] = art.selection.strikes;
        sel["r2"] = art.selection.r2;
        sel["degenerate"] = art.selection.degenerate;
        m["strike_selection"] = sel;
    }
    Json results;
    results["r0"] = art.table.time_zero.r;
    results["e0"] = art.table.time_zero.e;
    results["v0"] = art.table.time_zero.v;
    m["results"] = results;
    return m;
}

struct ManifestData {
    std::string identity;
    CocParams coc;
    std::uint64_t seed = 0;
    int horizon = 0;
    std::vector<double> strikes;
    std::vector<std::string> labels;
};

inline ManifestData read_manifest(const Json& m) {
    using namespace cfgdetail;
    if (!m.is_object() || str(m, "format", "", "manifest") != "lsmcoc-manifest-v1")
        throw ConfigError("manifest: not a recognized run manifest");
    ManifestData data;
    data.identity = str(m, "identity", "", "manifest");
    const Json& run = section(m, "run", m);
    data.coc.alpha = num(run, "alpha", -1.0, "manifest.run");
    data.coc.eta = num(run, "eta", -1.0, "manifest.run");
    data.seed = seed_val(run, "seed", 0, "manifest.run");
    data.horizon = int_val(run, "horizon", 0, "manifest.run", 1);
    const Json& basis = section(m, "basis", m);
    data.strikes = num_array(basis, "strikes", {}, "manifest.basis");
    auto it = basis.find("labels");
    if (it != basis.end() && it->is_array())
        for (const auto& l : *it) data.labels.push_back(l.get<std::string>());
    return data;
}

// ---------------------------------------------------------------------------
// Operations

namespace detail {

// Pre-pass for strike selection: fit the penultimate step on the strike-free
// basis, regress each candidate payoff against the quantile-target residuals,
// keep the best `strike_count`.
template <MarkovModel M>
StrikeSelection run_strike_selection(const ResolvedConfig& cfg, const M& model) {
    if (cfg.horizon < 2)
        throw ConfigError("strike selection: needs at least one regression step (horizon >= 2)");
    auto free_bases = build_bases(cfg.model, cfg.horizon, {});
    const int t = cfg.horizon - 1;
    StepFit sf = fit_step(model, free_bases[static_cast<std::size_t>(t - 1)], nullptr, {}, t,
                          cfg.run);
    const std::size_t m = cfg.run.outer;
    Eigen::Map<const Eigen::VectorXd> beta(sf.beta_r.data(),
                                           static_cast<Eigen::Index>(sf.beta_r.size()));
    Eigen::VectorXd fitted = sf.design.x * beta;
    std::vector<double> residuals(m), fund(m);
    const auto dim = static_cast<std::size_t>(model.dim());
    for (std::size_t i = 0; i < m; ++i) {
        residuals[i] = sf.targets_r[i] - fitted[static_cast<Eigen::Index>(i)];
        fund[i] = sf.states_flat[i * dim + 1];  // life state layout: [Y, F, N..., prevN...]
    }
    return select_strikes_by_r2(cfg.basis.strike_candidates, fund, residuals,
                                cfg.basis.strike_count);
}

}  // namespace detail

template <MarkovModel M>
ValueArtifacts run_value_with(const ResolvedConfig& cfg, const M& model) {
    ValueArtifacts art;
    std::vector<double> strikes;
    if (cfg.model.family == ModelFamily::life) {
        strikes = cfg.basis.strikes;
        if (cfg.basis.strike_selection) {
            art.selection = detail::run_strike_selection(cfg, model);
            art.selection_ran = true;
            strikes = art.selection.strikes;
        }
    }
    art.strikes = strikes;
    auto bases = build_bases(cfg.model, cfg.horizon, strikes);
    RunOutput out = lsm_backward(model, bases, cfg.run);
    art.table = std::move(out.table);
    art.step_seconds = std::move(out.step_seconds);
    art.pruned_columns = std::move(out.pruned_columns);
    art.manifest = make_manifest(cfg, art);
    return art;
}

inline ValueArtifacts run_value(const ResolvedConfig& cfg) {
    AnyModel any = build_model(cfg.model, cfg.horizon);
    return std::visit([&](const auto& model) { return run_value_with(cfg, model); }, any);
}

// `table.coc` and `table.seed` must already carry the manifest values.
inline ValidationReport run_validation(const ResolvedConfig& cfg,
                                       const std::vector<double>& strikes,
                                       const CoefficientTable& table) {
    AnyModel any = build_model(cfg.model, table.horizon);
    auto bases = build_bases(cfg.model, table.horizon, strikes);
    return std::visit(
        [&](const auto& model) { return validate(model, bases, table, cfg.validation); }, any);
}

inline OracleEstimate run_oracle(const ResolvedConfig& cfg) {
    if (cfg.oracle.mode == "terminal") {
        if (cfg.model.family != ModelFamily::ar_garch)
            throw OracleUnsupportedError(
                "oracle: the terminal closed form requires the plain ar-garch model");
        double v = closed_form_terminal_ar_garch(cfg.model.ar, cfg.oracle.l, cfg.oracle.sigma,
                                                 cfg.run.coc);
        return {v, 0.0, "closed-form-terminal"};
    }
    AnyModel any = build_model(cfg.model, cfg.horizon);
    return std::visit(
        [&](const auto& model) {
            return nested_value_T2(model, cfg.oracle.outer, cfg.oracle.inner, cfg.run.coc,
                                   cfg.oracle.seed, cfg.oracle.batches, cfg.run.threads);
        },
        any);
}

// ---------------------------------------------------------------------------
// Artifact files

inline void write_value_artifacts(const std::string& dir, const ValueArtifacts& art) {
    std::filesystem::create_directories(dir);
    std::ostringstream coeff;
    write_coefficients(coeff, art.table);
    write_file(dir + "/coefficients.csv", coeff.str());
    write_file(dir + "/manifest.json", art.manifest.dump(2) + "\n");
}

inline void write_validation_artifacts(const std::string& dir, const ValidationReport& report) {
    std::filesystem::create_directories(dir);
    std::ostringstream rep;
    write_validation_report(rep, report);
    write_file(dir + "/validation_report.csv", rep.str());
    std::ostringstream hist;
    write_histograms(hist, report);
    write_file(dir + "/histograms.csv", hist.str());
}

inline void write_oracle_artifact(const std::string& dir, const OracleEstimate& est) {
    std::filesystem::create_directories(dir);
    std::ostringstream os;
    write_oracle(os, est);
    write_file(dir + "/oracle.csv", os.str());
}

}  // namespace lsmcoc
