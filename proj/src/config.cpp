#include "kerrlat/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "kerrlat/errors.hpp"
#include "kerrlat/rng.hpp"

namespace kerrlat {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

json model_to_json(const ModelParams& m) {
    return json{{"delta", m.delta},   {"u_kerr", m.u_kerr}, {"g_drive", m.g_drive},
                {"j_hop", m.j_hop},   {"gamma", m.gamma}};
}

void model_from_json(const json& j, ModelParams& m) {
    get_if(j, "delta", m.delta);
    get_if(j, "u_kerr", m.u_kerr);
    get_if(j, "g_drive", m.g_drive);
    get_if(j, "j_hop", m.j_hop);
    get_if(j, "gamma", m.gamma);
}

} // namespace

double default_t_min_fit(int L) {
    if (L <= 6) return 20.0;
    if (L <= 10) return 30.0;
    return 40.0;
}

void RunConfig::validate() const {
    model.validate();
    if (L != 1 && L < 3) throw ConfigError("L must be 1 or >= 3");
    if (!periodic) throw ConfigError("periodic must be true");
    if (!(h > 0 && h <= 0.1)) throw ConfigError("h out of range (0, 0.1]");
    if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
    if (!(burn_in > 0)) throw ConfigError("burn_in must be positive");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (!(quench.g_end > quench.g_start)) throw ConfigError("quench must ramp upward");
    for (double v : quench.velocities)
        if (!(v > 0)) throw ConfigError("quench velocities must be positive");
    for (int l : quench.sizes)
        if (l != 1 && l < 3) throw ConfigError("quench sizes must be 1 or >= 3");
    for (double g : relax.g_values)
        if (!(g >= 0)) throw ConfigError("relax g_values must be >= 0");
    if (!(relax.t_max > 0)) throw ConfigError("relax t_max must be positive");
    if (relax.n_traj < 2) throw ConfigError("relax n_traj must be >= 2");
    if (collapse.mode != "f1" && collapse.mode != "f2")
        throw ConfigError("collapse mode must be 'f1' or 'f2'");
    if (collapse.bootstrap < 2) throw ConfigError("bootstrap resamples must be >= 2");
    if (!(ising.eps0 > 0)) throw ConfigError("ising eps0 must be positive");
    for (double v : ising.velocities)
        if (!(v > 0)) throw ConfigError("ising velocities must be positive");
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    if (j.contains("model")) model_from_json(j.at("model"), c.model);
    get_if(j, "L", c.L);
    get_if(j, "periodic", c.periodic);
    get_if(j, "h", c.h);
    get_if(j, "n_samples", c.n_samples);
    get_if(j, "burn_in", c.burn_in);
    get_if(j, "seed", c.seed);
    get_if(j, "workers", c.workers);

    if (j.contains("quench")) {
        const json& q = j.at("quench");
        get_if(q, "g_start", c.quench.g_start);
        get_if(q, "g_end", c.quench.g_end);
        get_if(q, "velocities", c.quench.velocities);
        get_if(q, "sizes", c.quench.sizes);
        get_if(q, "n_traj_fast", c.quench.n_traj_fast);
        get_if(q, "n_traj_slow", c.quench.n_traj_slow);
        get_if(q, "slow_threshold", c.quench.slow_threshold);
        get_if(q, "n_traj_override", c.quench.n_traj_override);
        get_if(q, "store_states", c.quench.store_states);
    }
    if (j.contains("relax")) {
        const json& q = j.at("relax");
        get_if(q, "g_values", c.relax.g_values);
        get_if(q, "sizes", c.relax.sizes);
        get_if(q, "t_max", c.relax.t_max);
        get_if(q, "t_min_fit", c.relax.t_min_fit);
        get_if(q, "amp", c.relax.amp);
        get_if(q, "n_traj", c.relax.n_traj);
    }
    if (j.contains("collapse")) {
        const json& q = j.at("collapse");
        get_if(q, "mode", c.collapse.mode);
        get_if(q, "bootstrap", c.collapse.bootstrap);
        get_if(q, "x_lo", c.collapse.x_lo);
        get_if(q, "x_hi", c.collapse.x_hi);
        if (q.contains("exponents")) {
            const json& e = q.at("exponents");
            get_if(e, "beta", c.collapse.exponents.beta);
            get_if(e, "nu", c.collapse.exponents.nu);
            get_if(e, "z", c.collapse.exponents.z);
            get_if(e, "d", c.collapse.exponents.d);
        }
        if (q.contains("grid")) {
            const json& g = q.at("grid");
            get_if(g, "lo", c.collapse.grid.lo);
            get_if(g, "hi", c.collapse.grid.hi);
            get_if(g, "step", c.collapse.grid.step);
        }
    }
    if (j.contains("gapfit")) {
        const json& q = j.at("gapfit");
        get_if(q, "g_c", c.gapfit.g_c);
        get_if(q, "nu", c.gapfit.nu);
        get_if(q, "regime_cutoff", c.gapfit.regime_cutoff);
    }
    if (j.contains("ising")) {
        const json& q = j.at("ising");
        get_if(q, "sizes", c.ising.sizes);
        get_if(q, "eps0", c.ising.eps0);
        get_if(q, "velocities", c.ising.velocities);
        get_if(q, "n_real", c.ising.n_real);
        get_if(q, "equil_sweeps", c.ising.equil_sweeps);
        get_if(q, "binder_ts", c.ising.binder_ts);
        get_if(q, "binder_sizes", c.ising.binder_sizes);
        get_if(q, "binder_n_eq", c.ising.binder_n_eq);
        get_if(q, "binder_n_samp", c.ising.binder_n_samp);
        get_if(q, "binder_thin", c.ising.binder_thin);
        get_if(q, "binder_n_real", c.ising.binder_n_real);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["model"] = model_to_json(c.model);
    j["L"] = c.L;
    j["periodic"] = c.periodic;
    j["h"] = c.h;
    j["n_samples"] = c.n_samples;
    j["burn_in"] = c.burn_in;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["quench"] = json{{"g_start", c.quench.g_start},
                       {"g_end", c.quench.g_end},
                       {"velocities", c.quench.velocities},
                       {"sizes", c.quench.sizes},
                       {"n_traj_fast", c.quench.n_traj_fast},
                       {"n_traj_slow", c.quench.n_traj_slow},
                       {"slow_threshold", c.quench.slow_threshold},
                       {"n_traj_override", c.quench.n_traj_override},
                       {"store_states", c.quench.store_states}};
    j["relax"] = json{{"g_values", c.relax.g_values}, {"sizes", c.relax.sizes},
                      {"t_max", c.relax.t_max},       {"t_min_fit", c.relax.t_min_fit},
                      {"amp", c.relax.amp},           {"n_traj", c.relax.n_traj}};
    j["collapse"] = json{{"mode", c.collapse.mode},
                         {"bootstrap", c.collapse.bootstrap},
                         {"x_lo", c.collapse.x_lo},
                         {"x_hi", c.collapse.x_hi},
                         {"exponents", json{{"beta", c.collapse.exponents.beta},
                                            {"nu", c.collapse.exponents.nu},
                                            {"z", c.collapse.exponents.z},
                                            {"d", c.collapse.exponents.d}}},
                         {"grid", json{{"lo", c.collapse.grid.lo},
                                       {"hi", c.collapse.grid.hi},
                                       {"step", c.collapse.grid.step}}}};
    j["gapfit"] = json{{"g_c", c.gapfit.g_c},
                       {"nu", c.gapfit.nu},
                       {"regime_cutoff", c.gapfit.regime_cutoff}};
    j["ising"] = json{{"sizes", c.ising.sizes},
                      {"eps0", c.ising.eps0},
                      {"velocities", c.ising.velocities},
                      {"n_real", c.ising.n_real},
                      {"equil_sweeps", c.ising.equil_sweeps},
                      {"binder_ts", c.ising.binder_ts},
                      {"binder_sizes", c.ising.binder_sizes},
                      {"binder_n_eq", c.ising.binder_n_eq},
                      {"binder_n_samp", c.ising.binder_n_samp},
                      {"binder_thin", c.ising.binder_thin},
                      {"binder_n_real", c.ising.binder_n_real}};
    return j.dump(); // nlohmann sorts keys: canonical
}

uint64_t config_hash(const RunConfig& c) {
    const std::string s = serialize_config(c);
    uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : s) {
        h ^= uint64_t(uint8_t(ch));
        h *= 0x100000001b3ull;
    }
    return h;
}

void apply_env_overrides(RunConfig& c) {
    if (const char* s = std::getenv("KERRLAT_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end == s || *end != '\0') throw ConfigError("KERRLAT_SEED is not an integer");
        c.seed = v;
    }
    if (const char* s = std::getenv("KERRLAT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end == s || *end != '\0' || v < 0) throw ConfigError("KERRLAT_WORKERS is invalid");
        c.workers = int(v);
    }
}

} // namespace kerrlat
