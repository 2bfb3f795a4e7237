#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "impstrip/core.hpp"

namespace impstrip {

// Problem plus numerics, grids and output location. Angles in degrees here.
struct RunConfig {
    cd k0{2.0, 0.05};
    double a = 1.0;
    cd eta{1.0, -1.0};
    double theta_in_deg = 60.0;

    int N = 64;
    double tail_tol = 1e-10;
    double cut_radius_factor = 50.0;  // cuts truncated at this multiple of |k0|
    int threads = 1;

    int theta_count = 73;
    std::optional<double> k_min, k_max;  // default -3|k0| .. 3|k0|
    int k_count = 41;

    std::string output_dir = "out";

    ProblemConfig problem() const {
        ProblemConfig p;
        p.k0 = k0;
        p.a = a;
        p.eta = eta;
        p.theta_in = theta_in_deg * kPi / 180.0;
        return p;
    }

    double k_lo() const { return k_min.value_or(-3.0 * std::abs(k0)); }
    double k_hi() const { return k_max.value_or(3.0 * std::abs(k0)); }
    double cut_radius() const { return cut_radius_factor * std::abs(k0); }

    void validate() const {
        problem().validate();
        if (N < 4 || N > 4096) throw Error(ErrorKind::config, "N must lie in [4, 4096]");
        if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw Error(ErrorKind::config, "tail_tol must lie in (0, 1)");
        if (!(cut_radius_factor > 1.0)) throw Error(ErrorKind::config, "cut_radius_factor must exceed 1");
        if (threads < 1) throw Error(ErrorKind::config, "threads must be >= 1");
        if (theta_count < 2) throw Error(ErrorKind::config, "theta_count must be >= 2");
        if (k_count < 1) throw Error(ErrorKind::config, "k_count must be >= 1");
        if (!(k_hi() >= k_lo())) throw Error(ErrorKind::config, "k_max must be >= k_min");
        if (output_dir.empty()) throw Error(ErrorKind::config, "output_dir must not be empty");
    }
};

namespace detail {

inline cd complex_from_json(const nlohmann::json& j, const char* key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorKind::config, std::string(key) + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["k0"] = {c.k0.real(), c.k0.imag()};
    j["a"] = c.a;
    j["eta"] = {c.eta.real(), c.eta.imag()};
    j["theta_in_deg"] = c.theta_in_deg;
    j["N"] = c.N;
    j["tail_tol"] = c.tail_tol;
    j["cut_radius_factor"] = c.cut_radius_factor;
    j["threads"] = c.threads;
    j["theta_count"] = c.theta_count;
    if (c.k_min) j["k_min"] = *c.k_min;
    if (c.k_max) j["k_max"] = *c.k_max;
    j["k_count"] = c.k_count;
    j["output_dir"] = c.output_dir;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    static const char* known[] = {"k0",          "a",           "eta",   "theta_in_deg", "N",
                                  "tail_tol",    "cut_radius_factor", "threads", "theta_count", "k_min",
                                  "k_max",       "k_count",     "output_dir"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw Error(ErrorKind::config, "unknown config key: " + it.key());
    }
    RunConfig c;
    try {
        if (j.contains("k0")) c.k0 = detail::complex_from_json(j["k0"], "k0");
        if (j.contains("eta")) c.eta = detail::complex_from_json(j["eta"], "eta");
        if (j.contains("a")) c.a = j["a"].get<double>();
        if (j.contains("theta_in_deg")) c.theta_in_deg = j["theta_in_deg"].get<double>();
        if (j.contains("N")) c.N = j["N"].get<int>();
        if (j.contains("tail_tol")) c.tail_tol = j["tail_tol"].get<double>();
        if (j.contains("cut_radius_factor")) c.cut_radius_factor = j["cut_radius_factor"].get<double>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("theta_count")) c.theta_count = j["theta_count"].get<int>();
        if (j.contains("k_min")) c.k_min = j["k_min"].get<double>();
        if (j.contains("k_max")) c.k_max = j["k_max"].get<double>();
        if (j.contains("k_count")) c.k_count = j["k_count"].get<int>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("config type error: ") + e.what());
    }
    c.validate();
    return c;
}

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(j);
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Hash of everything that can change numbers; threads and output_dir excluded.
inline std::string config_hash(const RunConfig& c) {
    auto j = to_json(c);
    j.erase("threads");
    j.erase("output_dir");
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

}  // namespace impstrip
