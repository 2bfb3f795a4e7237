#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace impstrip {

enum class Relation { less, greater, less_equal, greater_equal };

inline const char* to_string(Relation r) {
    switch (r) {
        case Relation::less: return "<";
        case Relation::greater: return ">";
        case Relation::less_equal: return "<=";
        case Relation::greater_equal: return ">=";
    }
    return "?";
}

struct Check {
    std::string id;
    double value = 0.0;
    double tolerance = 0.0;
    Relation relation = Relation::less;
    bool pass = false;
    bool mandatory = true;
    std::string status = "fail";  // pass, fail, skipped
    std::string note;
    nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
    double wall_time = 0.0;  // kept out of the serialized report
};

inline Check make_check(std::string id, double value, double tolerance, Relation rel = Relation::less,
                        bool mandatory = true) {
    Check c;
    c.id = std::move(id);
    c.value = value;
    c.tolerance = tolerance;
    c.relation = rel;
    c.mandatory = mandatory;
    switch (rel) {
        case Relation::less: c.pass = value < tolerance; break;
        case Relation::greater: c.pass = value > tolerance; break;
        case Relation::less_equal: c.pass = value <= tolerance; break;
        case Relation::greater_equal: c.pass = value >= tolerance; break;
    }
    c.status = c.pass ? "pass" : "fail";
    return c;
}

inline Check skipped_check(std::string id, std::string note, bool mandatory = false) {
    Check c;
    c.id = std::move(id);
    c.status = "skipped";
    c.pass = true;
    c.mandatory = mandatory;
    c.note = std::move(note);
    return c;
}

struct VerificationReport {
    std::vector<Check> checks;

    Check& add(Check c) {
        checks.push_back(std::move(c));
        return checks.back();
    }
    void merge(const VerificationReport& other) {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }
    bool overall_pass() const {
        for (const auto& c : checks)
            if (c.mandatory && !c.pass) return false;
        return true;
    }
    const Check* find(const std::string& id) const {
        for (const auto& c : checks)
            if (c.id == id) return &c;
        return nullptr;
    }
};

inline nlohmann::ordered_json to_json(const Check& c) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["status"] = c.status;
    j["pass"] = c.pass;
    j["mandatory"] = c.mandatory;
    if (c.status != "skipped") {
        j["value"] = c.value;
        j["relation"] = to_string(c.relation);
        j["tolerance"] = c.tolerance;
    }
    if (!c.note.empty()) j["note"] = c.note;
    j["provenance"] = c.provenance;
    return j;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
    nlohmann::ordered_json j;
    j["overall_pass"] = r.overall_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) arr.push_back(to_json(c));
    j["checks"] = arr;
    return j;
}

}  // namespace impstrip
