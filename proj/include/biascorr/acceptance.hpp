#pragma once

// Acceptance criteria shared by the acceptance test binary and `verify`.

#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

namespace biascorr::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
    /// Named scalar measurements compared against stored references.
    nlohmann::json measurements = nlohmann::json::object();
};

struct Criterion {
    std::string id;
    std::string group;
    std::string title;
    /// Wall-clock budget in seconds; exceeding it fails the criterion.
    double time_limit = 0;
    std::function<Outcome()> run;
};

struct Result {
    std::string id;
    std::string group;
    std::string title;
    bool pass = false;
    std::string detail;
    nlohmann::json measurements;
    double seconds = 0;
    double time_limit = 0;
};

const std::vector<Criterion>& registry();

/// Selects criteria whose group or id is listed; empty selects all.
std::vector<const Criterion*> select(const std::vector<std::string>& only);

Result run(const Criterion& c);

/// One line: `[PASS] id (group) detail [1.2s]`.
std::string format_line(const Result& r);

struct ReferenceCheck {
    std::string item;
    std::string key;
    bool pass = false;
    std::string detail;
};

/// Compares measurements against a reference entry of the form
/// {"checks": {key: {"value": v, "abs_tol": t} | {"min": a, "max": b} | {"equals": x}}}.
std::vector<ReferenceCheck> compare_to_reference(const Result& r, const nlohmann::json& reference_item);

}  // namespace biascorr::acceptance
