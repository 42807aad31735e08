#pragma once

#include <string>

#include "json.hpp"
#include "mex/eval/iaa.hpp"
#include "mex/eval/metrics.hpp"

namespace mex::eval {

// Columns: class, P, R, F1, #. Scores are printed as percentages.
std::string format_table(const EvalReport& report, const std::string& title = {});
std::string format_table(const CrossValidationReport& report, const std::string& title = {});
std::string format_iaa(const IaaReport& report);

// One record per class {name, precision, recall, f1, support} plus micro
// and macro aggregates.
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const CrossValidationReport& report);
nlohmann::ordered_json to_json(const IaaReport& report);

}  // namespace mex::eval
