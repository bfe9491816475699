#pragma once

#include <lqnet/model.hpp>
#include <lqnet/oracle.hpp>
#include <lqnet/simulator.hpp>
#include <lqnet/strategy.hpp>
#include <lqnet/synthesis.hpp>
#include <lqnet/theory.hpp>

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace lqnet {

using json = nlohmann::json;

struct ParseIssue {
  std::string pointer;  // JSON pointer, e.g. /subsystems/0/drop_prob
  std::string message;
};

// All problems found while reading a document, not just the first.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::vector<ParseIssue> issues);
  const std::vector<ParseIssue>& issues() const { return issues_; }

 private:
  std::vector<ParseIssue> issues_;
};

// Reads the system description. Matrices are row-major arrays of arrays; a
// bare number is a 1x1 matrix. Cost and noise matrices may be a single
// matrix (broadcast over the horizon) or an array of per-step matrices.
SystemSpec spec_from_json(const json& doc, const std::string& base_pointer = "");

json matrix_to_json(const Matrix& m);
json spec_to_json(const SystemSpec& spec);

json schedule_to_json(const RiccatiSchedule& schedule);
json validation_to_json(const ValidationReport& report);
json cost_report_to_json(const CostReport& report, const CostDecomposition* decomposition = nullptr);
json decomposition_to_json(const CostDecomposition& d);
json orthogonality_to_json(const OrthogonalityReport& report);
json enumerated_to_json(const EnumeratedCost& cost);

// gamma bits (t-major, "|" between steps), probability, conditional_cost.
std::string enumeration_csv(const SystemSpec& spec, const EnumeratedCost& cost);

// Accepts a schedule document (keys "K" and "K_tilde") as a strategy file.
LinearStrategy strategy_from_json(const json& doc, const SystemSpec& spec);

}  // namespace lqnet
