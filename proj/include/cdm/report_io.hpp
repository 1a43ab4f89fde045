#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cdm/csv.hpp"
#include "cdm/evaluation.hpp"
#include "cdm/tuning.hpp"

namespace cdm {

inline nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["n_samples"] = report.n_samples;
  j["rmse_m"] = report.rmse_m;
  j["mean_m"] = report.mean_m;
  j["std_m"] = report.std_m;
  j["median_m"] = report.median_m;
  nlohmann::json percentiles = nlohmann::json::object();
  for (const auto& [q, value] : report.percentiles) {
    percentiles[format_double(q)] = value;
  }
  j["percentiles"] = percentiles;
  j["success_rate"] = report.success_rate.has_value() ? nlohmann::json(*report.success_rate)
                                                      : nlohmann::json(nullptr);
  j["building_accuracy"] = report.building_accuracy.has_value()
                               ? nlohmann::json(*report.building_accuracy)
                               : nlohmann::json(nullptr);
  nlohmann::json ecdf = nlohmann::json::array();
  for (const auto& [error, fraction] : report.ecdf) {
    ecdf.push_back(nlohmann::json::array({error, fraction}));
  }
  j["ecdf"] = ecdf;
  return j;
}

/// Per-sample CSV: sample_index, error_m, building_correct, floor_correct.
/// The booleans print as 1/0 and stay empty for unlabeled runs.
inline std::string samples_csv(const std::vector<SampleOutcome>& outcomes) {
  CsvBuilder csv({"sample_index", "error_m", "building_correct", "floor_correct"});
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const SampleOutcome& o = outcomes[i];
    csv.append_row({std::to_string(i), format_double(o.error_m),
                    o.building_correct ? (*o.building_correct ? "1" : "0") : "",
                    o.floor_correct ? (*o.floor_correct ? "1" : "0") : ""});
  }
  return csv.str();
}

/// ECDF CSV: error_m, fraction.
inline std::string ecdf_csv(const std::vector<std::pair<double, double>>& points) {
  CsvBuilder csv({"error_m", "fraction"});
  for (const auto& [error, fraction] : points) {
    csv.append_row({format_double(error), format_double(fraction)});
  }
  return csv.str();
}

inline nlohmann::json tuning_result_to_json(const TuningResult& result) {
  nlohmann::json per_alpha = nlohmann::json::array();
  for (const auto& [alpha, scores] : result.per_alpha) {
    per_alpha.push_back(nlohmann::json{{"alpha", alpha}, {"fold_scores", scores}});
  }
  return nlohmann::json{
      {"per_alpha", per_alpha},
      {"best_alpha", result.best_alpha},
      {"best_score", result.best_score},
  };
}

/// Long-format CSV (alpha, fold, score) for external box-plot tools.
inline std::string tuning_long_csv(const TuningResult& result) {
  CsvBuilder csv({"alpha", "fold", "score"});
  for (const auto& [alpha, scores] : result.per_alpha) {
    for (std::size_t fold = 0; fold < scores.size(); ++fold) {
      csv.append_row({format_double(alpha), std::to_string(fold), format_double(scores[fold])});
    }
  }
  return csv.str();
}

} // namespace cdm
