#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cdm/fingerprint.hpp"
#include "cdm/positioning.hpp"

namespace cdm {

/// Per-sample result: planar error plus the classification booleans when the
/// run predicted building/floor and the truth carries those labels.
struct SampleOutcome {
  double error_m = 0.0;
  std::optional<bool> building_correct;
  std::optional<bool> floor_correct;
};

/// Aggregate statistics over one validation run.
struct EvaluationReport {
  double rmse_m = 0.0;
  double mean_m = 0.0;
  double std_m = 0.0;
  double median_m = 0.0;
  std::vector<std::pair<double, double>> percentiles;    // (q, value)
  std::optional<double> success_rate;                    // building AND floor correct
  std::optional<double> building_accuracy;               // building correct
  std::vector<std::pair<double, double>> ecdf;           // (error, cumulative fraction)
  std::size_t n_samples = 0;
};

/// 2D Euclidean error in the dataset's planar unit. Building/floor mistakes
/// do not enter here; they are reported through the classification rates.
inline double positioning_error(const PositionEstimate& est, const GeoLabel& truth) {
  const double dx = est.x - truth.x;
  const double dy = est.y - truth.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("mean: empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

/// Sample standard deviation (n-1); 0 for a single element.
inline double stddev(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("stddev: empty sample");
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values.size() - 1));
}

inline double rmse(std::span<const double> errors) {
  if (errors.empty()) throw std::domain_error("rmse: empty sample");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

/// Step-function support points of the empirical CDF: sorted unique values
/// with the fraction of samples at or below each.
inline std::vector<std::pair<double, double>> ecdf_points(std::vector<double> errors) {
  if (errors.empty()) throw std::domain_error("ecdf_points: empty sample");
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i + 1 == errors.size() || errors[i + 1] != errors[i]) {
      out.emplace_back(errors[i], static_cast<double>(i + 1) / n);
    }
  }
  return out;
}

/// Nearest-rank percentile: the ceil(q*n)-th smallest value, q=0 giving the
/// smallest. q=0.5 is the reported median; for even n it is the mean of the
/// two middle order statistics.
inline double percentile(std::vector<double> errors, double q) {
  if (errors.empty()) throw std::domain_error("percentile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("percentile: q outside [0, 1]");
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  if (q == 0.5 && n % 2 == 0) {
    return (errors[n / 2 - 1] + errors[n / 2]) / 2.0;
  }
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return errors[rank - 1];
}

/// (success rate, building accuracy); success requires both building and
/// floor correct.
inline std::pair<double, double> classification_rates(std::span<const SampleOutcome> outcomes) {
  if (outcomes.empty()) throw std::domain_error("classification_rates: empty sample");
  std::size_t success = 0, building_ok = 0;
  for (const SampleOutcome& o : outcomes) {
    if (!o.building_correct.has_value() || !o.floor_correct.has_value()) {
      throw std::domain_error("classification_rates: outcome lacks building/floor booleans");
    }
    if (*o.building_correct) ++building_ok;
    if (*o.building_correct && *o.floor_correct) ++success;
  }
  const double n = static_cast<double>(outcomes.size());
  return {static_cast<double>(success) / n, static_cast<double>(building_ok) / n};
}

inline EvaluationReport make_report(const std::vector<double>& errors,
                                    std::span<const SampleOutcome> outcomes) {
  EvaluationReport report;
  report.n_samples = errors.size();
  report.rmse_m = rmse(errors);
  report.mean_m = mean(errors);
  report.std_m = stddev(errors);
  report.median_m = percentile(errors, 0.5);
  for (double q : {0.5, 0.8, 0.9, 0.95}) {
    report.percentiles.emplace_back(q, percentile(errors, q));
  }
  report.ecdf = ecdf_points(errors);
  const bool labeled = !outcomes.empty() &&
                       std::all_of(outcomes.begin(), outcomes.end(), [](const SampleOutcome& o) {
                         return o.building_correct.has_value() && o.floor_correct.has_value();
                       });
  if (labeled) {
    const auto [success, building] = classification_rates(outcomes);
    report.success_rate = success;
    report.building_accuracy = building;
  }
  return report;
}

/// A completed validation run: the aggregate report plus per-sample detail.
struct EvaluationRun {
  EvaluationReport report;
  std::vector<SampleOutcome> outcomes;
  std::vector<PositionEstimate> estimates;
  std::size_t n_skipped_empty = 0;   // all-missing queries carry no evidence
};

/// Runs the positioner over every validation sample. Empty query
/// fingerprints are skipped and counted rather than failing the run.
inline EvaluationRun evaluate_backend(std::span<const ReferenceFingerprintMap::Record> validation,
                                      const ReferenceFingerprintMap& rfm,
                                      const DissimilarityBackend& backend, int k,
                                      bool hierarchical, const StageK& stages = {}) {
  const Positioner positioner(rfm, backend);
  EvaluationRun run;
  std::vector<double> errors;
  for (const auto& sample : validation) {
    if (sample.fingerprint.empty()) {
      ++run.n_skipped_empty;
      continue;
    }
    PositionEstimate est = hierarchical ? positioner.hierarchical_locate(sample.fingerprint, k, stages)
                                        : positioner.knn_locate(sample.fingerprint, k);
    SampleOutcome outcome;
    outcome.error_m = positioning_error(est, sample.label);
    if (est.building.has_value() && sample.label.building.has_value()) {
      outcome.building_correct = *est.building == *sample.label.building;
    }
    if (est.floor.has_value() && sample.label.floor.has_value()) {
      outcome.floor_correct = *est.floor == *sample.label.floor;
    }
    errors.push_back(outcome.error_m);
    run.outcomes.push_back(outcome);
    run.estimates.push_back(std::move(est));
  }
  if (errors.empty()) throw std::domain_error("evaluate_backend: no usable validation samples");
  run.report = make_report(errors, run.outcomes);
  return run;
}

} // namespace cdm
