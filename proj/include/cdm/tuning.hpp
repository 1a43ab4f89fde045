#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cdm/compound.hpp"
#include "cdm/errors.hpp"
#include "cdm/evaluation.hpp"
#include "cdm/fingerprint.hpp"
#include "cdm/positioning.hpp"
#include "cdm/rng.hpp"

namespace cdm {

/// Fold-mean objective for the alpha grid search: minimum mean RMSE for
/// single-building data, maximum mean success rate for multi-building data.
enum class TuningCriterion { MinMeanRmse, MaxMeanSuccessRate };

inline std::string criterion_name(TuningCriterion c) {
  switch (c) {
    case TuningCriterion::MinMeanRmse: return "rmse";
    case TuningCriterion::MaxMeanSuccessRate: return "success";
  }
  throw std::logic_error("unknown criterion");
}

inline TuningCriterion parse_criterion(std::string_view name) {
  if (name == "rmse") return TuningCriterion::MinMeanRmse;
  if (name == "success") return TuningCriterion::MaxMeanSuccessRate;
  throw std::invalid_argument("unknown criterion: " + std::string(name));
}

/// Default search grid: 0.0 to 3.0 inclusive in steps of 0.1 (31 points).
inline std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

struct TuningSpec {
  int folds = 10;
  std::vector<double> grid = default_alpha_grid();
  TuningCriterion criterion = TuningCriterion::MinMeanRmse;
  std::uint64_t seed = 0;
  int k = 1;
  CompoundConfig base;   // alpha is overwritten per grid point

  void validate() const {
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    if (grid.empty()) throw std::invalid_argument("alpha grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (!(grid[i - 1] < grid[i])) {
        throw std::invalid_argument("alpha grid must be strictly increasing");
      }
    }
    for (double a : grid) {
      if (!(a >= 0.0)) throw std::invalid_argument("alpha grid values must be >= 0");
    }
  }
};

/// Per-alpha fold scores (box-plot source data) and the selected alpha.
struct TuningResult {
  std::vector<std::pair<double, std::vector<double>>> per_alpha;   // grid order
  double best_alpha = 0.0;
  double best_score = 0.0;
};

/// Seeded random permutation of 0..n-1 split into `folds` chunks whose sizes
/// differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int folds,
                                                             std::uint64_t seed) {
  if (folds < 1 || static_cast<std::size_t>(folds) > n) {
    throw std::domain_error("kfold_partition: folds must be in [1, n]");
  }
  const std::vector<std::size_t> perm = shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  const std::size_t base = n / static_cast<std::size_t>(folds);
  const std::size_t extra = n % static_cast<std::size_t>(folds);
  std::size_t next = 0;
  for (std::size_t f = 0; f < out.size(); ++f) {
    const std::size_t take = base + (f < extra ? 1 : 0);
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(next),
                  perm.begin() + static_cast<std::ptrdiff_t>(next + take));
    next += take;
  }
  return out;
}

/// Grid search over alpha with k-fold cross validation. One partition is
/// drawn per call and shared by every grid point; each fold is evaluated with
/// the remaining folds as the temporary reference map. Hierarchical
/// positioning is used when the map carries both building and floor labels.
/// Ties in the fold-mean score resolve toward the smaller alpha.
inline TuningResult cross_validate_alpha(const ReferenceFingerprintMap& rfm,
                                         const TuningSpec& spec) {
  spec.validate();
  spec.base.validate();
  if (rfm.size() < static_cast<std::size_t>(spec.folds)) {
    throw std::domain_error("cross_validate_alpha: fewer records than folds");
  }
  const bool hierarchical = rfm.has_building_labels() && rfm.has_floor_labels();
  if (spec.criterion == TuningCriterion::MaxMeanSuccessRate && !hierarchical) {
    throw ConfigError("success-rate criterion requires building and floor labels");
  }

  const auto folds = kfold_partition(rfm.size(), spec.folds, spec.seed);

  TuningResult result;
  result.per_alpha.reserve(spec.grid.size());
  for (double alpha : spec.grid) result.per_alpha.emplace_back(alpha, std::vector<double>());

  for (const auto& holdout : folds) {
    std::vector<char> held(rfm.size(), 0);
    for (std::size_t i : holdout) held[i] = 1;

    std::vector<ReferenceFingerprintMap::Record> train_records;
    train_records.reserve(rfm.size() - holdout.size());
    for (std::size_t i = 0; i < rfm.size(); ++i) {
      if (!held[i]) train_records.push_back(rfm.records()[i]);
    }
    const ReferenceFingerprintMap fold_rfm(std::move(train_records));

    std::vector<ReferenceFingerprintMap::Record> queries;
    queries.reserve(holdout.size());
    for (std::size_t i : holdout) queries.push_back(rfm.records()[i]);

    for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
      CompoundConfig cfg = spec.base;
      cfg.alpha = spec.grid[gi];
      const EvaluationRun run = evaluate_backend(
          queries, fold_rfm, DissimilarityBackend::compound(cfg), spec.k, hierarchical);
      const double score = spec.criterion == TuningCriterion::MinMeanRmse
                               ? run.report.rmse_m
                               : run.report.success_rate.value();
      result.per_alpha[gi].second.push_back(score);
    }
  }

  const bool minimize = spec.criterion == TuningCriterion::MinMeanRmse;
  bool first = true;
  for (const auto& [alpha, scores] : result.per_alpha) {
    const double fold_mean = mean(scores);
    if (first || (minimize ? fold_mean < result.best_score : fold_mean > result.best_score)) {
      result.best_alpha = alpha;
      result.best_score = fold_mean;
      first = false;
    }
  }
  return result;
}

} // namespace cdm
