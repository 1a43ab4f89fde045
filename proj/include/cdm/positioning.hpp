#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cdm/compound.hpp"
#include "cdm/fingerprint.hpp"
#include "cdm/kernels.hpp"

namespace cdm {

/// Baseline ("w/o") path: gamma-filled vectors over the map's universe,
/// compared with the plain vector metric.
struct BaselineConfig {
  KernelId kernel{};
  double gamma = 100.0;
};

/// Selects exactly one dissimilarity path: the sparse compound measure or
/// the gamma-filled vector baseline.
class DissimilarityBackend {
public:
  static DissimilarityBackend compound(CompoundConfig cfg) {
    cfg.validate();
    return DissimilarityBackend(std::move(cfg));
  }
  static DissimilarityBackend baseline(BaselineConfig cfg) {
    if (!(cfg.kernel.minkowski_p > 0.0)) throw std::invalid_argument("minkowski p must be > 0");
    return DissimilarityBackend(std::move(cfg));
  }

  bool is_baseline() const { return std::holds_alternative<BaselineConfig>(impl_); }
  const CompoundConfig* compound_config() const { return std::get_if<CompoundConfig>(&impl_); }
  const BaselineConfig* baseline_config() const { return std::get_if<BaselineConfig>(&impl_); }

private:
  template <typename T>
  explicit DissimilarityBackend(T cfg) : impl_(std::move(cfg)) {}
  std::variant<CompoundConfig, BaselineConfig> impl_;
};

/// Estimated position: averaged planar coordinates, the k neighbors behind
/// them (ascending dissimilarity), and building/floor when the hierarchical
/// stages ran.
struct PositionEstimate {
  std::optional<int> building;
  std::optional<int> floor;
  double x = 0.0;
  double y = 0.0;
  std::vector<std::size_t> neighbor_indices;
  std::vector<double> neighbor_dissimilarities;
};

/// Optional per-stage k overrides for the hierarchical stages; unset stages
/// use the shared k.
struct StageK {
  std::optional<int> building_k;
  std::optional<int> floor_k;
  std::optional<int> position_k;
};

/// Query-side evaluator bound to one map and one backend. Precomputes the
/// gamma-filled record matrix for the baseline path so batch runs do not
/// re-densify the map per query.
class Positioner {
public:
  Positioner(const ReferenceFingerprintMap& rfm, DissimilarityBackend backend)
      : rfm_(rfm), backend_(std::move(backend)) {
    if (const BaselineConfig* cfg = backend_.baseline_config()) {
      dense_records_.reserve(rfm_.size());
      for (const auto& record : rfm_.records()) {
        dense_records_.push_back(densify(record.fingerprint, rfm_.universe(), cfg->gamma));
      }
    }
  }

  const ReferenceFingerprintMap& rfm() const { return rfm_; }

  /// Dissimilarity from the query to every record, in record order.
  /// Empty queries are rejected; they carry no evidence to match on.
  std::vector<double> all_dissimilarities(const Fingerprint& query) const {
    if (query.empty()) throw std::domain_error("query fingerprint is empty");
    std::vector<double> out(rfm_.size());
    if (const BaselineConfig* baseline = backend_.baseline_config()) {
      const std::vector<double> dense_query = densify(query, rfm_.universe(), baseline->gamma);
      for (std::size_t i = 0; i < rfm_.size(); ++i) {
        out[i] = vector_metric(baseline->kernel, dense_query, dense_records_[i], baseline->gamma);
      }
    } else {
      const CompoundConfig& cfg = *backend_.compound_config();
      for (std::size_t i = 0; i < rfm_.size(); ++i) {
        out[i] = dissimilarity(query, rfm_.records()[i].fingerprint, cfg);
      }
    }
    return out;
  }

  /// k smallest dissimilarities ascending; ties broken by smaller record index.
  std::vector<std::pair<std::size_t, double>> rank_neighbors(const Fingerprint& query,
                                                             int k) const {
    require_k(k, rfm_.size());
    const std::vector<double> dissims = all_dissimilarities(query);
    std::vector<std::size_t> all(rfm_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return select_k(dissims, all, static_cast<std::size_t>(k));
  }

  /// Unweighted mean of the k nearest records' coordinates.
  PositionEstimate knn_locate(const Fingerprint& query, int k) const {
    require_k(k, rfm_.size());
    const std::vector<double> dissims = all_dissimilarities(query);
    std::vector<std::size_t> all(rfm_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return average_of(select_k(dissims, all, static_cast<std::size_t>(k)));
  }

  /// Three-stage estimate for multi-building/multi-floor maps: vote the
  /// building over the k global nearest, vote the floor over the k nearest
  /// within that building, then average within building+floor. k is clamped
  /// to the restricted record counts in stages 2 and 3.
  PositionEstimate hierarchical_locate(const Fingerprint& query, int k,
                                       const StageK& stages = {}) const {
    if (!rfm_.has_building_labels() || !rfm_.has_floor_labels()) {
      throw std::domain_error("hierarchical_locate: records lack building/floor labels");
    }
    const int k1 = stages.building_k.value_or(k);
    const int k2 = stages.floor_k.value_or(k);
    const int k3 = stages.position_k.value_or(k);
    require_k(k1, rfm_.size());
    if (k2 < 1 || k3 < 1) throw std::domain_error("k must be >= 1");

    const std::vector<double> dissims = all_dissimilarities(query);

    std::vector<std::size_t> all(rfm_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto global_nearest = select_k(dissims, all, static_cast<std::size_t>(k1));
    const int building = majority_vote(global_nearest, [this](std::size_t i) {
      return *rfm_.records()[i].label.building;
    });

    std::vector<std::size_t> in_building;
    for (std::size_t i = 0; i < rfm_.size(); ++i) {
      if (*rfm_.records()[i].label.building == building) in_building.push_back(i);
    }
    const auto building_nearest =
        select_k(dissims, in_building, std::min<std::size_t>(k2, in_building.size()));
    const int floor = majority_vote(building_nearest, [this](std::size_t i) {
      return *rfm_.records()[i].label.floor;
    });

    std::vector<std::size_t> in_floor;
    for (std::size_t i : in_building) {
      if (*rfm_.records()[i].label.floor == floor) in_floor.push_back(i);
    }
    PositionEstimate est =
        average_of(select_k(dissims, in_floor, std::min<std::size_t>(k3, in_floor.size())));
    est.building = building;
    est.floor = floor;
    return est;
  }

private:
  static void require_k(int k, std::size_t n) {
    if (n == 0) throw std::domain_error("reference map is empty");
    if (k < 1 || static_cast<std::size_t>(k) > n) {
      throw std::domain_error("k must be in [1, record count]");
    }
  }

  /// k best among the candidate indices; stable under ties by record index
  /// (candidates arrive in ascending index order).
  static std::vector<std::pair<std::size_t, double>> select_k(const std::vector<double>& dissims,
                                                              const std::vector<std::size_t>& candidates,
                                                              std::size_t k) {
    std::vector<std::size_t> order = candidates;
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&dissims](std::size_t a, std::size_t b) {
                        if (dissims[a] != dissims[b]) return dissims[a] < dissims[b];
                        return a < b;
                      });
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], dissims[order[i]]);
    return out;
  }

  PositionEstimate average_of(std::vector<std::pair<std::size_t, double>> neighbors) const {
    PositionEstimate est;
    double sx = 0.0, sy = 0.0;
    for (const auto& [index, dissim] : neighbors) {
      sx += rfm_.records()[index].label.x;
      sy += rfm_.records()[index].label.y;
      est.neighbor_indices.push_back(index);
      est.neighbor_dissimilarities.push_back(dissim);
    }
    est.x = sx / static_cast<double>(neighbors.size());
    est.y = sy / static_cast<double>(neighbors.size());
    return est;
  }

  /// Majority label over ranked neighbors. Among tied top counts the label
  /// whose best-ranked member comes first wins, which reduces to "take the
  /// nearest neighbor's label" whenever the nearest belongs to a tied label.
  template <typename LabelOf>
  static int majority_vote(const std::vector<std::pair<std::size_t, double>>& ranked,
                           LabelOf label_of) {
    std::map<int, std::size_t> counts;
    for (const auto& [index, dissim] : ranked) ++counts[label_of(index)];
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) best_count = std::max(best_count, count);
    for (const auto& [index, dissim] : ranked) {
      const int label = label_of(index);
      if (counts[label] == best_count) return label;
    }
    throw std::logic_error("majority_vote: empty neighbor list");
  }

  const ReferenceFingerprintMap& rfm_;
  DissimilarityBackend backend_;
  std::vector<std::vector<double>> dense_records_;
};

/// One-shot forms of the Positioner operations.
inline std::vector<std::pair<std::size_t, double>> rank_neighbors(
    const Fingerprint& query, const ReferenceFingerprintMap& rfm,
    const DissimilarityBackend& backend, int k) {
  return Positioner(rfm, backend).rank_neighbors(query, k);
}

inline PositionEstimate knn_locate(const Fingerprint& query, const ReferenceFingerprintMap& rfm,
                                   const DissimilarityBackend& backend, int k) {
  return Positioner(rfm, backend).knn_locate(query, k);
}

inline PositionEstimate hierarchical_locate(const Fingerprint& query,
                                            const ReferenceFingerprintMap& rfm,
                                            const DissimilarityBackend& backend, int k,
                                            const StageK& stages = {}) {
  return Positioner(rfm, backend).hierarchical_locate(query, k, stages);
}

} // namespace cdm
