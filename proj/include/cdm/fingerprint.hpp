#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cdm {

/// Attribute identifier: an access-point id (MAC address) or a column name.
/// Lexicographic order fixes the deterministic iteration order everywhere.
using AttributeId = std::string;

/// One measurement: the set of actually observed (attribute, value) pairs.
/// Entries are kept sorted by attribute id and unique; a stored entry always
/// means "observed" (missing-value sentinels are stripped at ingestion).
/// May be empty; ingestion flags empty fingerprints as invalid for training.
class Fingerprint {
public:
  using Entry = std::pair<AttributeId, double>;

  Fingerprint() = default;

  explicit Fingerprint(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (entries_[i - 1].first == entries_[i].first) {
        throw std::invalid_argument("duplicate attribute id: " + entries_[i].first);
      }
    }
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// Sorted by attribute id.
  const std::vector<Entry>& entries() const { return entries_; }

  std::optional<double> value_of(const AttributeId& id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const Entry& e, const AttributeId& key) { return e.first < key; });
    if (it == entries_.end() || it->first != id) return std::nullopt;
    return it->second;
  }

  bool contains(const AttributeId& id) const { return value_of(id).has_value(); }

  bool operator==(const Fingerprint& other) const { return entries_ == other.entries_; }

private:
  std::vector<Entry> entries_;
};

/// Ground-truth position: planar coordinates plus optional building/floor.
struct GeoLabel {
  std::optional<int> building;
  std::optional<int> floor;
  double x = 0.0;
  double y = 0.0;
};

/// Attribute ids present in both fingerprints, sorted.
inline std::vector<AttributeId> shared_attributes(const Fingerprint& a, const Fingerprint& b) {
  std::vector<AttributeId> out;
  auto ia = a.entries().begin(), ea = a.entries().end();
  auto ib = b.entries().begin(), eb = b.entries().end();
  while (ia != ea && ib != eb) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      out.push_back(ia->first);
      ++ia;
      ++ib;
    }
  }
  return out;
}

/// Attribute ids in a but not in b, sorted.
inline std::vector<AttributeId> exclusive_attributes(const Fingerprint& a, const Fingerprint& b) {
  std::vector<AttributeId> out;
  auto ia = a.entries().begin(), ea = a.entries().end();
  auto ib = b.entries().begin(), eb = b.entries().end();
  while (ia != ea) {
    if (ib == eb || ia->first < ib->first) {
      out.push_back(ia->first);
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      ++ia;
      ++ib;
    }
  }
  return out;
}

/// Equal-length vector form of a fingerprint: position i holds the value for
/// universe[i] if observed, else gamma. Ids outside the universe are dropped.
inline std::vector<double> densify(const Fingerprint& f, std::span<const AttributeId> universe,
                                   double gamma) {
  if (universe.empty()) throw std::domain_error("densify: empty universe");
  std::vector<double> out(universe.size(), gamma);
  auto it = f.entries().begin();
  const auto end = f.entries().end();
  for (std::size_t i = 0; i < universe.size() && it != end; ++i) {
    while (it != end && it->first < universe[i]) ++it;
    if (it != end && it->first == universe[i]) {
      out[i] = it->second;
      ++it;
    }
  }
  return out;
}

/// The offline-collected reference set: an ordered, index-addressable list of
/// labeled fingerprints plus the attribute universe (union over all records).
class ReferenceFingerprintMap {
public:
  struct Record {
    Fingerprint fingerprint;
    GeoLabel label;
  };

  ReferenceFingerprintMap() = default;

  explicit ReferenceFingerprintMap(std::vector<Record> records) : records_(std::move(records)) {
    bool any_building = false, all_building = true;
    bool any_floor = false, all_floor = true;
    std::vector<AttributeId> ids;
    for (const Record& r : records_) {
      any_building |= r.label.building.has_value();
      all_building &= r.label.building.has_value();
      any_floor |= r.label.floor.has_value();
      all_floor &= r.label.floor.has_value();
      for (const auto& [id, value] : r.fingerprint.entries()) ids.push_back(id);
    }
    if (any_building && !all_building) {
      throw std::invalid_argument("building label present on some records but not all");
    }
    if (any_floor && !all_floor) {
      throw std::invalid_argument("floor label present on some records but not all");
    }
    has_building_ = any_building && all_building;
    has_floor_ = any_floor && all_floor;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    universe_ = std::move(ids);
  }

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Sorted union of attribute ids over all records.
  const std::vector<AttributeId>& universe() const { return universe_; }

  bool has_building_labels() const { return has_building_; }
  bool has_floor_labels() const { return has_floor_; }

private:
  std::vector<Record> records_;
  std::vector<AttributeId> universe_;
  bool has_building_ = false;
  bool has_floor_ = false;
};

} // namespace cdm
