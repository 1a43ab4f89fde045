#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cdm/csv.hpp"
#include "cdm/errors.hpp"
#include "cdm/fingerprint.hpp"
#include "cdm/rng.hpp"

namespace cdm {

/// Column-role mapping for one dataset schema. The attribute columns hold
/// per-AP measurements; cells equal to the sentinel mean "not observed" and
/// are stripped at load time.
struct DatasetManifest {
  std::vector<std::string> attribute_columns;
  std::string coord_x_column;
  std::string coord_y_column;
  std::optional<std::string> building_column;
  std::optional<std::string> floor_column;
  std::optional<std::string> user_column;
  std::optional<std::string> device_column;
  std::optional<std::string> timestamp_column;
  double sentinel = 100.0;
  std::string coordinate_unit = "m";

  void validate() const {
    if (attribute_columns.empty()) throw SchemaError("manifest: attribute_columns is empty");
    if (coord_x_column.empty() || coord_y_column.empty()) {
      throw SchemaError("manifest: coordinate columns are required");
    }
    std::vector<std::string> names = attribute_columns;
    names.push_back(coord_x_column);
    names.push_back(coord_y_column);
    for (const auto& opt : {building_column, floor_column, user_column, device_column,
                            timestamp_column}) {
      if (opt.has_value()) names.push_back(*opt);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw SchemaError("manifest: column names must be distinct");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["attribute_columns"] = attribute_columns;
    j["coord_x_column"] = coord_x_column;
    j["coord_y_column"] = coord_y_column;
    if (building_column) j["building_column"] = *building_column;
    if (floor_column) j["floor_column"] = *floor_column;
    if (user_column) j["user_column"] = *user_column;
    if (device_column) j["device_column"] = *device_column;
    if (timestamp_column) j["timestamp_column"] = *timestamp_column;
    j["sentinel"] = sentinel;
    j["coordinate_unit"] = coordinate_unit;
    return j;
  }

  /// Accepts either an explicit "attribute_columns" array or the compact
  /// generator form "attribute_prefix" + "attribute_count" [+ "attribute_pad"].
  static DatasetManifest from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
      if (j.contains("attribute_columns")) {
        m.attribute_columns = j.at("attribute_columns").get<std::vector<std::string>>();
      } else if (j.contains("attribute_prefix")) {
        const auto prefix = j.at("attribute_prefix").get<std::string>();
        const auto count = j.at("attribute_count").get<int>();
        const int pad = j.value("attribute_pad", 3);
        m.attribute_columns = numbered_columns(prefix, count, pad);
      }
      m.coord_x_column = j.value("coord_x_column", "");
      m.coord_y_column = j.value("coord_y_column", "");
      if (j.contains("building_column")) m.building_column = j.at("building_column").get<std::string>();
      if (j.contains("floor_column")) m.floor_column = j.at("floor_column").get<std::string>();
      if (j.contains("user_column")) m.user_column = j.at("user_column").get<std::string>();
      if (j.contains("device_column")) m.device_column = j.at("device_column").get<std::string>();
      if (j.contains("timestamp_column")) m.timestamp_column = j.at("timestamp_column").get<std::string>();
      m.sentinel = j.value("sentinel", 100.0);
      m.coordinate_unit = j.value("coordinate_unit", "m");
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
  }

  static DatasetManifest load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("manifest " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  void save(const std::filesystem::path& path) const {
    atomic_write_file(path, to_json().dump(2) + "\n");
  }

  static std::vector<std::string> numbered_columns(const std::string& prefix, int count, int pad) {
    if (count < 1) throw SchemaError("manifest: attribute_count must be >= 1");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
      std::string num = std::to_string(i);
      while (static_cast<int>(num.size()) < pad) num.insert(num.begin(), '0');
      out.push_back(prefix + num);
    }
    return out;
  }

  /// Built-in schemas for the four supported datasets. Only the
  /// multi-building one follows a published file layout; the other three are
  /// defaults to override with a manifest file when the actual export
  /// differs (see README).
  static DatasetManifest builtin(const std::string& name) {
    DatasetManifest m;
    if (name == "ujiindoorloc") {
      m.attribute_columns = numbered_columns("WAP", 520, 3);
      m.coord_x_column = "LONGITUDE";
      m.coord_y_column = "LATITUDE";
      m.building_column = "BUILDINGID";
      m.floor_column = "FLOOR";
      m.user_column = "USERID";
      m.device_column = "PHONEID";
      m.timestamp_column = "TIMESTAMP";
      m.sentinel = 100.0;
    } else if (name == "alcala2017") {
      m.attribute_columns = numbered_columns("WAP", 152, 3);
      m.coord_x_column = "LONGITUDE";
      m.coord_y_column = "LATITUDE";
      m.sentinel = 100.0;
    } else if (name == "tampere") {
      m.attribute_columns = numbered_columns("WAP", 309, 3);
      m.coord_x_column = "LONGITUDE";
      m.coord_y_column = "LATITUDE";
      m.floor_column = "FLOOR";
      m.sentinel = 100.0;
    } else if (name == "hil") {
      m.attribute_columns = numbered_columns("AP", 490, 3);
      m.coord_x_column = "X";
      m.coord_y_column = "Y";
      m.sentinel = -110.0;
    } else {
      throw SchemaError("unknown built-in manifest: " + name);
    }
    return m;
  }

  /// A built-in name or a path to a manifest JSON file.
  static DatasetManifest resolve(const std::string& name_or_path) {
    for (const char* builtin_name : {"ujiindoorloc", "alcala2017", "tampere", "hil"}) {
      if (name_or_path == builtin_name) return builtin(name_or_path);
    }
    return load(name_or_path);
  }
};

struct RecordMetadata {
  std::optional<std::string> user;
  std::optional<std::string> device;
  std::optional<double> timestamp;
};

/// One loaded row: the sparse fingerprint, its label, replica-detection
/// metadata, and the raw line for verbatim re-export.
struct DatasetRecord {
  Fingerprint fingerprint;
  GeoLabel label;
  RecordMetadata meta;
  std::string raw_line;
};

struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<std::string> header;
  std::vector<DatasetRecord> records;
};

namespace detail {

inline int parse_int_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const double v = parse_double(cell, row, col);
  const double rounded = std::nearbyint(v);
  if (rounded != v) {
    throw SchemaError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                      ": expected integer, got '" + std::string(cell) + "'");
  }
  return static_cast<int>(rounded);
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column: " + name);
  return static_cast<std::size_t>(it - header.begin());
}

} // namespace detail

/// Streams a header-first CSV into sparse records. Attribute cells equal to
/// the manifest sentinel are dropped; a row whose attributes are all sentinel
/// becomes an empty fingerprint (kept here, removed by remove_invalid).
/// Columns not named by the manifest are preserved through raw_line only.
inline LoadedDataset load_dataset(std::istream& in, const DatasetManifest& manifest) {
  manifest.validate();
  LoadedDataset ds;
  ds.manifest = manifest;

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset is empty (no header row)");
  ds.header = split_csv_line(strip_line_ending(line));

  std::vector<std::size_t> attr_cols;
  attr_cols.reserve(manifest.attribute_columns.size());
  for (const std::string& name : manifest.attribute_columns) {
    attr_cols.push_back(detail::column_index(ds.header, name));
  }
  const std::size_t x_col = detail::column_index(ds.header, manifest.coord_x_column);
  const std::size_t y_col = detail::column_index(ds.header, manifest.coord_y_column);
  std::optional<std::size_t> building_col, floor_col, user_col, device_col, ts_col;
  if (manifest.building_column) building_col = detail::column_index(ds.header, *manifest.building_column);
  if (manifest.floor_column) floor_col = detail::column_index(ds.header, *manifest.floor_column);
  if (manifest.user_column) user_col = detail::column_index(ds.header, *manifest.user_column);
  if (manifest.device_column) device_col = detail::column_index(ds.header, *manifest.device_column);
  if (manifest.timestamp_column) ts_col = detail::column_index(ds.header, *manifest.timestamp_column);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_line_ending(line);
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != ds.header.size()) {
      throw SchemaError("row " + std::to_string(row) + ": expected " +
                        std::to_string(ds.header.size()) + " cells, found " +
                        std::to_string(cells.size()));
    }

    DatasetRecord record;
    std::vector<Fingerprint::Entry> entries;
    for (std::size_t a = 0; a < attr_cols.size(); ++a) {
      const std::size_t c = attr_cols[a];
      const double v = parse_double(cells[c], row, c + 1);
      if (v != manifest.sentinel) {
        entries.emplace_back(manifest.attribute_columns[a], v);
      }
    }
    record.fingerprint = Fingerprint(std::move(entries));
    record.label.x = parse_double(cells[x_col], row, x_col + 1);
    record.label.y = parse_double(cells[y_col], row, y_col + 1);
    if (building_col) record.label.building = detail::parse_int_cell(cells[*building_col], row, *building_col + 1);
    if (floor_col) record.label.floor = detail::parse_int_cell(cells[*floor_col], row, *floor_col + 1);
    if (user_col) record.meta.user = cells[*user_col];
    if (device_col) record.meta.device = cells[*device_col];
    if (ts_col) record.meta.timestamp = parse_double(cells[*ts_col], row, *ts_col + 1);
    record.raw_line = std::move(line);
    ds.records.push_back(std::move(record));
  }
  return ds;
}

inline LoadedDataset load_dataset(const std::filesystem::path& path,
                                  const DatasetManifest& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open dataset: " + path.string());
  try {
    return load_dataset(in, manifest);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

/// Counts from the two-step cleaning pass.
struct CleaningReport {
  std::size_t n_input = 0;
  std::size_t n_invalid_removed = 0;
  std::size_t n_after_invalid = 0;
  std::size_t n_replica_groups = 0;
  std::size_t n_unique_kept = 0;
  std::uint64_t seed = 0;
  double window_seconds = 300.0;

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"n_input", n_input},
        {"n_invalid_removed", n_invalid_removed},
        {"n_after_invalid", n_after_invalid},
        {"n_replica_groups", n_replica_groups},
        {"n_unique_kept", n_unique_kept},
        {"seed", seed},
        {"window_seconds", window_seconds},
    };
  }
};

/// Drops records whose fingerprints are empty (every attribute cell was the
/// sentinel). Returns (n_input, n_removed).
inline std::pair<std::size_t, std::size_t> remove_invalid(std::vector<DatasetRecord>& records) {
  const std::size_t n_input = records.size();
  records.erase(std::remove_if(records.begin(), records.end(),
                               [](const DatasetRecord& r) { return r.fingerprint.empty(); }),
                records.end());
  return {n_input, n_input - records.size()};
}

/// Collapses replica clusters: records at the same location (exact x, y,
/// building, floor equality) by the same user and device, chained while
/// consecutive timestamps are within window_seconds, keep one seeded-random
/// representative each. Surviving records stay in their original order.
/// Returns (number of clusters of size >= 2, records kept).
inline std::pair<std::size_t, std::size_t> dedup_replicas(std::vector<DatasetRecord>& records,
                                                          double window_seconds,
                                                          std::uint64_t seed) {
  for (const DatasetRecord& r : records) {
    if (!r.meta.user || !r.meta.device || !r.meta.timestamp) {
      throw ConfigError("dedup_replicas: manifest must configure user, device and "
                        "timestamp columns");
    }
  }

  using GroupKey = std::tuple<double, double, std::optional<int>, std::optional<int>,
                              std::string, std::string>;
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DatasetRecord& r = records[i];
    groups[GroupKey{r.label.x, r.label.y, r.label.building, r.label.floor, *r.meta.user,
                    *r.meta.device}]
        .push_back(i);
  }

  SplitMix64 rng(seed);
  std::vector<std::size_t> kept;
  kept.reserve(records.size());
  std::size_t replica_groups = 0;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [&records](std::size_t a, std::size_t b) {
      const double ta = *records[a].meta.timestamp;
      const double tb = *records[b].meta.timestamp;
      if (ta != tb) return ta < tb;
      return a < b;
    });
    std::size_t cluster_start = 0;
    for (std::size_t m = 1; m <= members.size(); ++m) {
      const bool boundary =
          m == members.size() ||
          *records[members[m]].meta.timestamp - *records[members[m - 1]].meta.timestamp >
              window_seconds;
      if (!boundary) continue;
      const std::size_t cluster_size = m - cluster_start;
      if (cluster_size == 1) {
        kept.push_back(members[cluster_start]);
      } else {
        ++replica_groups;
        kept.push_back(members[cluster_start + rng.below(cluster_size)]);
      }
      cluster_start = m;
    }
  }

  std::sort(kept.begin(), kept.end());
  std::vector<DatasetRecord> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(std::move(records[i]));
  records = std::move(out);
  return {replica_groups, records.size()};
}

/// Runs both cleaning steps in order and reports the counts.
inline CleaningReport clean_dataset(std::vector<DatasetRecord>& records, double window_seconds,
                                    std::uint64_t seed, bool dedup = true) {
  CleaningReport report;
  report.seed = seed;
  report.window_seconds = window_seconds;
  const auto [n_input, n_removed] = remove_invalid(records);
  report.n_input = n_input;
  report.n_invalid_removed = n_removed;
  report.n_after_invalid = records.size();
  if (dedup) {
    const auto [n_groups, n_kept] = dedup_replicas(records, window_seconds, seed);
    report.n_replica_groups = n_groups;
    report.n_unique_kept = n_kept;
  } else {
    report.n_unique_kept = records.size();
  }
  return report;
}

/// Seeded random split; |train| = round-half-up(fraction * n). Both subsets
/// keep the original record order.
inline std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> train_validation_split(
    const std::vector<DatasetRecord>& records, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must be in (0, 1)");
  }
  const std::size_t n = records.size();
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 0.5));
  const std::vector<std::size_t> perm = shuffled_indices(n, seed);
  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[perm[i]] = 1;
  std::vector<DatasetRecord> train, validation;
  train.reserve(n_train);
  validation.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : validation).push_back(records[i]);
  }
  return {std::move(train), std::move(validation)};
}

/// Re-emits the dataset with its original header and raw record lines, so the
/// exported file carries exactly the input schema.
inline void export_dataset_csv(const LoadedDataset& ds, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    for (std::size_t i = 0; i < ds.header.size(); ++i) {
      if (i) out << ',';
      out << ds.header[i];
    }
    out << '\n';
    for (const DatasetRecord& r : ds.records) out << r.raw_line << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline ReferenceFingerprintMap to_reference_map(std::span<const DatasetRecord> records) {
  std::vector<ReferenceFingerprintMap::Record> out;
  out.reserve(records.size());
  for (const DatasetRecord& r : records) out.push_back({r.fingerprint, r.label});
  return ReferenceFingerprintMap(std::move(out));
}

} // namespace cdm
