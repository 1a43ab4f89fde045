#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdm/compound.hpp"
#include "cdm/csv.hpp"
#include "cdm/dataset.hpp"
#include "cdm/errors.hpp"
#include "cdm/evaluation.hpp"
#include "cdm/positioning.hpp"
#include "cdm/report_io.hpp"
#include "cdm/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 ok, 2 usage, 3 schema/config, 4 runtime.
constexpr int kExitUsage = 2;
constexpr int kExitSchema = 3;
constexpr int kExitRuntime = 4;

std::string iso8601_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_meta() {
  return json{{"generated_at", iso8601_utc_now()}, {"tool", "cdm"}, {"version", kToolVersion}};
}

void write_json(const fs::path& path, const json& doc) {
  cdm::atomic_write_file(path, doc.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Backend selection shared by evaluate/compare/ecdf/tune.

struct BackendOptions {
  std::string variant = "rcdm";   // cdm | acdm | rcdm | baseline
  std::string kernel = "lorentzian";
  double alpha = 1.0;
  std::optional<double> gamma;    // defaults to the manifest sentinel
  double epsilon = 1e-6;
  double minkowski_p = 2.0;
};

cdm::KernelId make_kernel(const std::string& name, double p) {
  cdm::KernelId k;
  k.kind = cdm::parse_kernel(name);
  k.minkowski_p = p;
  return k;
}

cdm::DissimilarityBackend make_backend(const BackendOptions& opt, double manifest_sentinel) {
  const double gamma = opt.gamma.value_or(manifest_sentinel);
  if (opt.variant == "baseline") {
    return cdm::DissimilarityBackend::baseline({make_kernel(opt.kernel, opt.minkowski_p), gamma});
  }
  cdm::CompoundConfig cfg;
  cfg.variant = cdm::parse_variant(opt.variant);
  cfg.kernel = make_kernel(opt.kernel, opt.minkowski_p);
  cfg.alpha = opt.alpha;
  cfg.gamma = gamma;
  cfg.epsilon = opt.epsilon;
  return cdm::DissimilarityBackend::compound(cfg);
}

json backend_config_json(const BackendOptions& opt, double manifest_sentinel) {
  return json{{"variant", opt.variant},
              {"kernel", opt.kernel},
              {"alpha", opt.alpha},
              {"gamma", opt.gamma.value_or(manifest_sentinel)},
              {"epsilon", opt.epsilon},
              {"p", opt.minkowski_p}};
}

/// Backend spec strings for compare/ecdf:
///   variant:kernel[:alpha=A][:gamma=G][:epsilon=E][:p=P]
/// e.g. "rcdm:lorentzian:alpha=0.5" or "baseline:cityblock".
BackendOptions parse_backend_spec(const std::string& spec, const BackendOptions& defaults) {
  std::vector<std::string> parts;
  std::string part;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(part);
      part.clear();
    } else {
      part += c;
    }
  }
  parts.push_back(part);
  if (parts.size() < 2) {
    throw std::invalid_argument("backend spec '" + spec + "': expected variant:kernel[...]");
  }
  BackendOptions opt = defaults;
  opt.variant = parts[0];
  opt.kernel = parts[1];
  if (opt.variant != "baseline") cdm::parse_variant(opt.variant);
  cdm::parse_kernel(opt.kernel);
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("backend spec '" + spec + "': expected key=value, got '" +
                                  parts[i] + "'");
    }
    const std::string key = parts[i].substr(0, eq);
    const double value = std::stod(parts[i].substr(eq + 1));
    if (key == "alpha") opt.alpha = value;
    else if (key == "gamma") opt.gamma = value;
    else if (key == "epsilon") opt.epsilon = value;
    else if (key == "p") opt.minkowski_p = value;
    else throw std::invalid_argument("backend spec '" + spec + "': unknown key '" + key + "'");
  }
  return opt;
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset plumbing shared by the evaluating subcommands.

struct DataOptions {
  std::string manifest = "ujiindoorloc";
  std::string train_path;
  std::string validation_path;
  double split_fraction = 0.75;
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& data, bool need_validation) {
  cmd->add_option("--manifest", data.manifest,
                  "Built-in manifest name (ujiindoorloc|alcala2017|tampere|hil) or manifest JSON path")
      ->capture_default_str();
  cmd->add_option("--train", data.train_path, "Training/reference CSV")->required();
  if (need_validation) {
    cmd->add_option("--validation", data.validation_path,
                    "Validation CSV; when absent the training file is split");
    cmd->add_option("--split-fraction", data.split_fraction,
                    "Training share of the seeded split used when --validation is absent")
        ->capture_default_str();
  }
  cmd->add_option("--seed", data.seed, "Seed for all randomized steps")->capture_default_str();
}

struct PreparedData {
  cdm::DatasetManifest manifest;
  std::vector<cdm::DatasetRecord> train;
  std::vector<cdm::DatasetRecord> validation;
  std::size_t n_train_empty_dropped = 0;
  bool split_from_train = false;
};

PreparedData prepare_data(const DataOptions& data, bool need_validation) {
  PreparedData prepared;
  prepared.manifest = cdm::DatasetManifest::resolve(data.manifest);
  cdm::LoadedDataset train = cdm::load_dataset(fs::path(data.train_path), prepared.manifest);
  prepared.train = std::move(train.records);
  const auto [n_in, n_removed] = cdm::remove_invalid(prepared.train);
  (void)n_in;
  prepared.n_train_empty_dropped = n_removed;

  if (!need_validation) return prepared;

  if (!data.validation_path.empty()) {
    cdm::LoadedDataset validation =
        cdm::load_dataset(fs::path(data.validation_path), prepared.manifest);
    prepared.validation = std::move(validation.records);
  } else {
    prepared.split_from_train = true;
    auto [train_part, validation_part] =
        cdm::train_validation_split(prepared.train, data.split_fraction, data.seed);
    prepared.train = std::move(train_part);
    prepared.validation = std::move(validation_part);
  }
  return prepared;
}

json data_config_json(const DataOptions& data, const PreparedData& prepared, bool need_validation) {
  json j{{"manifest", data.manifest},
         {"train", data.train_path},
         {"seed", data.seed},
         {"n_train_records", prepared.train.size()},
         {"n_train_empty_dropped", prepared.n_train_empty_dropped}};
  if (need_validation) {
    j["validation"] = data.validation_path;
    j["split_from_train"] = prepared.split_from_train;
    if (prepared.split_from_train) j["split_fraction"] = data.split_fraction;
    j["n_validation_records"] = prepared.validation.size();
  }
  return j;
}

// ---------------------------------------------------------------------------
// Subcommand payloads.

struct CleanArgs {
  DataOptions data;
  double window_seconds = 300.0;
  bool no_dedup = false;
  std::string out;
};

int run_clean(const CleanArgs& args) {
  const fs::path out_dir = ensure_out_dir(args.out);
  const cdm::DatasetManifest manifest = cdm::DatasetManifest::resolve(args.data.manifest);
  cdm::LoadedDataset ds = cdm::load_dataset(fs::path(args.data.train_path), manifest);
  const cdm::CleaningReport report =
      cdm::clean_dataset(ds.records, args.window_seconds, args.data.seed, !args.no_dedup);

  cdm::export_dataset_csv(ds, out_dir / "cleaned.csv");
  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"manifest", args.data.manifest},
                       {"train", args.data.train_path},
                       {"seed", args.data.seed},
                       {"window_seconds", args.window_seconds},
                       {"dedup", !args.no_dedup},
                       {"out", args.out}};
  doc["report"] = report.to_json();
  write_json(out_dir / "cleaning_report.json", doc);

  std::cout << "input records      " << report.n_input << "\n"
            << "invalid removed    " << report.n_invalid_removed << "\n"
            << "after invalid      " << report.n_after_invalid << "\n"
            << "replica groups     " << report.n_replica_groups << "\n"
            << "unique kept        " << report.n_unique_kept << "\n"
            << "wrote " << (out_dir / "cleaned.csv").string() << "\n";
  return 0;
}

struct SplitArgs {
  DataOptions data;
  double fraction = 0.75;
  std::string out;
};

int run_split(const SplitArgs& args) {
  const fs::path out_dir = ensure_out_dir(args.out);
  const cdm::DatasetManifest manifest = cdm::DatasetManifest::resolve(args.data.manifest);
  cdm::LoadedDataset ds = cdm::load_dataset(fs::path(args.data.train_path), manifest);
  auto [train, validation] = cdm::train_validation_split(ds.records, args.fraction, args.data.seed);

  cdm::LoadedDataset train_ds{ds.manifest, ds.header, std::move(train)};
  cdm::LoadedDataset validation_ds{ds.manifest, ds.header, std::move(validation)};
  cdm::export_dataset_csv(train_ds, out_dir / "train.csv");
  cdm::export_dataset_csv(validation_ds, out_dir / "validation.csv");

  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"manifest", args.data.manifest},
                       {"train", args.data.train_path},
                       {"fraction", args.fraction},
                       {"seed", args.data.seed},
                       {"out", args.out}};
  doc["report"] = json{{"n_input", train_ds.records.size() + validation_ds.records.size()},
                       {"n_train", train_ds.records.size()},
                       {"n_validation", validation_ds.records.size()}};
  write_json(out_dir / "split_report.json", doc);

  std::cout << "train      " << train_ds.records.size() << "\n"
            << "validation " << validation_ds.records.size() << "\n";
  return 0;
}

struct PositioningArgs {
  int k = 1;
  bool hierarchical = false;
  std::optional<int> k_building, k_floor, k_position;
};

void add_positioning_options(CLI::App* cmd, PositioningArgs& pos) {
  cmd->add_option("--k", pos.k, "Neighbor count")->capture_default_str();
  cmd->add_flag("--hierarchical", pos.hierarchical,
                "Stage the estimate: building vote, floor vote, then averaging");
  cmd->add_option("--k-building", pos.k_building, "Override k for the building vote stage");
  cmd->add_option("--k-floor", pos.k_floor, "Override k for the floor vote stage");
  cmd->add_option("--k-position", pos.k_position, "Override k for the final averaging stage");
}

cdm::StageK stage_k(const PositioningArgs& pos) {
  return cdm::StageK{pos.k_building, pos.k_floor, pos.k_position};
}

json positioning_config_json(const PositioningArgs& pos) {
  json j{{"k", pos.k}, {"hierarchical", pos.hierarchical}};
  if (pos.k_building) j["k_building"] = *pos.k_building;
  if (pos.k_floor) j["k_floor"] = *pos.k_floor;
  if (pos.k_position) j["k_position"] = *pos.k_position;
  return j;
}

void add_backend_options(CLI::App* cmd, BackendOptions& backend) {
  cmd->add_option("--variant", backend.variant, "cdm | acdm | rcdm | baseline")
      ->capture_default_str();
  cmd->add_option("--kernel", backend.kernel,
                  "lorentzian|hamming|jaccard|wavehedges|canberra|clark|cityblock|minkowski")
      ->capture_default_str();
  cmd->add_option("--alpha", backend.alpha, "Weight on mutually unshared attributes")
      ->capture_default_str();
  cmd->add_option("--gamma", backend.gamma,
                  "Missing-value stand-in (defaults to the manifest sentinel)");
  cmd->add_option("--epsilon", backend.epsilon, "Guard for the relative-weight denominator")
      ->capture_default_str();
  cmd->add_option("--p", backend.minkowski_p, "Minkowski order")->capture_default_str();
}

void print_report_summary(const std::string& label, const cdm::EvaluationReport& report) {
  std::cout << std::left << std::setw(28) << label << std::right << std::fixed
            << std::setprecision(3) << "  rmse " << std::setw(9) << report.rmse_m << "  mean "
            << std::setw(9) << report.mean_m << "  median " << std::setw(8) << report.median_m;
  if (report.success_rate) {
    std::cout << "  success " << std::setw(7) << *report.success_rate * 100.0 << "%";
  }
  if (report.building_accuracy) {
    std::cout << "  building " << std::setw(7) << *report.building_accuracy * 100.0 << "%";
  }
  std::cout << "\n" << std::defaultfloat;
}

struct EvaluateArgs {
  DataOptions data;
  BackendOptions backend;
  PositioningArgs positioning;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  const fs::path out_dir = ensure_out_dir(args.out);
  const PreparedData prepared = prepare_data(args.data, true);
  const cdm::ReferenceFingerprintMap rfm = cdm::to_reference_map(prepared.train);
  const auto validation = cdm::to_reference_map(prepared.validation);

  const auto backend = make_backend(args.backend, prepared.manifest.sentinel);
  const cdm::EvaluationRun run =
      cdm::evaluate_backend(validation.records(), rfm, backend, args.positioning.k,
                            args.positioning.hierarchical, stage_k(args.positioning));

  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"data", data_config_json(args.data, prepared, true)},
                       {"backend", backend_config_json(args.backend, prepared.manifest.sentinel)},
                       {"positioning", positioning_config_json(args.positioning)},
                       {"out", args.out}};
  doc["report"] = cdm::report_to_json(run.report);
  doc["report"]["n_skipped_empty"] = run.n_skipped_empty;
  write_json(out_dir / "report.json", doc);
  cdm::atomic_write_file(out_dir / "samples.csv", cdm::samples_csv(run.outcomes));

  print_report_summary(args.backend.variant + ":" + args.backend.kernel, run.report);
  std::cout << "wrote " << (out_dir / "report.json").string() << "\n";
  return 0;
}

struct TuneArgs {
  DataOptions data;
  BackendOptions backend;
  int k = 1;
  int folds = 10;
  std::string grid = "0:3:0.1";
  std::string criterion = "rmse";
  std::string out;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  const auto snap = [](double v) { return std::llround(v * 1e9) / 1e9; };
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0) {
      throw std::invalid_argument("grid '" + text + "': expected start:stop:step");
    }
    const int n = static_cast<int>(std::llround((stop - start) / step));
    for (int i = 0; i <= n; ++i) grid.push_back(snap(start + i * step));
  } else {
    std::string cell;
    for (char c : text + ",") {
      if (c == ',') {
        if (!cell.empty()) grid.push_back(std::stod(cell));
        cell.clear();
      } else {
        cell += c;
      }
    }
  }
  return grid;
}

int run_tune(const TuneArgs& args) {
  if (args.backend.variant == "baseline") {
    throw cdm::ConfigError("tune: the alpha grid search needs a compound variant");
  }
  const fs::path out_dir = ensure_out_dir(args.out);
  const PreparedData prepared = prepare_data(args.data, false);
  const cdm::ReferenceFingerprintMap rfm = cdm::to_reference_map(prepared.train);

  cdm::TuningSpec spec;
  spec.folds = args.folds;
  spec.grid = parse_grid(args.grid);
  spec.criterion = cdm::parse_criterion(args.criterion);
  spec.seed = args.data.seed;
  spec.k = args.k;
  cdm::CompoundConfig base;
  base.variant = cdm::parse_variant(args.backend.variant);
  base.kernel = make_kernel(args.backend.kernel, args.backend.minkowski_p);
  base.gamma = args.backend.gamma.value_or(prepared.manifest.sentinel);
  base.epsilon = args.backend.epsilon;
  spec.base = base;

  const cdm::TuningResult result = cdm::cross_validate_alpha(rfm, spec);

  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"data", data_config_json(args.data, prepared, false)},
                       {"backend", backend_config_json(args.backend, prepared.manifest.sentinel)},
                       {"k", args.k},
                       {"folds", args.folds},
                       {"grid", spec.grid},
                       {"criterion", args.criterion},
                       {"out", args.out}};
  doc["result"] = cdm::tuning_result_to_json(result);
  write_json(out_dir / "tuning.json", doc);
  cdm::atomic_write_file(out_dir / "tuning.csv", cdm::tuning_long_csv(result));

  std::cout << "best alpha " << cdm::format_double(result.best_alpha) << "  ("
            << args.criterion << " " << cdm::format_double(result.best_score) << ")\n"
            << "wrote " << (out_dir / "tuning.json").string() << "\n";
  return 0;
}

struct MultiBackendArgs {
  DataOptions data;
  BackendOptions defaults;
  PositioningArgs positioning;
  std::vector<std::string> backend_specs;
  std::string out;
};

int run_compare(const MultiBackendArgs& args) {
  if (args.backend_specs.size() < 2) {
    throw std::invalid_argument("compare: need at least two --backend specs");
  }
  const fs::path out_dir = ensure_out_dir(args.out);
  const PreparedData prepared = prepare_data(args.data, true);
  const cdm::ReferenceFingerprintMap rfm = cdm::to_reference_map(prepared.train);
  const auto validation = cdm::to_reference_map(prepared.validation);

  json backends = json::object();
  std::vector<std::pair<std::string, cdm::EvaluationReport>> reports;
  for (const std::string& spec : args.backend_specs) {
    const BackendOptions opt = parse_backend_spec(spec, args.defaults);
    const auto backend = make_backend(opt, prepared.manifest.sentinel);
    const cdm::EvaluationRun run =
        cdm::evaluate_backend(validation.records(), rfm, backend, args.positioning.k,
                              args.positioning.hierarchical, stage_k(args.positioning));
    json entry;
    entry["backend"] = backend_config_json(opt, prepared.manifest.sentinel);
    entry["report"] = cdm::report_to_json(run.report);
    backends[spec] = entry;
    reports.emplace_back(spec, run.report);
    print_report_summary(spec, run.report);
  }

  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"data", data_config_json(args.data, prepared, true)},
                       {"positioning", positioning_config_json(args.positioning)},
                       {"labels", args.backend_specs},
                       {"out", args.out}};
  doc["backends"] = backends;
  write_json(out_dir / "comparison.json", doc);

  std::vector<std::string> header{"metric"};
  for (const auto& [label, report] : reports) header.push_back(label);
  cdm::CsvBuilder csv(header);
  const auto row = [&](const std::string& name, auto getter) {
    std::vector<std::string> cells{name};
    for (const auto& [label, report] : reports) cells.push_back(getter(report));
    csv.append_row(cells);
  };
  const auto opt_pct = [](const std::optional<double>& v) {
    return v ? cdm::format_double(*v) : std::string();
  };
  row("rmse_m", [](const auto& r) { return cdm::format_double(r.rmse_m); });
  row("mean_m", [](const auto& r) { return cdm::format_double(r.mean_m); });
  row("std_m", [](const auto& r) { return cdm::format_double(r.std_m); });
  row("median_m", [](const auto& r) { return cdm::format_double(r.median_m); });
  row("p80_m", [](const auto& r) { return cdm::format_double(r.percentiles[1].second); });
  row("success_rate", [&](const auto& r) { return opt_pct(r.success_rate); });
  row("building_accuracy", [&](const auto& r) { return opt_pct(r.building_accuracy); });
  row("max_error_m", [](const auto& r) { return cdm::format_double(r.ecdf.back().first); });
  row("n_samples", [](const auto& r) { return std::to_string(r.n_samples); });
  csv.write(out_dir / "comparison.csv");

  std::cout << "wrote " << (out_dir / "comparison.json").string() << "\n";
  return 0;
}

int run_ecdf(const MultiBackendArgs& args) {
  if (args.backend_specs.empty()) {
    throw std::invalid_argument("ecdf: need at least one --backend spec");
  }
  const fs::path out_dir = ensure_out_dir(args.out);
  const PreparedData prepared = prepare_data(args.data, true);
  const cdm::ReferenceFingerprintMap rfm = cdm::to_reference_map(prepared.train);
  const auto validation = cdm::to_reference_map(prepared.validation);

  json files = json::object();
  for (const std::string& spec : args.backend_specs) {
    const BackendOptions opt = parse_backend_spec(spec, args.defaults);
    const auto backend = make_backend(opt, prepared.manifest.sentinel);
    const cdm::EvaluationRun run =
        cdm::evaluate_backend(validation.records(), rfm, backend, args.positioning.k,
                              args.positioning.hierarchical, stage_k(args.positioning));
    const std::string filename = "ecdf_" + sanitize_label(spec) + ".csv";
    cdm::atomic_write_file(out_dir / filename, cdm::ecdf_csv(run.report.ecdf));
    files[spec] = filename;
    std::cout << spec << ": max error " << cdm::format_double(run.report.ecdf.back().first)
              << ", wrote " << filename << "\n";
  }

  json doc;
  doc["meta"] = make_meta();
  doc["config"] = json{{"data", data_config_json(args.data, prepared, true)},
                       {"positioning", positioning_config_json(args.positioning)},
                       {"labels", args.backend_specs},
                       {"out", args.out}};
  doc["files"] = files;
  write_json(out_dir / "ecdf.json", doc);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compound dissimilarity measures for sparse fingerprints, with a kNN "
               "positioning and evaluation harness"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "",
                 "INI/TOML config mirroring the flags, one [section] per subcommand; "
                 "command-line flags override file values");
  app.require_subcommand(1);

  CleanArgs clean_args;
  CLI::App* clean = app.add_subcommand(
      "clean", "Remove all-missing records and collapse replica measurements");
  add_data_options(clean, clean_args.data, false);
  clean->add_option("--window", clean_args.window_seconds,
                    "Replica time window in seconds")->capture_default_str();
  clean->add_flag("--no-dedup", clean_args.no_dedup, "Skip replica deduplication");
  clean->add_option("--out", clean_args.out, "Output directory")->required();

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand("split", "Seeded train/validation split");
  add_data_options(split, split_args.data, false);
  split->add_option("--fraction", split_args.fraction, "Training share")->capture_default_str();
  split->add_option("--out", split_args.out, "Output directory")->required();

  TuneArgs tune_args;
  CLI::App* tune = app.add_subcommand(
      "tune", "k-fold cross-validated grid search over the alpha regularizer");
  add_data_options(tune, tune_args.data, false);
  add_backend_options(tune, tune_args.backend);
  tune->add_option("--k", tune_args.k, "Neighbor count")->capture_default_str();
  tune->add_option("--folds", tune_args.folds, "Fold count")->capture_default_str();
  tune->add_option("--grid", tune_args.grid, "Alpha grid: start:stop:step or v1,v2,...")
      ->capture_default_str();
  tune->add_option("--criterion", tune_args.criterion, "rmse | success")->capture_default_str();
  tune->add_option("--out", tune_args.out, "Output directory")->required();

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Position every validation sample and report error statistics");
  add_data_options(evaluate, evaluate_args.data, true);
  add_backend_options(evaluate, evaluate_args.backend);
  add_positioning_options(evaluate, evaluate_args.positioning);
  evaluate->add_option("--out", evaluate_args.out, "Output directory")->required();

  MultiBackendArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Evaluate several backends side by side into one table");
  add_data_options(compare, compare_args.data, true);
  add_backend_options(compare, compare_args.defaults);
  add_positioning_options(compare, compare_args.positioning);
  compare->add_option("--backend", compare_args.backend_specs,
                      "Backend spec variant:kernel[:key=value...] (repeatable)")
      ->required();
  compare->add_option("--out", compare_args.out, "Output directory")->required();

  MultiBackendArgs ecdf_args;
  CLI::App* ecdf = app.add_subcommand("ecdf", "Emit plot-ready ECDF CSVs per backend");
  add_data_options(ecdf, ecdf_args.data, true);
  add_backend_options(ecdf, ecdf_args.defaults);
  add_positioning_options(ecdf, ecdf_args.positioning);
  ecdf->add_option("--backend", ecdf_args.backend_specs,
                   "Backend spec variant:kernel[:key=value...] (repeatable)")
      ->required();
  ecdf->add_option("--out", ecdf_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (clean->parsed()) return run_clean(clean_args);
    if (split->parsed()) return run_split(split_args);
    if (tune->parsed()) return run_tune(tune_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    if (compare->parsed()) return run_compare(compare_args);
    if (ecdf->parsed()) return run_ecdf(ecdf_args);
  } catch (const cdm::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const cdm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
