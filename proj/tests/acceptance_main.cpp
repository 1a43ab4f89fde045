// Acceptance suite: exercises the measure kernels, the compound/vector
// equivalences, ranking invariances, CV wiring on synthetic oracles, and CLI
// determinism. Prints one PASS/FAIL line per criterion; exits nonzero when
// any criterion fails. The criteria needing the real multi-building dataset
// live in the companion dataset binary.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdm/compound.hpp"
#include "cdm/dataset.hpp"
#include "cdm/evaluation.hpp"
#include "cdm/positioning.hpp"
#include "cdm/rng.hpp"
#include "cdm/tuning.hpp"
#include "support/synthetic.hpp"

using cdm::CompoundConfig;
using cdm::Fingerprint;
using cdm::Kernel;
using cdm::Variant;
using nlohmann::json;
using testsupport::fp;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

bool within_rel(double value, double expected, double tol) {
  return std::abs(value - expected) <= tol * std::max(std::abs(value), std::abs(expected));
}

CompoundConfig config(Variant v, Kernel k, double alpha, double gamma, double eps = 1e-6) {
  CompoundConfig cfg;
  cfg.variant = v;
  cfg.kernel = {k, 2.0};
  cfg.alpha = alpha;
  cfg.gamma = gamma;
  cfg.epsilon = eps;
  return cfg;
}

// --------------------------------------------------------------------------
// 1. Worked-example exactness.

void criterion_1() {
  const Fingerprint left = fp({{"a", -50}, {"b", -60}});
  const Fingerprint right = fp({{"a", -55}, {"c", -70}});
  bool ok = true;
  std::string detail;

  const double cb = cdm::cdm(left, right, config(Variant::Cdm, Kernel::CityBlock, 1.0, -110.0));
  ok &= within_rel(cb, 95.0, 1e-9);

  const double av = acdm(left, right, config(Variant::Acdm, Kernel::CityBlock, 1.0, -110.0));
  ok &= within_rel(av, 95.0 / 3.0, 1e-9);

  const double rel = rcdm(left, right, config(Variant::Rcdm, Kernel::CityBlock, 1.0, -110.0));
  ok &= within_rel(rel, 5.0 + 90.0 / (1.0 + 1e-6), 1e-9);

  const double lor = cdm::cdm(left, right, config(Variant::Cdm, Kernel::Lorentzian, 1.0, -110.0));
  ok &= std::abs(lor - 9.437157) <= 1e-6;

  if (!ok) {
    detail = "cityblock=" + std::to_string(cb) + " acdm=" + std::to_string(av) +
             " rcdm=" + std::to_string(rel) + " lorentzian=" + std::to_string(lor);
  }
  report(1, "worked-example exactness", ok, detail);
}

// --------------------------------------------------------------------------
// 2. Vector-oracle equivalence over a randomized corpus.
// 3. Hamming == Jaccard under every variant on the same corpus.

void criteria_2_and_3() {
  cdm::SplitMix64 rng(20260809);
  const auto pool = testsupport::id_pool(10);
  const double gamma = 100.0;
  const Kernel additive[] = {Kernel::Lorentzian, Kernel::CityBlock, Kernel::WaveHedges,
                             Kernel::Canberra};

  bool equivalence_ok = true;
  bool ham_jac_ok = true;
  std::string detail2, detail3;
  const int trials = 10000;
  for (int trial = 0; trial < trials && (equivalence_ok || ham_jac_ok); ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 8, -100, -30);

    std::vector<cdm::AttributeId> universe;
    for (const auto& [id, v] : a.entries()) universe.push_back(id);
    for (const auto& [id, v] : b.entries()) universe.push_back(id);
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    for (Kernel k : additive) {
      const double sparse = cdm::cdm(a, b, config(Variant::Cdm, k, 1.0, gamma));
      const double dense = cdm::vector_metric({k, 2.0}, densify(a, universe, gamma),
                                         densify(b, universe, gamma), gamma);
      if (!within_rel(sparse, dense, 1e-12)) {
        equivalence_ok = false;
        detail2 = "trial " + std::to_string(trial) + " kernel " + cdm::kernel_name(k);
        break;
      }
    }

    const double alpha = static_cast<double>(rng.below(30)) / 10.0;
    for (Variant v : {Variant::Cdm, Variant::Acdm, Variant::Rcdm}) {
      const double ham = dissimilarity(a, b, config(v, Kernel::Hamming, alpha, gamma));
      const double jac = dissimilarity(a, b, config(v, Kernel::Jaccard, alpha, gamma));
      if (ham != jac) {
        ham_jac_ok = false;
        detail3 = "trial " + std::to_string(trial) + " variant " + cdm::variant_name(v);
        break;
      }
    }
  }
  report(2, "vector-oracle equivalence on 10000 randomized pairs", equivalence_ok, detail2);
  report(3, "hamming/jaccard kernel equality under all variants", ham_jac_ok, detail3);
}

// --------------------------------------------------------------------------
// 4. Finalization never changes neighbor sets for Clark and Minkowski.

void criterion_4() {
  cdm::SplitMix64 rng(440044);
  const auto pool = testsupport::id_pool(12);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 60 && ok; ++trial) {
    const std::size_t n = 5 + rng.below(46);   // N <= 50
    std::vector<cdm::ReferenceFingerprintMap::Record> records;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({testsupport::random_fingerprint(rng, pool, 8, -100, -30),
                         {std::nullopt, std::nullopt, static_cast<double>(rng.below(100)),
                          static_cast<double>(rng.below(100))}});
    }
    const cdm::ReferenceFingerprintMap rfm(std::move(records));
    const Fingerprint query = testsupport::random_fingerprint(rng, pool, 8, -100, -30);

    for (Kernel k : {Kernel::Clark, Kernel::Minkowski}) {
      const CompoundConfig cfg = config(Variant::Cdm, k, 1.0, 100.0);
      std::vector<std::pair<double, std::size_t>> raw;
      for (std::size_t i = 0; i < rfm.size(); ++i) {
        const auto sums =
            cdm::detail::accumulate_parts(query, rfm.records()[i].fingerprint, cfg.kernel, 100.0);
        raw.emplace_back(sums.shared + sums.a_only + sums.b_only, i);
      }
      std::sort(raw.begin(), raw.end());

      for (int k_neighbors = 1; k_neighbors <= 5; ++k_neighbors) {
        const auto ranked = rank_neighbors(query, rfm, cdm::DissimilarityBackend::compound(cfg),
                                           k_neighbors);
        for (int i = 0; i < k_neighbors; ++i) {
          if (ranked[static_cast<std::size_t>(i)].first != raw[static_cast<std::size_t>(i)].second) {
            ok = false;
            detail = "trial " + std::to_string(trial) + " kernel " + cdm::kernel_name(k) +
                     " k=" + std::to_string(k_neighbors);
          }
        }
      }
    }
  }
  report(4, "finalization ranking invariance (clark, minkowski)", ok, detail);
}

// --------------------------------------------------------------------------
// 8. CV sanity on synthetic oracles.
//
// Case A: every record carries four location-informative always-present
// attributes plus five pure-noise attributes with record-unique ids; weighting
// the unshared (noise) side can only hurt, so CV must pick alpha in the lower
// third of the grid.
//
// Case B: the always-present attributes are pure noise while per-cell beacon
// attributes (observed only at one cell) are the location evidence; beacon
// terms are small relative to the noise, so more weight on unshared
// attributes keeps helping across the grid and CV must land in the upper two
// thirds.

cdm::ReferenceFingerprintMap cv_case_a(std::uint64_t seed) {
  cdm::SplitMix64 rng(seed);
  std::vector<cdm::ReferenceFingerprintMap::Record> records;
  const double ap_xy[4][2] = {{0, 0}, {40, 0}, {0, 40}, {40, 40}};
  int serial = 0;
  for (int gx = 0; gx < 5; ++gx) {
    for (int gy = 0; gy < 5; ++gy) {
      for (int rep = 0; rep < 2; ++rep) {
        const double x = gx * 10.0, y = gy * 10.0;
        std::vector<Fingerprint::Entry> entries;
        for (int j = 0; j < 4; ++j) {
          const double dx = x - ap_xy[j][0], dy = y - ap_xy[j][1];
          const double noise = (static_cast<double>(rng.below(100)) / 100.0 - 0.5);
          entries.emplace_back("s" + std::to_string(j),
                               -30.0 - 1.2 * std::sqrt(dx * dx + dy * dy) + noise);
        }
        for (int j = 0; j < 5; ++j) {
          const double value = -90.0 + 60.0 * static_cast<double>(rng.below(1000)) / 1000.0;
          entries.emplace_back("n" + std::to_string(serial) + "_" + std::to_string(j), value);
        }
        records.push_back({Fingerprint(std::move(entries)),
                           {std::nullopt, std::nullopt, x, y}});
        ++serial;
      }
    }
  }
  return cdm::ReferenceFingerprintMap(std::move(records));
}

cdm::ReferenceFingerprintMap cv_case_b(std::uint64_t seed) {
  cdm::SplitMix64 rng(seed);
  std::vector<cdm::ReferenceFingerprintMap::Record> records;
  for (int gx = 0; gx < 5; ++gx) {
    for (int gy = 0; gy < 5; ++gy) {
      for (int rep = 0; rep < 3; ++rep) {
        const double x = gx * 10.0, y = gy * 10.0;
        std::vector<Fingerprint::Entry> entries;
        for (int j = 0; j < 2; ++j) {
          const double value = -70.0 + 40.0 * static_cast<double>(rng.below(1000)) / 1000.0;
          entries.emplace_back("s" + std::to_string(j), value);
        }
        const std::string cell = std::to_string(gx) + "_" + std::to_string(gy);
        entries.emplace_back("beacon" + cell + "a", -95.0);
        entries.emplace_back("beacon" + cell + "b", -95.0);
        records.push_back({Fingerprint(std::move(entries)),
                           {std::nullopt, std::nullopt, x, y}});
      }
    }
  }
  return cdm::ReferenceFingerprintMap(std::move(records));
}

void criterion_8() {
  cdm::TuningSpec spec;
  spec.folds = 10;
  spec.grid = cdm::default_alpha_grid();
  spec.criterion = cdm::TuningCriterion::MinMeanRmse;
  spec.seed = 17;
  spec.k = 1;
  CompoundConfig base;
  base.variant = Variant::Rcdm;
  base.kernel = {Kernel::CityBlock, 2.0};
  base.gamma = -100.0;
  spec.base = base;

  const auto noise_result = cdm::cross_validate_alpha(cv_case_a(1), spec);
  const auto informative_result = cdm::cross_validate_alpha(cv_case_b(2), spec);

  const double third = spec.grid[spec.grid.size() / 3];   // 1.0 on the default grid
  const bool noise_ok = noise_result.best_alpha < third;
  const bool informative_ok = informative_result.best_alpha >= third;
  report(8, "cv selects low alpha for noise, high alpha for informative unshared attributes",
         noise_ok && informative_ok,
         "noise best=" + cdm::format_double(noise_result.best_alpha) +
             ", informative best=" + cdm::format_double(informative_result.best_alpha));
}

// --------------------------------------------------------------------------
// 9. Determinism: identical config + seed => byte-identical data bodies.

std::string normalize_if_json(const std::filesystem::path& path) {
  if (path.extension() != ".json") return testsupport::read_file(path);
  std::ifstream in(path);
  json j;
  in >> j;
  j.erase("meta");   // the timestamp lives outside the data body
  return j.dump(2);
}

/// Data bodies of every file under an output directory, keyed by relative path.
std::map<std::string, std::string> snapshot_out_dir(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      out[std::filesystem::relative(entry.path(), dir).string()] =
          normalize_if_json(entry.path());
    }
  }
  return out;
}

void criterion_9() {
  if (testsupport::cli_path().empty()) {
    report(9, "determinism of every subcommand", false, "CDM_CLI not set");
    return;
  }
  const auto dir = testsupport::fresh_temp_dir("acceptance_determinism");
  testsupport::SyntheticWorldSpec spec;
  spec.n_invalid = 2;
  spec.replica_clusters = 3;
  spec.seed = 424242;
  const auto world = testsupport::make_synthetic_world(spec);
  const auto train_csv = dir / "train.csv";
  const auto manifest_json = dir / "manifest.json";
  testsupport::write_file(train_csv, world.csv);
  world.manifest.save(manifest_json);

  const std::string common =
      "--manifest " + manifest_json.string() + " --train " + train_csv.string() + " --seed 77 ";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"clean", "clean " + common},
      {"split", "split " + common + "--fraction 0.75 "},
      {"tune", "tune " + common + "--variant rcdm --kernel cityblock --grid 0:1:0.5 --folds 5 "},
      {"evaluate", "evaluate " + common + "--validation " + train_csv.string() +
                       " --variant rcdm --kernel lorentzian --alpha 0.5 --k 1 --hierarchical "},
      {"compare", "compare " + common + "--validation " + train_csv.string() +
                      " --backend rcdm:cityblock:alpha=0.5 --backend baseline:cityblock"
                      " --k 1 --hierarchical "},
      {"ecdf", "ecdf " + common + "--validation " + train_csv.string() +
                   " --backend rcdm:lorentzian:alpha=0.5 --k 1 --hierarchical "},
  };

  // identical config means identical --out too: snapshot, rerun in place,
  // compare the data bodies
  bool ok = true;
  std::string detail;
  for (const auto& [name, args] : commands) {
    const auto out = dir / (name + "_out");
    const std::string command = args + "--out " + out.string();
    const auto run_a = testsupport::run_cli(command, dir);
    const auto first = snapshot_out_dir(out);
    const auto run_b = testsupport::run_cli(command, dir);
    const auto second = snapshot_out_dir(out);
    if (run_a.exit_code != 0 || run_b.exit_code != 0) {
      ok = false;
      detail = name + " exited " + std::to_string(run_a.exit_code) + "/" +
               std::to_string(run_b.exit_code);
      break;
    }
    if (first.empty() || first != second) {
      ok = false;
      detail = name + ": output bodies differ between identical runs";
      break;
    }
  }
  report(9, "determinism of every subcommand", ok, detail);
}

} // namespace

int main() {
  criterion_1();
  criteria_2_and_3();
  criterion_4();
  criterion_8();
  criterion_9();

  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
