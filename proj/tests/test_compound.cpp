#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cdm/compound.hpp"
#include "cdm/kernels.hpp"
#include "cdm/rng.hpp"
#include "support/synthetic.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cdm::CompoundConfig;
using cdm::Fingerprint;
using cdm::Kernel;
using cdm::Variant;
using testsupport::fp;

namespace {

CompoundConfig config(Variant v, Kernel k, double alpha = 1.0, double gamma = -110.0,
                      double epsilon = 1e-6, double p = 2.0) {
  CompoundConfig cfg;
  cfg.variant = v;
  cfg.kernel = {k, p};
  cfg.alpha = alpha;
  cfg.gamma = gamma;
  cfg.epsilon = epsilon;
  return cfg;
}

// The worked pair used throughout: shared attribute a (5 apart), one
// exclusive attribute on each side (50 and 40 from gamma = -110).
const Fingerprint kLeft = fp({{"a", -50}, {"b", -60}});
const Fingerprint kRight = fp({{"a", -55}, {"c", -70}});

} // namespace

TEST_CASE("cdm on the worked pair") {
  CHECK(cdm::cdm(kLeft, kRight, config(Variant::Cdm, Kernel::CityBlock)) == 95.0);

  const double lorentzian_expected = std::log(6.0) + std::log(51.0) + std::log(41.0);
  CHECK_THAT(cdm::cdm(kLeft, kRight, config(Variant::Cdm, Kernel::Lorentzian)),
             WithinRel(lorentzian_expected, 1e-14));
  CHECK_THAT(cdm::cdm(kLeft, kRight, config(Variant::Cdm, Kernel::Lorentzian)),
             WithinAbs(9.437157, 1e-6));

  const double half_alpha = std::log(6.0) + 0.5 * (std::log(51.0) + std::log(41.0));
  CHECK_THAT(cdm::cdm(kLeft, kRight, config(Variant::Cdm, Kernel::Lorentzian, 0.5)),
             WithinRel(half_alpha, 1e-14));
  CHECK_THAT(cdm::cdm(kLeft, kRight, config(Variant::Cdm, Kernel::Lorentzian, 0.5)),
             WithinAbs(5.614458, 1e-6));

  for (Kernel k : cdm::kAllKernels) {
    CAPTURE(cdm::kernel_name(k));
    CHECK(cdm::cdm(kLeft, kLeft, config(Variant::Cdm, k)) == 0.0);
  }
}

TEST_CASE("acdm divides the accumulated sum by the attribute union") {
  CHECK_THAT(acdm(kLeft, kRight, config(Variant::Acdm, Kernel::CityBlock)),
             WithinRel(95.0 / 3.0, 1e-12));
  CHECK_THAT(acdm(kLeft, kRight, config(Variant::Acdm, Kernel::CityBlock)),
             WithinAbs(31.6667, 1e-4));
  CHECK_THAT(acdm(kLeft, kRight, config(Variant::Acdm, Kernel::Lorentzian)),
             WithinAbs(3.145719, 1e-6));
  CHECK(acdm(kLeft, kLeft, config(Variant::Acdm, Kernel::CityBlock)) == 0.0);
}

TEST_CASE("rcdm weighs unshared sides by their relative cardinality") {
  const double expected = 5.0 + 90.0 / (1.0 + 1e-6);
  CHECK_THAT(rcdm(kLeft, kRight, config(Variant::Rcdm, Kernel::CityBlock)),
             WithinRel(expected, 1e-9));
  CHECK(rcdm(kLeft, kLeft, config(Variant::Rcdm, Kernel::CityBlock)) == 0.0);

  // no shared attributes at all: the epsilon guard produces a large value
  const Fingerprint only_a = fp({{"a", -50}});
  const Fingerprint only_b = fp({{"b", -60}});
  CHECK_THAT(rcdm(only_a, only_b, config(Variant::Rcdm, Kernel::CityBlock)),
             WithinRel(1.1e8, 1e-9));
}

TEST_CASE("dissimilarity dispatches on the variant") {
  CHECK(dissimilarity(kLeft, kRight, config(Variant::Cdm, Kernel::CityBlock)) == 95.0);
  CHECK_THAT(dissimilarity(kLeft, kRight, config(Variant::Acdm, Kernel::CityBlock)),
             WithinRel(95.0 / 3.0, 1e-12));
  CHECK_THAT(dissimilarity(kLeft, kRight, config(Variant::Rcdm, Kernel::CityBlock)),
             WithinRel(5.0 + 90.0 / (1.0 + 1e-6), 1e-9));
}

TEST_CASE("two empty fingerprints compare as zero under every variant") {
  for (Variant v : {Variant::Cdm, Variant::Acdm, Variant::Rcdm}) {
    for (Kernel k : cdm::kAllKernels) {
      CHECK(dissimilarity(Fingerprint(), Fingerprint(), config(v, k)) == 0.0);
    }
  }
}

TEST_CASE("compound measures are symmetric, non-negative and self-zero") {
  cdm::SplitMix64 rng(2024);
  const auto pool = testsupport::id_pool(10);
  for (int trial = 0; trial < 150; ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const double alpha = static_cast<double>(rng.below(30)) / 10.0;
    for (Variant v : {Variant::Cdm, Variant::Acdm, Variant::Rcdm}) {
      for (Kernel k : cdm::kAllKernels) {
        CAPTURE(trial, cdm::kernel_name(k), cdm::variant_name(v));
        const CompoundConfig cfg = config(v, k, alpha, 100.0);
        const double dab = dissimilarity(a, b, cfg);
        CHECK(dab >= 0.0);
        CHECK(dab == dissimilarity(b, a, cfg));
        CHECK(dissimilarity(a, a, cfg) == 0.0);
      }
    }
  }
}

TEST_CASE("hamming and jaccard kernels coincide under every variant") {
  cdm::SplitMix64 rng(5150);
  const auto pool = testsupport::id_pool(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const double alpha = static_cast<double>(rng.below(30)) / 10.0;
    for (Variant v : {Variant::Cdm, Variant::Acdm, Variant::Rcdm}) {
      CHECK(dissimilarity(a, b, config(v, Kernel::Hamming, alpha, 100.0)) ==
            dissimilarity(a, b, config(v, Kernel::Jaccard, alpha, 100.0)));
    }
  }
}

TEST_CASE("cdm with alpha=1 equals the vector metric over the gamma-filled union") {
  cdm::SplitMix64 rng(777);
  const auto pool = testsupport::id_pool(10);
  const Kernel additive[] = {Kernel::Lorentzian, Kernel::CityBlock, Kernel::WaveHedges,
                             Kernel::Canberra};
  for (int trial = 0; trial < 500; ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    std::vector<cdm::AttributeId> universe = shared_attributes(a, b);
    for (const auto& id : exclusive_attributes(a, b)) universe.push_back(id);
    for (const auto& id : exclusive_attributes(b, a)) universe.push_back(id);
    std::sort(universe.begin(), universe.end());
    const double gamma = 100.0;
    for (Kernel k : additive) {
      CAPTURE(trial, cdm::kernel_name(k));
      const double sparse = cdm::cdm(a, b, config(Variant::Cdm, k, 1.0, gamma));
      const double dense = cdm::vector_metric({k, 2.0}, densify(a, universe, gamma),
                                         densify(b, universe, gamma), gamma);
      CHECK_THAT(sparse, WithinRel(dense, 1e-12));
    }
  }
}

TEST_CASE("sparse/dense equivalence holds exhaustively over a small universe") {
  // every pair of observed-attribute subsets of a four-id universe
  const std::vector<cdm::AttributeId> universe{"a", "b", "c", "d"};
  const double values_a[4] = {-50, -60, -70, -80};
  const double values_b[4] = {-55, -65, -33, -91};
  const double gamma = 100.0;
  const Kernel additive[] = {Kernel::Lorentzian, Kernel::CityBlock, Kernel::WaveHedges,
                             Kernel::Canberra};
  for (unsigned mask_a = 0; mask_a < 16; ++mask_a) {
    for (unsigned mask_b = 0; mask_b < 16; ++mask_b) {
      std::vector<Fingerprint::Entry> ea, eb;
      for (int bit = 0; bit < 4; ++bit) {
        if (mask_a & (1u << bit)) ea.emplace_back(universe[bit], values_a[bit]);
        if (mask_b & (1u << bit)) eb.emplace_back(universe[bit], values_b[bit]);
      }
      const Fingerprint a(std::move(ea)), b(std::move(eb));
      for (Kernel k : additive) {
        CAPTURE(mask_a, mask_b, cdm::kernel_name(k));
        const double sparse = cdm::cdm(a, b, config(Variant::Cdm, k, 1.0, gamma));
        const double dense = cdm::vector_metric({k, 2.0}, densify(a, universe, gamma),
                                                densify(b, universe, gamma), gamma);
        CHECK_THAT(sparse, WithinRel(dense, 1e-12));
      }
    }
  }
}

TEST_CASE("acdm is exactly cdm over the union size for identity-finalize kernels") {
  cdm::SplitMix64 rng(31337);
  const auto pool = testsupport::id_pool(8);
  const Kernel identity[] = {Kernel::Lorentzian, Kernel::Hamming, Kernel::Jaccard,
                             Kernel::WaveHedges, Kernel::Canberra, Kernel::CityBlock};
  for (int trial = 0; trial < 100; ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 6, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 6, -100, -30);
    std::size_t union_size = shared_attributes(a, b).size() +
                             exclusive_attributes(a, b).size() +
                             exclusive_attributes(b, a).size();
    for (Kernel k : identity) {
      const double whole = cdm::cdm(a, b, config(Variant::Cdm, k, 1.0, 100.0));
      const double averaged = acdm(a, b, config(Variant::Acdm, k, 1.0, 100.0));
      CHECK(averaged == whole / static_cast<double>(union_size));
    }
  }
}

TEST_CASE("cdm and rcdm are non-decreasing in alpha") {
  cdm::SplitMix64 rng(4242);
  const auto pool = testsupport::id_pool(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Fingerprint a = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    const Fingerprint b = testsupport::random_fingerprint(rng, pool, 8, -100, -30);
    for (Kernel k : cdm::kAllKernels) {
      double prev_cdm = -1.0, prev_rcdm = -1.0;
      for (double alpha : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0}) {
        const double vc = cdm::cdm(a, b, config(Variant::Cdm, k, alpha, 100.0));
        const double vr = rcdm(a, b, config(Variant::Rcdm, k, alpha, 100.0));
        CHECK(vc >= prev_cdm);
        CHECK(vr >= prev_rcdm);
        prev_cdm = vc;
        prev_rcdm = vr;
      }
    }
  }
}

TEST_CASE("config validation rejects out-of-domain hyperparameters") {
  CompoundConfig cfg;
  cfg.alpha = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = CompoundConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = CompoundConfig{};
  cfg.kernel.minkowski_p = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(CompoundConfig{}.epsilon == 1e-6);
}
