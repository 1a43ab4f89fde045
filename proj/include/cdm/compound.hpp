#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cdm/fingerprint.hpp"
#include "cdm/kernels.hpp"

namespace cdm {

enum class Variant { Cdm, Acdm, Rcdm };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Cdm: return "cdm";
    case Variant::Acdm: return "acdm";
    case Variant::Rcdm: return "rcdm";
  }
  throw std::logic_error("unknown variant");
}

inline Variant parse_variant(std::string_view name) {
  if (name == "cdm") return Variant::Cdm;
  if (name == "acdm") return Variant::Acdm;
  if (name == "rcdm") return Variant::Rcdm;
  throw std::invalid_argument("unknown variant: " + std::string(name));
}

/// Measure variant plus its hyperparameters: the regularization weight alpha
/// on mutually unshared attributes, the missing-value stand-in gamma, and the
/// epsilon guarding the relative weights' denominator.
struct CompoundConfig {
  Variant variant = Variant::Rcdm;
  KernelId kernel{};
  double alpha = 1.0;
  double gamma = 100.0;
  double epsilon = 1e-6;

  void validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(kernel.minkowski_p > 0.0)) throw std::invalid_argument("minkowski p must be > 0");
  }
};

namespace detail {

/// One merge pass over two sorted entry lists, splitting the kernel-term
/// mass into shared / a-only / b-only parts. Unshared values pair with gamma.
struct PartSums {
  double shared = 0.0;
  double a_only = 0.0;
  double b_only = 0.0;
  std::size_t n_shared = 0;
  std::size_t n_a_only = 0;
  std::size_t n_b_only = 0;
};

inline PartSums accumulate_parts(const Fingerprint& a, const Fingerprint& b,
                                 const KernelId& kernel, double gamma) {
  PartSums sums;
  auto ia = a.entries().begin(), ea = a.entries().end();
  auto ib = b.entries().begin(), eb = b.entries().end();
  while (ia != ea || ib != eb) {
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      sums.a_only += pair_term(kernel, ia->second, gamma);
      ++sums.n_a_only;
      ++ia;
    } else if (ia == ea || ib->first < ia->first) {
      sums.b_only += pair_term(kernel, ib->second, gamma);
      ++sums.n_b_only;
      ++ib;
    } else {
      sums.shared += pair_term(kernel, ia->second, ib->second);
      ++sums.n_shared;
      ++ia;
      ++ib;
    }
  }
  return sums;
}

} // namespace detail

/// Basic compound measure: shared terms plus alpha-weighted unshared terms,
/// closed by the kernel's finalize.
inline double cdm(const Fingerprint& a, const Fingerprint& b, const CompoundConfig& cfg) {
  const auto sums = detail::accumulate_parts(a, b, cfg.kernel, cfg.gamma);
  const double s = sums.shared + cfg.alpha * (sums.a_only + sums.b_only);
  return finalize(cfg.kernel, s);
}

/// Average variant: the compound sum divided by the attribute-union size
/// before finalization. Two empty fingerprints compare as 0.
inline double acdm(const Fingerprint& a, const Fingerprint& b, const CompoundConfig& cfg) {
  const auto sums = detail::accumulate_parts(a, b, cfg.kernel, cfg.gamma);
  const std::size_t union_size = sums.n_shared + sums.n_a_only + sums.n_b_only;
  if (union_size == 0) return 0.0;
  const double s = sums.shared + cfg.alpha * (sums.a_only + sums.b_only);
  return finalize(cfg.kernel, s / static_cast<double>(union_size));
}

/// Relatively weighted variant: each unshared side is scaled by its own
/// cardinality over the shared cardinality (epsilon-guarded), so fingerprints
/// with little overlap compare as strongly dissimilar.
inline double rcdm(const Fingerprint& a, const Fingerprint& b, const CompoundConfig& cfg) {
  const auto sums = detail::accumulate_parts(a, b, cfg.kernel, cfg.gamma);
  const double denom = static_cast<double>(sums.n_shared) + cfg.epsilon;
  const double w_a = static_cast<double>(sums.n_a_only) / denom;
  const double w_b = static_cast<double>(sums.n_b_only) / denom;
  const double s = sums.shared + cfg.alpha * (w_a * sums.a_only + w_b * sums.b_only);
  return finalize(cfg.kernel, s);
}

/// Variant dispatcher.
inline double dissimilarity(const Fingerprint& a, const Fingerprint& b,
                            const CompoundConfig& cfg) {
  switch (cfg.variant) {
    case Variant::Cdm: return cdm(a, b, cfg);
    case Variant::Acdm: return acdm(a, b, cfg);
    case Variant::Rcdm: return rcdm(a, b, cfg);
  }
  throw std::logic_error("unknown variant");
}

} // namespace cdm
