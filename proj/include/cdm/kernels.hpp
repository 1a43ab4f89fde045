#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cdm {

enum class Kernel {
  Lorentzian,
  Hamming,
  Jaccard,
  WaveHedges,
  Canberra,
  Clark,
  CityBlock,
  Minkowski,
};

/// Distance kernel selector; Minkowski carries its order p (> 0, default 2).
struct KernelId {
  Kernel kind = Kernel::CityBlock;
  double minkowski_p = 2.0;
};

inline constexpr Kernel kAllKernels[] = {
    Kernel::Lorentzian, Kernel::Hamming, Kernel::Jaccard,    Kernel::WaveHedges,
    Kernel::Canberra,   Kernel::Clark,   Kernel::CityBlock,  Kernel::Minkowski,
};

inline std::string kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Lorentzian: return "lorentzian";
    case Kernel::Hamming: return "hamming";
    case Kernel::Jaccard: return "jaccard";
    case Kernel::WaveHedges: return "wavehedges";
    case Kernel::Canberra: return "canberra";
    case Kernel::Clark: return "clark";
    case Kernel::CityBlock: return "cityblock";
    case Kernel::Minkowski: return "minkowski";
  }
  throw std::logic_error("unknown kernel");
}

inline Kernel parse_kernel(std::string_view name) {
  for (Kernel k : kAllKernels) {
    if (kernel_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown kernel: " + std::string(name));
}

namespace detail {
inline void require_finite(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw std::domain_error("kernel arguments must be finite");
  }
}
} // namespace detail

/// Per-pair term of the kernel's sum. Ratio kernels (Wave Hedges, Canberra,
/// Clark) define the 0/0 form as 0; the denominators can vanish only when
/// x == y == 0.
inline double pair_term(const KernelId& kernel, double x, double y) {
  detail::require_finite(x, y);
  const double diff = std::abs(x - y);
  switch (kernel.kind) {
    case Kernel::Lorentzian:
      return diff == 0.0 ? 0.0 : std::log1p(diff);
    case Kernel::Hamming:
    case Kernel::Jaccard:
      return x != y ? 1.0 : 0.0;
    case Kernel::WaveHedges: {
      if (diff == 0.0) return 0.0;
      return diff / std::max(std::abs(x), std::abs(y));
    }
    case Kernel::Canberra: {
      if (diff == 0.0) return 0.0;
      return diff / (std::abs(x) + std::abs(y));
    }
    case Kernel::Clark: {
      if (diff == 0.0) return 0.0;
      const double ratio = diff / (std::abs(x) + std::abs(y));
      return ratio * ratio;
    }
    case Kernel::CityBlock:
      return diff;
    case Kernel::Minkowski:
      if (kernel.minkowski_p == 2.0) return diff * diff;
      return std::pow(diff, kernel.minkowski_p);
  }
  throw std::logic_error("unknown kernel");
}

/// Monotone closing transform over an accumulated sum of pair terms:
/// Clark's outer square root, Minkowski's p-th root, identity otherwise.
inline double finalize(const KernelId& kernel, double s) {
  switch (kernel.kind) {
    case Kernel::Clark:
      return std::sqrt(s);
    case Kernel::Minkowski:
      return std::pow(s, 1.0 / kernel.minkowski_p);
    default:
      return s;
  }
}

/// Whole-vector metric in its textbook form; the baseline path where
/// fingerprints have been gamma-filled to the universe dimension. Hamming
/// normalizes by the dimension; Jaccard counts only positions where at least
/// one side is observed (!= gamma), 0 when no position qualifies.
inline double vector_metric(const KernelId& kernel, std::span<const double> x,
                            std::span<const double> y, double gamma) {
  if (x.size() != y.size()) throw std::domain_error("vector_metric: length mismatch");
  const std::size_t d = x.size();
  if (d == 0) throw std::domain_error("vector_metric: empty vectors");

  switch (kernel.kind) {
    case Kernel::Hamming: {
      std::size_t mismatches = 0;
      for (std::size_t i = 0; i < d; ++i) {
        detail::require_finite(x[i], y[i]);
        if (x[i] != y[i]) ++mismatches;
      }
      return static_cast<double>(mismatches) / static_cast<double>(d);
    }
    case Kernel::Jaccard: {
      std::size_t numer = 0, denom = 0;
      for (std::size_t i = 0; i < d; ++i) {
        detail::require_finite(x[i], y[i]);
        const bool observed = x[i] != gamma || y[i] != gamma;
        if (observed) {
          ++denom;
          if (x[i] != y[i]) ++numer;
        }
      }
      if (denom == 0) return 0.0;
      return static_cast<double>(numer) / static_cast<double>(denom);
    }
    default: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += pair_term(kernel, x[i], y[i]);
      return finalize(kernel, s);
    }
  }
}

} // namespace cdm
