#pragma once

// Closed-form Werner-state models for entanglement swapping and purification.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "qdist/error.hpp"

namespace qdist {

struct NoiseParams {
  double p1 = 0.995;   // single-qubit gate reliability
  double p2 = 0.995;   // two-qubit gate reliability
  double eta = 0.995;  // measurement accuracy
  double f0 = 0.98;    // default generated-pair fidelity

  static NoiseParams perfect(double f0 = 0.98) { return {1.0, 1.0, 1.0, f0}; }

  void validate() const {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!unit(p1) || !unit(p2) || !unit(eta)) throw DomainError("noise reliabilities must lie in [0, 1]");
    if (!(f0 > 0.5 && f0 <= 1.0)) throw DomainError("f0 must lie in (0.5, 1]");
  }

  bool operator==(const NoiseParams&) const = default;
};

enum class PurifyModel { AsPrinted, IdealDejmps };

inline std::string_view to_string(PurifyModel m) {
  return m == PurifyModel::AsPrinted ? "as-printed" : "ideal-dejmps";
}

inline PurifyModel parse_purify_model(std::string_view s) {
  if (s == "as-printed") return PurifyModel::AsPrinted;
  if (s == "ideal-dejmps") return PurifyModel::IdealDejmps;
  throw ConfigError("unknown purification model '" + std::string(s) + "'");
}

// Process-wide count of fidelity outputs that had to be clamped into [0, 1].
inline std::atomic<std::uint64_t>& fidelity_clamp_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

namespace detail {

constexpr double kFidelityFloor = 0.25;
constexpr double kDomainSlack = 1e-12;

inline double checked_fidelity(double f, const char* what) {
  if (!(f >= kFidelityFloor - kDomainSlack && f <= 1.0 + kDomainSlack))
    throw DomainError(std::string(what) + ": fidelity outside [0.25, 1]");
  return std::clamp(f, kFidelityFloor, 1.0);
}

// (4F - 1) / 3: the Werner parameter, multiplicative under swapping.
inline double werner(double f) { return (4.0 * f - 1.0) / 3.0; }

}  // namespace detail

// Depolarizing factor contributed by one Bell-state measurement.
inline double swap_noise_factor(const NoiseParams& n) {
  return n.p1 * n.p1 * n.p2 * (4.0 * n.eta * n.eta - 1.0) / 3.0;
}

inline double swap_fidelity(double f1, double f2, const NoiseParams& n) {
  f1 = detail::checked_fidelity(f1, "swap_fidelity");
  f2 = detail::checked_fidelity(f2, "swap_fidelity");
  return 0.25 * (1.0 + 3.0 * swap_noise_factor(n) * (detail::werner(f1) * detail::werner(f2)));
}

// N links joined by N - 1 swaps.
inline double chain_swap_fidelity(std::span<const double> fids, const NoiseParams& n) {
  if (fids.empty()) throw DomainError("chain_swap_fidelity: empty fidelity list");
  if (fids.size() == 1) return detail::checked_fidelity(fids[0], "chain_swap_fidelity");
  double w = std::pow(swap_noise_factor(n), static_cast<double>(fids.size() - 1));
  for (double f : fids) w *= detail::werner(detail::checked_fidelity(f, "chain_swap_fidelity"));
  return 0.25 * (1.0 + 3.0 * w);
}

inline double purify_success_prob(double f1, double f2, const NoiseParams& n) {
  f1 = detail::checked_fidelity(f1, "purify_success_prob");
  f2 = detail::checked_fidelity(f2, "purify_success_prob");
  const double m = 1.0 - 2.0 * n.eta;
  return (9.0 + (4.0 * f1 - 1.0) * (4.0 * f2 - 1.0) * m * m * n.p2 * n.p2) / 18.0;
}

// Unclamped retained-pair fidelity of the noisy closed form. At perfect inputs
// and perfect operations this evaluates to -1/12, so callers normally go
// through purify_output_fidelity, which clamps and reports.
inline double purify_output_fidelity_raw(double f1, double f2, const NoiseParams& n) {
  f1 = detail::checked_fidelity(f1, "purify_output_fidelity");
  f2 = detail::checked_fidelity(f2, "purify_output_fidelity");
  const double p = purify_success_prob(f1, f2, n);
  if (!(p > 0.0)) throw DomainError("purify_output_fidelity: zero success probability");
  const double e = n.eta;
  const double q = n.p2 * n.p2;
  const double num = 9.0 + q * ((1.0 - 8.0 * f2) - 8.0 * f1 * (6.0 * e * e + 6.0 * e - 1.0)) +
                     16.0 * q * f1 * f2 * (12.0 * e * e - 12.0 * e + 5.0);
  return num / (72.0 * p);
}

struct ClampedFidelity {
  double value = 0.0;
  double raw = 0.0;
  bool clamped = false;
};

inline ClampedFidelity purify_output_fidelity(double f1, double f2, const NoiseParams& n) {
  ClampedFidelity out;
  out.raw = purify_output_fidelity_raw(f1, f2, n);
  out.value = std::clamp(out.raw, 0.0, 1.0);
  out.clamped = out.value != out.raw;
  if (out.clamped) fidelity_clamp_counter().fetch_add(1, std::memory_order_relaxed);
  return out;
}

struct PurifyOutcome {
  double fidelity = 0.0;
  double probability = 0.0;
  bool clamped = false;
};

// Purification of two Werner pairs under perfect gates and measurements.
inline PurifyOutcome ideal_dejmps(double f1, double f2) {
  f1 = detail::checked_fidelity(f1, "ideal_dejmps");
  f2 = detail::checked_fidelity(f2, "ideal_dejmps");
  const double g1 = 1.0 - f1, g2 = 1.0 - f2;
  const double p = f1 * f2 + f1 * g2 / 3.0 + f2 * g1 / 3.0 + 5.0 * g1 * g2 / 9.0;
  const double f = (f1 * f2 + g1 * g2 / 9.0) / p;
  PurifyOutcome out{std::clamp(f, 0.0, 1.0), std::clamp(p, 0.0, 1.0), false};
  if (out.fidelity != f) {
    out.clamped = true;
    fidelity_clamp_counter().fetch_add(1, std::memory_order_relaxed);
  }
  return out;
}

inline PurifyOutcome purify(double f1, double f2, const NoiseParams& n, PurifyModel model) {
  if (model == PurifyModel::IdealDejmps) return ideal_dejmps(f1, f2);
  auto f = purify_output_fidelity(f1, f2, n);
  return {f.value, purify_success_prob(f1, f2, n), f.clamped};
}

}  // namespace qdist
