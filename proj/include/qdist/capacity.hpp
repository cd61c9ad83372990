#pragma once

// Secret-key capacity of Werner pairs and its additive ensemble extension.

#include <cmath>
#include <span>

#include "qdist/error.hpp"

namespace qdist {

struct EnsembleEntry {
  double fidelity = 0.0;
  double rate = 0.0;  // pairs/s
};

inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary_entropy: argument outside [0, 1]");
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

struct CapacityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds for a depolarizing channel with p = 4(1 - F)/3, so 3p/4 = 1 - F.
inline CapacityBounds pair_capacity_bounds(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("pair_capacity: fidelity outside [0, 1]");
  const double q = 1.0 - f;
  const double k = 1.0 - binary_entropy(q);
  return {k - q * std::log2(3.0), k};
}

// Bits per pair, clamped at zero below the distillation threshold (~0.8107).
inline double pair_capacity(double f) {
  const double lo = pair_capacity_bounds(f).lower;
  return lo > 0.0 ? lo : 0.0;
}

inline double ensemble_capacity(std::span<const EnsembleEntry> entries) {
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.rate >= 0.0)) throw DomainError("ensemble_capacity: negative rate");
    total += e.rate * pair_capacity(e.fidelity);
  }
  return total;
}

}  // namespace qdist
