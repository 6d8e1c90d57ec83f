#pragma once

#include "mlmimo/classic.hpp"

namespace mlmimo {

inline constexpr int kMaxEnumerationDimension = 16;
inline constexpr double kMaxExhaustiveCandidates = 1e7;

// Global minimizer of ‖y − z·G‖² over all Mⁿ messages; ties go to the
// lexicographically smallest z. Throws SearchSpaceTooLarge beyond 10⁷ candidates.
DetectionResult exhaustive_search(const RowVector& y, const ChannelModel& model, const Constellation& c);

// Box-constrained Schnorr–Euchner enumeration on the QR of Gᵀ, warm-started
// from the sliced ZF point. Returns the same decision as exhaustive_search,
// including its tie-break.
DetectionResult sphere_decode(const RowVector& y, const ChannelModel& model, const Constellation& c);

struct ShortestVector {
  IntRowVector coefficients;
  double norm = 0.0;
};

// Nonzero z ∈ ℤⁿ minimizing ‖z·G‖.
ShortestVector shortest_vector(const ChannelModel& model);

// Unconstrained closest vector: z ∈ ℤⁿ minimizing ‖y − z·G‖.
IntRowVector closest_vector(const RowVector& y, const ChannelModel& model);

}  // namespace mlmimo
