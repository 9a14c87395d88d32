#pragma once

#include <cstdint>
#include <span>

namespace streamemu::secretary {

/// Optimal rule for the classical secretary problem with horizon n: skip
/// candidates 1..threshold-1, then take the first running maximum.
struct Policy {
  std::uint64_t n = 1;
  std::uint64_t threshold = 1;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Exact reduced fraction; used where floating point would blur ties.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const noexcept {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Throws InvalidHorizon if n < 1.
Policy optimalPolicy(std::uint64_t n);

/// Success probability of the policy's threshold:
/// (r-1)/n * sum_{j=r}^{n} 1/(j-1) for r >= 2, and 1/n for r = 1.
double successProbability(const Policy& policy);

/// Same quantity as an exact fraction. Horizons above 30 overflow and throw
/// InvalidHorizon.
Rational exactSuccessProbability(const Policy& policy);

/// True iff the policy, run on this prefix, selects its last score.
/// Throws DuplicateScore on equal scores and InvalidArgument on a bad length.
bool secPr(const Policy& policy, std::span<const double> prefixScores);

/// Probability that the policy selects anything at all: 1 - (r-1)/n.
double selectionProbability(const Policy& policy);

}  // namespace streamemu::secretary
