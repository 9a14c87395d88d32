#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamemu/core.hpp"

namespace streamemu::stats {

/// An output pair with its element projected onto the distribution's cell group.
struct CanonicalPair {
  std::uint32_t group = 0;
  Label label = 0;

  friend auto operator<=>(const CanonicalPair&, const CanonicalPair&) = default;
};

/// Sorted multiset of canonical pairs.
using Outcome = std::vector<CanonicalPair>;

/// Drops tie-breaks and maps each element to its cell group; order-insensitive.
Outcome canonicalize(const History& output, const SourceDistribution& dist);
/// Sorts an already projected multiset; canonicalize(x) is a fixed point.
Outcome canonicalize(Outcome outcome);
/// "g:y;g:y;...", CSV-safe.
std::string outcomeId(const Outcome& outcome);

enum class DistributionKind { Exact, Empirical };

class OutcomeDistribution {
 public:
  OutcomeDistribution() = default;
  OutcomeDistribution(DistributionKind kind, std::map<Outcome, double> masses,
                      std::uint64_t trials = 0);

  [[nodiscard]] DistributionKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::uint64_t trials() const noexcept { return trials_; }
  [[nodiscard]] const std::map<Outcome, double>& masses() const noexcept { return masses_; }
  [[nodiscard]] double mass(const Outcome& outcome) const;
  [[nodiscard]] double totalMass() const;

  static OutcomeDistribution fromCounts(const std::map<Outcome, std::uint64_t>& counts);

 private:
  DistributionKind kind_ = DistributionKind::Exact;
  std::map<Outcome, double> masses_;
  std::uint64_t trials_ = 0;
};

/// Joint configurations allowed in exact enumeration.
inline constexpr double kMaxEnumeration = 1e7;

/// Optional conditioning event on the enumerated pool.
using PoolEvent = std::function<bool(std::span<const Element>)>;

/// Exact output distribution of a deterministic, permutation-invariant pool
/// algorithm whose choices depend only on each element's cell and on the
/// relative order of elements inside a cell. Enumerates cells^m x labels^m
/// joint assignments with index-ordered representatives inside each cell.
/// With `event`, the result is conditioned on the pool satisfying it.
OutcomeDistribution exactPoolDistribution(const PoolAlgorithm& alg,
                                          const SourceDistribution& dist, std::size_t m,
                                          std::size_t q, const PoolEvent& event = {});

double tvDistance(const OutcomeDistribution& p, const OutcomeDistribution& q);

struct MeanEstimate {
  double mean = 0.0;
  double halfWidth = 0.0;  // 95% normal approximation
  std::uint64_t trialCount = 0;

  [[nodiscard]] double upper() const noexcept { return mean + halfWidth; }
  [[nodiscard]] double lower() const noexcept { return mean - halfWidth; }
};

/// Throws InsufficientSamples for fewer than two samples.
MeanEstimate meanCI(std::span<const double> samples);

// ------------------------------------------------------------ trial batches

using TrialRunner = std::function<RunRecord(std::uint64_t trialIndex, Rng& rng)>;

enum class TrialStatus { Ok, Capped };

struct TrialResult {
  TrialStatus status = TrialStatus::Ok;
  RunRecord record;  // partial when capped
};

class TrialError : public Error {
 public:
  TrialError(std::uint64_t trial, ErrorCode cause, const std::string& message)
      : Error(ErrorCode::TrialFailure, message), trial_(trial), cause_(cause) {}
  [[nodiscard]] std::uint64_t trial() const noexcept { return trial_; }
  [[nodiscard]] ErrorCode cause() const noexcept { return cause_; }

 private:
  std::uint64_t trial_;
  ErrorCode cause_;
};

/// Runs `trials` independent trials, trial k on Rng::forTrial(seed, k),
/// spread over `threads` workers (0 = hardware concurrency). Results are
/// indexed by trial, so the thread count never changes them. Iteration caps
/// become Capped results; any other error is rethrown as TrialError for the
/// lowest failing trial.
std::vector<TrialResult> runTrials(const TrialRunner& runner, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads = 0);

/// Canonical output frequencies over uncapped results.
OutcomeDistribution distributionOf(std::span<const TrialResult> results,
                                   const SourceDistribution& dist);

/// Empirical distribution of `trials` runs; every error, including an
/// iteration cap, propagates as TrialError.
OutcomeDistribution empiricalDistribution(const TrialRunner& runner,
                                          const SourceDistribution& dist,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads = 0);

}  // namespace streamemu::stats
