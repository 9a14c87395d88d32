#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "streamemu/core.hpp"
#include "streamemu/emulators.hpp"

namespace streamemu::constructions {

// ------------------------------------------------------------------------
// Good-pool construction on [0,2]: the single element in (1,2] of a good
// pool encodes, through psi, which [0,1] elements get selected.

/// Maps u in (1,2] to a permutation of 0..k-1 by reading u-1 as factorial-base
/// digits (a Lehmer code). Uniform u gives a uniform permutation, and the
/// result is constant on each of the k! equal sub-intervals of (1,2].
std::vector<std::size_t> psi(double u, std::size_t k);

class GoodPoolAlgorithm final : public PoolAlgorithm {
 public:
  /// Throws InvalidArgument unless m >= 2 and 1 <= q <= m.
  GoodPoolAlgorithm(std::size_t m, std::size_t q);

  [[nodiscard]] std::size_t selectNext(const PoolView& view) const override;
  [[nodiscard]] std::string name() const override { return "thm3-good-pool"; }

  /// Exactly one element in (1,2] and the rest in [0,1].
  static bool isGoodPool(std::span<const Element> pool);

 private:
  std::size_t m_;
  std::size_t q_;
};

/// P[X in [0,1]] = 1 - 1/m, P[X in (1,2]] = 1/m, uniform within each part.
/// [0,1] is cut into unitBins cells (one canonical group each); (1,2] is one
/// group, internally cut into (m-1)! cells when that is at most 720 so that
/// exact enumeration sees psi as constant per cell. Responses are 1 with
/// probability probOne (0 gives the all-zero law D_0).
SourceDistribution makeGoodPoolMarginal(std::size_t m, std::size_t unitBins = 1,
                                        double probOne = 0.0);

// ------------------------------------------------------------------------
// Chain construction: a utility whose argmax walks a_1, a_2, ... while
// responses are 0 and jumps to the tail a_{q+t}, ... after a 1.

class ChainUtility final : public UtilityFunction {
 public:
  ChainUtility(std::size_t alphabet, std::size_t q);

  [[nodiscard]] double score(const Element& x, const History& history) const override;
  [[nodiscard]] std::string name() const override { return "thm6-chain"; }

  /// 1-based index of the unique maximizer for this history, or 0 if the
  /// history leaves the chain (then scores fall back to symbol order).
  [[nodiscard]] std::size_t target(const History& history) const;

 private:
  std::size_t alphabet_;
  std::size_t q_;
};

struct ChainConstruction {
  std::size_t m = 0;
  std::size_t q = 0;
  /// floor(m / (2 ln 2q)), the size used in the lower-bound value q n / 8.
  std::size_t boundAlphabet = 0;
  /// Symbols actually used: at least 2q-1 so a_1..a_{2q-1} exist.
  std::size_t alphabet = 0;
  std::shared_ptr<const ChainUtility> utility;

  /// D_0 for t = 0; for t in [1,q], response 1 on a_t and 0 elsewhere.
  /// Symbol a_i is Symbol(i-1). Atomless so pools with repeats never tie.
  [[nodiscard]] SourceDistribution distribution(std::size_t t) const;
  /// Z_t as 1-based chain indices.
  [[nodiscard]] std::vector<std::size_t> expectedOutput(std::size_t t) const;
  /// q n / 8 with n = boundAlphabet.
  [[nodiscard]] double iterationLowerBound() const;
};

/// Throws InvalidRegime unless m >= 8 and q <= m/2.
ChainConstruction makeChainUtility(std::size_t m, std::size_t q);

// ------------------------------------------------------------------------
// Hypothesis class with elements a_{k,j}; each label of h_i tests a window
// of the bits of i.

class HypothesisClass {
 public:
  /// Throws InvalidShape unless 1 <= T <= q <= 30 and n >= q 2^T / 2.
  HypothesisClass(std::size_t q, std::size_t T, std::size_t n);

  [[nodiscard]] std::size_t q() const noexcept { return q_; }
  [[nodiscard]] std::size_t T() const noexcept { return T_; }
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::uint64_t hypothesisCount() const noexcept { return 1ULL << q_; }

  /// Number of j values for level k (1-based): 2^(min(k,T)-1).
  [[nodiscard]] std::size_t levelWidth(std::size_t k) const;
  /// Symbol of a_{k,j}; levels are laid out consecutively, fillers follow.
  [[nodiscard]] Symbol symbolOf(std::size_t k, std::size_t j) const;
  [[nodiscard]] std::size_t structuredCount() const noexcept { return structured_; }

  /// h_i(a_{k,j}): for k <= T, [i mod 2^k == j]; for k > T,
  /// [floor(i / 2^(k-T)) mod 2^T == j].
  [[nodiscard]] Label evaluate(std::uint64_t i, std::size_t k, std::size_t j) const;
  /// h_i on any symbol; fillers are labeled 0.
  [[nodiscard]] Label evaluate(std::uint64_t i, Symbol s) const;

  /// Uniform marginal over all n symbols, labeled by h_target.
  [[nodiscard]] SourceDistribution distribution(std::uint64_t target, bool atomless) const;

 private:
  std::size_t q_;
  std::size_t T_;
  std::size_t n_;
  std::vector<std::size_t> levelStart_;
  std::size_t structured_ = 0;
};

HypothesisClass makeHypothesisClass(std::size_t q, std::size_t T, std::size_t n);

/// Pool learner that reads off one bit of i* per query: round t asks a_{t,j}
/// with j built from bits already found. If the element it needs is missing,
/// a strict learner throws IncompletePool and a lenient one takes the
/// smallest untaken element instead.
class BitLearner final : public PoolAlgorithm {
 public:
  explicit BitLearner(std::shared_ptr<const HypothesisClass> hypotheses, bool strict = true);

  [[nodiscard]] std::size_t selectNext(const PoolView& view) const override;
  [[nodiscard]] std::string name() const override { return "ex1-hypotheses"; }

  /// Index of the queried element for the next round given the bits found so far.
  [[nodiscard]] std::size_t queryIndex(std::size_t round, std::uint64_t knownBits) const;
  /// Reassembles i* from a history produced by this learner.
  [[nodiscard]] std::uint64_t decode(const History& history) const;

 private:
  std::shared_ptr<const HypothesisClass> hypotheses_;
  bool strict_;
};

/// Runs the learner on a labeled pool with budget q and returns the index it identifies.
std::uint64_t poolBitLearner(std::shared_ptr<const HypothesisClass> hypotheses,
                             std::span<const LabeledPair> pool, std::size_t q);

}  // namespace streamemu::constructions
