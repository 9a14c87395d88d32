#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "streamemu/core.hpp"

namespace streamemu {

/// Score of an element given the history so far.
class UtilityFunction {
 public:
  virtual ~UtilityFunction() = default;
  [[nodiscard]] virtual double score(const Element& x, const History& history) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// U(x, .) = x's base, with the tie-break coordinate added at half the symbol
/// spacing for symbol bases so distinct elements never tie.
class GreedyMaxUtility final : public UtilityFunction {
 public:
  [[nodiscard]] double score(const Element& x, const History& history) const override;
  [[nodiscard]] std::string name() const override { return "greedy-max"; }
};

/// Greedy argmax pool algorithm over a utility. Equal elements may tie (the
/// lowest index wins); distinct elements with equal scores raise TieDetected.
class UtilityPoolAlgorithm final : public PoolAlgorithm {
 public:
  explicit UtilityPoolAlgorithm(std::shared_ptr<const UtilityFunction> utility)
      : utility_(std::move(utility)) {}

  [[nodiscard]] std::size_t selectNext(const PoolView& view) const override;
  [[nodiscard]] std::string name() const override { return "utility-pool:" + utility_->name(); }
  [[nodiscard]] const UtilityFunction& utility() const noexcept { return *utility_; }

 private:
  std::shared_ptr<const UtilityFunction> utility_;
};

RunRecord runUtilityPool(std::shared_ptr<const UtilityFunction> utility,
                         std::span<const LabeledPair> pool, std::size_t q);

/// Observes m elements without selecting, then for each round waits for the
/// exact element the pool algorithm asks for to recur. Needs a source with atoms.
class WaitEmulator final : public StreamAlgorithm {
 public:
  WaitEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m);
  void run(StreamSession& session, std::size_t q) const override;
  [[nodiscard]] std::string name() const override { return "wait"; }

 private:
  std::shared_ptr<const PoolAlgorithm> pool_;
  std::size_t m_;
};

/// Selects the first m elements and runs the pool algorithm offline.
class NowaitEmulator final : public StreamAlgorithm {
 public:
  NowaitEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m);
  void run(StreamSession& session, std::size_t q) const override;
  [[nodiscard]] std::string name() const override { return "nowait"; }

 private:
  std::shared_ptr<const PoolAlgorithm> pool_;
  std::size_t m_;
};

/// Black-box emulator by rejection: for round i, redraw the m-i+1 unseen pool
/// elements until a replay of the pool algorithm re-selects the committed
/// elements and then picks the most recently drawn one.
class GenEmulator final : public StreamAlgorithm {
 public:
  GenEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m);
  void run(StreamSession& session, std::size_t q) const override;
  [[nodiscard]] std::string name() const override { return "gen"; }

 private:
  std::shared_ptr<const PoolAlgorithm> pool_;
  std::size_t m_;
};

/// One nested-domain constraint: members satisfy U(x, history) < cutoff.
struct DomainCut {
  History history;
  double cutoff = 0.0;
};

/// True iff x lies in every domain defined by the cuts.
bool inDomain(const UtilityFunction& utility, std::span<const DomainCut> cuts,
              const Element& x);

/// Emulator for utility-based pool algorithms: per round, repeated optimal
/// secretary attempts over horizon m-i+1 on draws restricted to the current
/// domain, keeping an attempt only if it picked the attempt's maximum.
class UtilityStreamEmulator final : public StreamAlgorithm {
 public:
  UtilityStreamEmulator(std::shared_ptr<const UtilityFunction> utility, std::size_t m);
  void run(StreamSession& session, std::size_t q) const override;
  [[nodiscard]] std::string name() const override { return "utility-stream"; }

 private:
  std::shared_ptr<const UtilityFunction> utility_;
  std::size_t m_;
};

/// Selects the first q elements it sees. Not equivalent to anything
/// interesting; a control for the equivalence tests.
class FirstArrivalsSelector final : public StreamAlgorithm {
 public:
  void run(StreamSession& session, std::size_t q) const override;
  [[nodiscard]] std::string name() const override { return "first-q"; }
};

RunRecord runAWait(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                   std::size_t m, std::size_t q, Rng& rng,
                   std::uint64_t maxIter = kDefaultMaxIter);
RunRecord runANowait(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                     std::size_t m, std::size_t q, Rng& rng,
                     std::uint64_t maxIter = kDefaultMaxIter);
RunRecord runAGen(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                  std::size_t m, std::size_t q, Rng& rng,
                  std::uint64_t maxIter = kDefaultMaxIter);
RunRecord runUtilityStream(std::shared_ptr<const UtilityFunction> utility,
                           const SourceDistribution& dist, std::size_t m, std::size_t q,
                           Rng& rng, std::uint64_t maxIter = kDefaultMaxIter);

/// Upper bound on the expected iterations of GenEmulator:
/// m^2 (e m / (q-1))^(q-1) for q >= 2 and m^2 for q = 1.
double genIterationBound(std::size_t m, std::size_t q);
/// The tighter sum the bound is derived from: sum_{i<q} (m-i)^2 C(m,i).
double genIterationSum(std::size_t m, std::size_t q);
/// p_sp(m)^-1 * exp(q/(m-q)) * q m.
double utilityIterationBound(std::size_t m, std::size_t q);
/// p_sp(m)^-1 * q.
double utilitySelectionFormula(std::size_t m, std::size_t q);

}  // namespace streamemu
