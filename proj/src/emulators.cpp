#include "streamemu/emulators.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "streamemu/secretary.hpp"

namespace streamemu {

double GreedyMaxUtility::score(const Element& x, const History&) const {
  if (x.isSymbol()) return static_cast<double>(x.symbolValue()) + 0.5 * x.tiebreak();
  return x.realValue();
}

std::size_t UtilityPoolAlgorithm::selectNext(const PoolView& view) const {
  std::size_t best = view.elements.size();
  double bestScore = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < view.elements.size(); ++j) {
    if (view.taken[j]) continue;
    const double s = utility_->score(view.elements[j], view.history);
    if (best == view.elements.size() || s > bestScore) {
      best = j;
      bestScore = s;
    } else if (s == bestScore && !(view.elements[j] == view.elements[best])) {
      fail(ErrorCode::TieDetected, name() + ": distinct elements " +
                                       view.elements[j].toString() + " and " +
                                       view.elements[best].toString() + " tie");
    }
  }
  require(best < view.elements.size(), ErrorCode::ContractViolation,
          "no unselected element left in the pool");
  return best;
}

RunRecord runUtilityPool(std::shared_ptr<const UtilityFunction> utility,
                         std::span<const LabeledPair> pool, std::size_t q) {
  const UtilityPoolAlgorithm alg(std::move(utility));
  return runPool(alg, pool, q);
}

// ------------------------------------------------------------------ wait

WaitEmulator::WaitEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m)
    : pool_(std::move(pool)), m_(m) {}

void WaitEmulator::run(StreamSession& session, std::size_t q) const {
  const SourceDistribution& dist = session.distribution();
  require(!dist.atomless() && dist.isDiscrete(), ErrorCode::AtomlessDistribution,
          "the wait emulator needs a source with atoms");
  require(q <= m_, ErrorCode::InvalidArgument, "budget exceeds pool size");

  std::vector<Element> pool;
  pool.reserve(m_);
  for (std::size_t t = 0; t < m_; ++t) pool.push_back(session.observe());
  std::vector<std::uint8_t> taken(m_, 0);
  History history;
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t idx = checkedSelect(*pool_, PoolView{pool, taken, history});
    while (!(session.observe() == pool[idx])) {
    }
    const LabeledPair pair = session.select();
    taken[idx] = 1;
    history.push_back(pair);
    session.emit(pair);
  }
}

// ---------------------------------------------------------------- nowait

NowaitEmulator::NowaitEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m)
    : pool_(std::move(pool)), m_(m) {}

void NowaitEmulator::run(StreamSession& session, std::size_t q) const {
  require(q <= m_, ErrorCode::InvalidArgument, "budget exceeds pool size");
  std::vector<LabeledPair> labeled;
  labeled.reserve(m_);
  for (std::size_t t = 0; t < m_; ++t) {
    session.observe();
    labeled.push_back(session.select());
  }
  for (const LabeledPair& p : runPool(*pool_, labeled, q).output) session.emit(p);
}

// ------------------------------------------------------------------- gen

GenEmulator::GenEmulator(std::shared_ptr<const PoolAlgorithm> pool, std::size_t m)
    : pool_(std::move(pool)), m_(m) {}

void GenEmulator::run(StreamSession& session, std::size_t q) const {
  require(session.distribution().atomless(), ErrorCode::AtomlessDistribution,
          "the gen emulator needs an atomless source");
  require(q <= m_, ErrorCode::InvalidArgument, "budget exceeds pool size");

  History committed;
  std::vector<Element> combined;
  std::vector<std::uint8_t> taken;
  History replay;
  combined.reserve(m_);

  for (std::size_t i = 1; i <= q; ++i) {
    const std::size_t fresh = m_ - i + 1;
    const std::size_t known = i - 1;
    for (;;) {
      combined.clear();
      for (const LabeledPair& p : committed) combined.push_back(p.element);
      for (std::size_t j = 0; j < fresh; ++j) combined.push_back(session.observe());

      // Replay i-1 rounds; any pick outside the committed prefix fails the
      // set-equality condition, so stop before a hidden response is needed.
      taken.assign(combined.size(), 0);
      replay.clear();
      bool consistent = true;
      for (std::size_t r = 0; r < known; ++r) {
        const std::size_t idx = checkedSelect(*pool_, PoolView{combined, taken, replay});
        if (idx >= known) {
          consistent = false;
          break;
        }
        taken[idx] = 1;
        replay.push_back(committed[idx]);
      }
      if (!consistent) continue;
      const std::size_t idx = checkedSelect(*pool_, PoolView{combined, taken, replay});
      if (idx == combined.size() - 1) break;
    }
    const LabeledPair pair = session.select();
    committed.push_back(pair);
    session.emit(pair);
  }
}

// ------------------------------------------------------- utility stream

bool inDomain(const UtilityFunction& utility, std::span<const DomainCut> cuts,
              const Element& x) {
  for (const DomainCut& cut : cuts) {
    if (!(utility.score(x, cut.history) < cut.cutoff)) return false;
  }
  return true;
}

UtilityStreamEmulator::UtilityStreamEmulator(std::shared_ptr<const UtilityFunction> utility,
                                             std::size_t m)
    : utility_(std::move(utility)), m_(m) {}

void UtilityStreamEmulator::run(StreamSession& session, std::size_t q) const {
  require(session.distribution().atomless(), ErrorCode::AtomlessDistribution,
          "the utility stream emulator needs an atomless source");
  require(q <= m_, ErrorCode::InvalidArgument, "budget exceeds pool size");

  History accepted;
  std::vector<DomainCut> cuts;
  std::vector<double> scores;

  for (std::size_t i = 1; i <= q; ++i) {
    const std::size_t horizon = m_ - i + 1;
    const secretary::Policy policy = secretary::optimalPolicy(horizon);
    std::uint64_t attempts = 0;
    LabeledPair chosen{Element::symbol(0), Response::hidden()};
    double chosenScore = 0.0;
    for (;;) {
      ++attempts;
      scores.clear();
      bool selected = false;
      for (std::size_t j = 0; j < horizon; ++j) {
        const Element* x = &session.observe();
        while (!inDomain(*utility_, cuts, *x)) x = &session.observe();
        scores.push_back(utility_->score(*x, accepted));
        if (!selected && secretary::secPr(policy, scores)) {
          chosen = session.select();
          chosenScore = scores.back();
          selected = true;
        }
      }
      // an attempt without a selection counts as failed
      if (!selected) continue;
      double best = scores.front();
      for (double s : scores) best = std::max(best, s);
      if (chosenScore == best) break;
    }
    session.recordAttempts(attempts);
    cuts.push_back(DomainCut{accepted, chosenScore});
    accepted.push_back(chosen);
    session.emit(chosen);
  }
}

void FirstArrivalsSelector::run(StreamSession& session, std::size_t q) const {
  for (std::size_t i = 0; i < q; ++i) {
    session.observe();
    session.emit(session.select());
  }
}

// ---------------------------------------------------------- entry points

RunRecord runAWait(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                   std::size_t m, std::size_t q, Rng& rng, std::uint64_t maxIter) {
  return runStream(WaitEmulator(std::move(pool), m), dist, q, maxIter, rng);
}

RunRecord runANowait(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                     std::size_t m, std::size_t q, Rng& rng, std::uint64_t maxIter) {
  return runStream(NowaitEmulator(std::move(pool), m), dist, q, maxIter, rng);
}

RunRecord runAGen(std::shared_ptr<const PoolAlgorithm> pool, const SourceDistribution& dist,
                  std::size_t m, std::size_t q, Rng& rng, std::uint64_t maxIter) {
  return runStream(GenEmulator(std::move(pool), m), dist, q, maxIter, rng);
}

RunRecord runUtilityStream(std::shared_ptr<const UtilityFunction> utility,
                           const SourceDistribution& dist, std::size_t m, std::size_t q,
                           Rng& rng, std::uint64_t maxIter) {
  return runStream(UtilityStreamEmulator(std::move(utility), m), dist, q, maxIter, rng);
}

double genIterationBound(std::size_t m, std::size_t q) {
  const auto md = static_cast<double>(m);
  if (q <= 1) return md * md;
  const auto k = static_cast<double>(q - 1);
  return md * md * std::pow(std::exp(1.0) * md / k, k);
}

double genIterationSum(std::size_t m, std::size_t q) {
  double sum = 0.0;
  double binom = 1.0;
  for (std::size_t i = 0; i < q; ++i) {
    const auto rest = static_cast<double>(m - i);
    sum += rest * rest * binom;
    binom = binom * static_cast<double>(m - i) / static_cast<double>(i + 1);
  }
  return sum;
}

double utilityIterationBound(std::size_t m, std::size_t q) {
  if (q >= m) return std::numeric_limits<double>::infinity();
  const double p = secretary::successProbability(secretary::optimalPolicy(m));
  const auto md = static_cast<double>(m);
  const auto qd = static_cast<double>(q);
  return std::exp(qd / (md - qd)) * qd * md / p;
}

double utilitySelectionFormula(std::size_t m, std::size_t q) {
  return static_cast<double>(q) / secretary::successProbability(secretary::optimalPolicy(m));
}

}  // namespace streamemu
