#include "streamemu/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace streamemu::constructions {

namespace {

constexpr std::size_t kMaxPsiCells = 720;

std::size_t factorial(std::size_t k) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

bool inUpperPart(const Element& e) { return !e.isSymbol() && e.realValue() >= 1.0; }

}  // namespace

std::vector<std::size_t> psi(double u, std::size_t k) {
  require(u >= 1.0 && u <= 2.0, ErrorCode::InvalidArgument, "psi is defined on (1,2]");
  double v = u - 1.0;
  if (v >= 1.0) v = std::nextafter(1.0, 0.0);
  std::vector<std::size_t> remaining(k);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<std::size_t> perm;
  perm.reserve(k);
  for (std::size_t pos = 0; pos < k; ++pos) {
    const std::size_t radix = k - pos;
    const double scaled = v * static_cast<double>(radix);
    auto digit = static_cast<std::size_t>(scaled);
    if (digit >= radix) digit = radix - 1;
    v = scaled - static_cast<double>(digit);
    perm.push_back(remaining[digit]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return perm;
}

// -------------------------------------------------------- good pool

GoodPoolAlgorithm::GoodPoolAlgorithm(std::size_t m, std::size_t q) : m_(m), q_(q) {
  require(m >= 2 && q >= 1 && q <= m, ErrorCode::InvalidArgument,
          "good-pool algorithm needs m >= 2 and 1 <= q <= m");
}

bool GoodPoolAlgorithm::isGoodPool(std::span<const Element> pool) {
  return std::count_if(pool.begin(), pool.end(), inUpperPart) == 1;
}

std::size_t GoodPoolAlgorithm::selectNext(const PoolView& view) const {
  require(view.elements.size() == m_, ErrorCode::ContractViolation,
          "good-pool algorithm built for a different pool size");
  std::vector<std::size_t> lower;
  std::vector<std::size_t> upper;
  for (std::size_t j = 0; j < view.elements.size(); ++j) {
    const Element& e = view.elements[j];
    require(!e.isSymbol() && e.realValue() >= 0.0 && e.realValue() <= 2.0,
            ErrorCode::ContractViolation, "good-pool algorithm expects elements in [0,2]");
    (inUpperPart(e) ? upper : lower).push_back(j);
  }
  auto byValue = [&](std::size_t a, std::size_t b) { return view.elements[a] < view.elements[b]; };
  std::sort(lower.begin(), lower.end(), byValue);
  std::sort(upper.begin(), upper.end(), byValue);

  const std::size_t round = view.history.size();
  if (upper.size() == 1) {
    const std::size_t last = upper.front();
    const std::vector<std::size_t> sigma = psi(view.elements[last].realValue(), m_ - 1);
    if (round + 1 < q_ && round < sigma.size()) return lower[sigma[round]];
    const bool allZero = std::all_of(view.history.begin(), view.history.end(),
                                     [](const LabeledPair& p) { return p.response.label() == 0; });
    if (allZero || round >= sigma.size()) return last;
    return lower[sigma[round]];
  }

  const std::vector<std::size_t>* region = nullptr;
  if (lower.size() >= q_) {
    region = &lower;
  } else if (upper.size() >= q_) {
    region = &upper;
  } else {
    fail(ErrorCode::InfeasiblePool, "neither part of the pool holds q elements");
  }
  for (std::size_t j : *region) {
    if (!view.taken[j]) return j;
  }
  fail(ErrorCode::InfeasiblePool, "pool region exhausted");
}

SourceDistribution makeGoodPoolMarginal(std::size_t m, std::size_t unitBins, double probOne) {
  require(m >= 2, ErrorCode::InvalidArgument, "the good-pool marginal needs m >= 2");
  require(unitBins >= 1, ErrorCode::InvalidArgument, "need at least one bin on [0,1]");
  require(probOne >= 0.0 && probOne <= 1.0, ErrorCode::InvalidArgument, "bad response law");
  const auto md = static_cast<double>(m);
  const std::vector<double> law{1.0 - probOne, probOne};
  std::vector<Cell> cells;
  for (std::size_t b = 0; b < unitBins; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(unitBins);
    const double hi = b + 1 == unitBins ? 1.0 : static_cast<double>(b + 1) / static_cast<double>(unitBins);
    cells.push_back(Cell{Interval{lo, hi}, (1.0 - 1.0 / md) / static_cast<double>(unitBins), law,
                         static_cast<std::uint32_t>(b)});
  }
  std::size_t pieces = 1;
  if (m - 1 <= 6 && factorial(m - 1) <= kMaxPsiCells) pieces = factorial(m - 1);
  const auto upperGroup = static_cast<std::uint32_t>(unitBins);
  for (std::size_t a = 0; a < pieces; ++a) {
    const double lo = 1.0 + static_cast<double>(a) / static_cast<double>(pieces);
    const double hi = a + 1 == pieces ? 2.0 : 1.0 + static_cast<double>(a + 1) / static_cast<double>(pieces);
    cells.push_back(Cell{Interval{lo, hi}, (1.0 / md) / static_cast<double>(pieces), law, upperGroup});
  }
  return SourceDistribution(std::move(cells), true);
}

// ------------------------------------------------------------- chain

ChainUtility::ChainUtility(std::size_t alphabet, std::size_t q) : alphabet_(alphabet), q_(q) {
  require(q >= 1 && alphabet >= 2 * q - 1, ErrorCode::InvalidRegime,
          "chain utility needs at least 2q-1 symbols");
}

std::size_t ChainUtility::target(const History& history) const {
  std::size_t flipped = 0;  // round (1-based) whose response was 1, or 0
  for (std::size_t p = 0; p < history.size(); ++p) {
    const Element& e = history[p].element;
    if (!e.isSymbol()) return 0;
    const std::size_t idx = e.symbolValue() + 1;
    const std::size_t expected = flipped == 0 ? p + 1 : q_ + p;
    if (idx != expected) return 0;
    if (flipped == 0 && history[p].response.label() == 1) flipped = p + 1;
  }
  const std::size_t s = history.size();
  const std::size_t next = flipped == 0 ? s + 1 : q_ + s;
  return next <= alphabet_ ? next : 0;
}

double ChainUtility::score(const Element& x, const History& history) const {
  require(x.isSymbol(), ErrorCode::InvalidArgument, "chain utility scores symbols only");
  const std::size_t idx = x.symbolValue() + 1;
  const double base = idx == target(history) ? static_cast<double>(alphabet_ + 2)
                                              : -static_cast<double>(idx);
  return base + 0.5 * x.tiebreak();
}

SourceDistribution ChainConstruction::distribution(std::size_t t) const {
  require(t <= q, ErrorCode::InvalidArgument, "response law index must be in [0,q]");
  std::vector<double> probOne(alphabet, 0.0);
  if (t >= 1) probOne[t - 1] = 1.0;
  return SourceDistribution::uniformSymbols(probOne, true);
}

std::vector<std::size_t> ChainConstruction::expectedOutput(std::size_t t) const {
  std::vector<std::size_t> z;
  if (t == 0) {
    for (std::size_t i = 1; i <= q; ++i) z.push_back(i);
    return z;
  }
  for (std::size_t i = 1; i <= t; ++i) z.push_back(i);
  for (std::size_t i = q + t; i <= 2 * q - 1; ++i) z.push_back(i);
  return z;
}

double ChainConstruction::iterationLowerBound() const {
  return static_cast<double>(q) * static_cast<double>(boundAlphabet) / 8.0;
}

ChainConstruction makeChainUtility(std::size_t m, std::size_t q) {
  require(m >= 8 && q >= 1 && 2 * q <= m, ErrorCode::InvalidRegime,
          "chain construction needs m >= 8 and q <= m/2");
  ChainConstruction c;
  c.m = m;
  c.q = q;
  c.boundAlphabet = static_cast<std::size_t>(
      std::floor(static_cast<double>(m) / (2.0 * std::log(2.0 * static_cast<double>(q)))));
  c.alphabet = std::max(c.boundAlphabet, 2 * q - 1);
  c.utility = std::make_shared<const ChainUtility>(c.alphabet, q);
  return c;
}

// -------------------------------------------------------- hypotheses

HypothesisClass::HypothesisClass(std::size_t q, std::size_t T, std::size_t n)
    : q_(q), T_(T), n_(n) {
  require(T >= 1 && T <= q && q <= 30, ErrorCode::InvalidShape,
          "hypothesis class needs 1 <= T <= q <= 30");
  require(2 * n >= q * (std::size_t{1} << T), ErrorCode::InvalidShape,
          "hypothesis class needs n >= q 2^T / 2");
  levelStart_.push_back(0);
  for (std::size_t k = 1; k <= q; ++k) levelStart_.push_back(levelStart_.back() + levelWidth(k));
  structured_ = levelStart_.back();
}

std::size_t HypothesisClass::levelWidth(std::size_t k) const {
  require(k >= 1 && k <= q_, ErrorCode::InvalidArgument, "level out of range");
  return std::size_t{1} << (std::min(k, T_) - 1);
}

Symbol HypothesisClass::symbolOf(std::size_t k, std::size_t j) const {
  require(j < levelWidth(k), ErrorCode::InvalidArgument, "element index out of range");
  return static_cast<Symbol>(levelStart_[k - 1] + j);
}

Label HypothesisClass::evaluate(std::uint64_t i, std::size_t k, std::size_t j) const {
  require(i < hypothesisCount(), ErrorCode::InvalidArgument, "hypothesis index out of range");
  require(j < levelWidth(k), ErrorCode::InvalidArgument, "element index out of range");
  if (k <= T_) return (i % (1ULL << k)) == j ? 1 : 0;
  return ((i >> (k - T_)) % (1ULL << T_)) == j ? 1 : 0;
}

Label HypothesisClass::evaluate(std::uint64_t i, Symbol s) const {
  require(s < n_, ErrorCode::InvalidArgument, "symbol outside the domain");
  if (s >= structured_) return 0;
  const auto it = std::upper_bound(levelStart_.begin(), levelStart_.end(), std::size_t{s});
  const auto k = static_cast<std::size_t>(it - levelStart_.begin());
  return evaluate(i, k, s - levelStart_[k - 1]);
}

SourceDistribution HypothesisClass::distribution(std::uint64_t target, bool atomless) const {
  std::vector<double> probOne(n_);
  for (std::size_t s = 0; s < n_; ++s) probOne[s] = evaluate(target, static_cast<Symbol>(s));
  return SourceDistribution::uniformSymbols(probOne, atomless);
}

HypothesisClass makeHypothesisClass(std::size_t q, std::size_t T, std::size_t n) {
  return HypothesisClass(q, T, n);
}

BitLearner::BitLearner(std::shared_ptr<const HypothesisClass> hypotheses, bool strict)
    : hypotheses_(std::move(hypotheses)), strict_(strict) {}

std::size_t BitLearner::queryIndex(std::size_t round, std::uint64_t knownBits) const {
  const std::size_t T = hypotheses_->T();
  if (round <= T) return hypotheses_->symbolOf(round, static_cast<std::size_t>(knownBits));
  const std::uint64_t j = (knownBits >> (round - T)) & ((1ULL << (T - 1)) - 1);
  return hypotheses_->symbolOf(round, static_cast<std::size_t>(j));
}

std::uint64_t BitLearner::decode(const History& history) const {
  std::uint64_t bits = 0;
  for (std::size_t p = 0; p < history.size(); ++p) {
    if (history[p].response.label() == 0) bits |= 1ULL << p;
  }
  return bits;
}

std::size_t BitLearner::selectNext(const PoolView& view) const {
  const std::size_t round = view.history.size() + 1;
  require(round <= hypotheses_->q(), ErrorCode::ContractViolation,
          "bit learner asked for more rounds than bits");
  const auto wanted = static_cast<Symbol>(queryIndex(round, decode(view.history)));
  std::size_t best = view.elements.size();
  for (std::size_t j = 0; j < view.elements.size(); ++j) {
    const Element& e = view.elements[j];
    if (view.taken[j] || !e.isSymbol() || e.symbolValue() != wanted) continue;
    if (best == view.elements.size() || e < view.elements[best]) best = j;
  }
  if (best == view.elements.size() && !strict_) {
    for (std::size_t j = 0; j < view.elements.size(); ++j) {
      if (view.taken[j]) continue;
      if (best == view.elements.size() || view.elements[j] < view.elements[best]) best = j;
    }
  }
  require(best < view.elements.size(), ErrorCode::IncompletePool,
          "pool lacks element s" + std::to_string(wanted) + " needed in round " +
              std::to_string(round));
  return best;
}

std::uint64_t poolBitLearner(std::shared_ptr<const HypothesisClass> hypotheses,
                             std::span<const LabeledPair> pool, std::size_t q) {
  const BitLearner learner(std::move(hypotheses));
  return learner.decode(runPool(learner, pool, q).output);
}

}  // namespace streamemu::constructions
