#include "streamemu/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace streamemu {

std::string_view errorCodeName(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::AtomlessDistribution: return "AtomlessDistribution";
    case ErrorCode::TieDetected: return "TieDetected";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::DuplicateScore: return "DuplicateScore";
    case ErrorCode::InfeasiblePool: return "InfeasiblePool";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::IncompletePool: return "IncompletePool";
    case ErrorCode::TooLargeToEnumerate: return "TooLargeToEnumerate";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::TrialFailure: return "TrialFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- Element

Element::Element(std::variant<Symbol, double> base, double tiebreak)
    : base_(base), tiebreak_(tiebreak) {
  require(tiebreak >= 0.0 && tiebreak < 1.0, ErrorCode::InvalidArgument,
          "tiebreak must lie in [0,1)");
}

Element Element::symbol(Symbol s, double tiebreak) { return Element(s, tiebreak); }

Element Element::real(double value, double tiebreak) {
  require(std::isfinite(value), ErrorCode::InvalidArgument, "real base must be finite");
  return Element(value, tiebreak);
}

Symbol Element::symbolValue() const {
  require(isSymbol(), ErrorCode::InvalidArgument, "element has a real base");
  return std::get<Symbol>(base_);
}

double Element::realValue() const {
  require(!isSymbol(), ErrorCode::InvalidArgument, "element has a symbol base");
  return std::get<double>(base_);
}

double Element::numeric() const noexcept {
  return isSymbol() ? static_cast<double>(std::get<Symbol>(base_)) : std::get<double>(base_);
}

std::string Element::toString() const {
  char buf[64];
  if (isSymbol()) {
    std::snprintf(buf, sizeof buf, "s%u@%.6g", std::get<Symbol>(base_), tiebreak_);
  } else {
    std::snprintf(buf, sizeof buf, "%.12g@%.6g", std::get<double>(base_), tiebreak_);
  }
  return buf;
}

namespace {

// Total order on doubles matching bit equality (finite values only here).
std::strong_ordering compareDouble(double a, double b) noexcept {
  if (std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b)) {
    return std::strong_ordering::equal;
  }
  if (a < b) return std::strong_ordering::less;
  if (b < a) return std::strong_ordering::greater;
  // +0.0 vs -0.0
  return std::signbit(a) ? std::strong_ordering::less : std::strong_ordering::greater;
}

}  // namespace

bool operator==(const Element& a, const Element& b) noexcept {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Element& a, const Element& b) noexcept {
  if (a.base_.index() != b.base_.index()) return a.base_.index() <=> b.base_.index();
  std::strong_ordering base = a.isSymbol()
                                  ? std::get<Symbol>(a.base_) <=> std::get<Symbol>(b.base_)
                                  : compareDouble(std::get<double>(a.base_),
                                                  std::get<double>(b.base_));
  if (base != std::strong_ordering::equal) return base;
  return compareDouble(a.tiebreak_, b.tiebreak_);
}

Label Response::label() const {
  require(!isHidden(), ErrorCode::ContractViolation, "response has not been revealed");
  return static_cast<Label>(value_);
}

std::strong_ordering operator<=>(const LabeledPair& a, const LabeledPair& b) noexcept {
  if (auto c = a.element <=> b.element; c != std::strong_ordering::equal) return c;
  return a.response <=> b.response;
}

// ------------------------------------------------------ SourceDistribution

SourceDistribution::SourceDistribution(std::vector<Cell> cells, bool atomless,
                                       std::size_t labelCount)
    : cells_(std::move(cells)), atomless_(atomless), labelCount_(labelCount) {
  require(!cells_.empty(), ErrorCode::InvalidArgument, "distribution needs at least one cell");
  require(labelCount_ >= 1 && labelCount_ <= 127, ErrorCode::InvalidArgument,
          "label alphabet size must be in [1,127]");
  double total = 0.0;
  cumulative_.reserve(cells_.size());
  for (const Cell& c : cells_) {
    require(c.mass >= 0.0, ErrorCode::InvalidArgument, "cell mass must be non-negative");
    require(c.responseProbs.size() == labelCount_, ErrorCode::InvalidArgument,
            "response law size must equal the label alphabet size");
    double rsum = 0.0;
    for (double p : c.responseProbs) {
      require(p >= 0.0, ErrorCode::InvalidArgument, "response probability must be non-negative");
      rsum += p;
    }
    require(std::abs(rsum - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
            "response probabilities must sum to 1");
    if (const auto* iv = std::get_if<Interval>(&c.support)) {
      require(iv->lo < iv->hi, ErrorCode::InvalidArgument, "interval cell must be non-empty");
    }
    total += c.mass;
    cumulative_.push_back(total);
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
          "cell masses must sum to 1");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < cells_.size(); ++j) {
      const auto& a = cells_[i].support;
      const auto& b = cells_[j].support;
      if (a.index() != b.index()) continue;
      if (const auto* sa = std::get_if<Symbol>(&a)) {
        require(*sa != std::get<Symbol>(b), ErrorCode::InvalidArgument, "duplicate symbol cell");
      } else {
        const auto& ia = std::get<Interval>(a);
        const auto& ib = std::get<Interval>(b);
        require(ia.hi <= ib.lo || ib.hi <= ia.lo, ErrorCode::InvalidArgument,
                "interval cells must not overlap");
      }
    }
  }
}

SourceDistribution SourceDistribution::uniformSymbols(std::span<const double> probOne,
                                                      bool atomless) {
  require(!probOne.empty(), ErrorCode::InvalidArgument, "need at least one symbol");
  std::vector<Cell> cells;
  const double mass = 1.0 / static_cast<double>(probOne.size());
  for (std::size_t s = 0; s < probOne.size(); ++s) {
    cells.push_back(Cell{static_cast<Symbol>(s), mass, {1.0 - probOne[s], probOne[s]},
                         static_cast<std::uint32_t>(s)});
  }
  return SourceDistribution(std::move(cells), atomless);
}

SourceDistribution SourceDistribution::uniformInterval(double lo, double hi,
                                                       std::span<const double> probOne) {
  require(!probOne.empty() && lo < hi, ErrorCode::InvalidArgument, "bad interval marginal");
  std::vector<Cell> cells;
  const auto bins = static_cast<double>(probOne.size());
  for (std::size_t b = 0; b < probOne.size(); ++b) {
    const double a = lo + (hi - lo) * static_cast<double>(b) / bins;
    const double z = b + 1 == probOne.size() ? hi : lo + (hi - lo) * static_cast<double>(b + 1) / bins;
    cells.push_back(Cell{Interval{a, z}, 1.0 / bins, {1.0 - probOne[b], probOne[b]},
                         static_cast<std::uint32_t>(b)});
  }
  return SourceDistribution(std::move(cells), true);
}

bool SourceDistribution::isDiscrete() const noexcept {
  return std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) {
    return std::holds_alternative<Symbol>(c.support);
  });
}

std::uint32_t SourceDistribution::groupCount() const noexcept {
  std::uint32_t g = 0;
  for (const Cell& c : cells_) g = std::max(g, c.group + 1);
  return g;
}

SampledPair SourceDistribution::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= cells_.size()) idx = cells_.size() - 1;
  // skip zero-mass cells that upper_bound can land on at their boundary
  while (cells_[idx].mass == 0.0 && idx + 1 < cells_.size()) ++idx;
  const Cell& cell = cells_[idx];

  double realValue = 0.0;
  if (const auto* iv = std::get_if<Interval>(&cell.support)) {
    realValue = iv->lo + (iv->hi - iv->lo) * rng.uniform();
    if (realValue >= iv->hi) realValue = std::nextafter(iv->hi, iv->lo);
  }
  const double tiebreak = atomless_ ? rng.uniform() : 0.0;

  const double r = rng.uniform();
  double acc = 0.0;
  Label label = static_cast<Label>(labelCount_ - 1);
  for (std::size_t y = 0; y < labelCount_; ++y) {
    acc += cell.responseProbs[y];
    if (r < acc) {
      label = static_cast<Label>(y);
      break;
    }
  }
  // never emit a zero-probability label through rounding at the top end
  while (cell.responseProbs[label] == 0.0 && label > 0) --label;

  if (const auto* s = std::get_if<Symbol>(&cell.support)) {
    return SampledPair(Element::symbol(*s, tiebreak), label);
  }
  return SampledPair(Element::real(realValue, tiebreak), label);
}

std::size_t SourceDistribution::cellOf(const Element& e) const {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& support = cells_[i].support;
    if (e.isSymbol()) {
      if (const auto* s = std::get_if<Symbol>(&support); s && *s == e.symbolValue()) return i;
    } else if (const auto* iv = std::get_if<Interval>(&support)) {
      const double v = e.realValue();
      if (v >= iv->lo && v < iv->hi) return i;
    }
  }
  fail(ErrorCode::InvalidArgument, "element " + e.toString() + " is outside the support");
}

Element SourceDistribution::representative(std::size_t cell, std::size_t rank,
                                           std::size_t count) const {
  require(cell < cells_.size() && rank < count, ErrorCode::InvalidArgument,
          "bad representative request");
  const double frac = static_cast<double>(rank + 1) / static_cast<double>(count + 1);
  const auto& support = cells_[cell].support;
  if (const auto* s = std::get_if<Symbol>(&support)) {
    return Element::symbol(*s, atomless_ ? frac : 0.0);
  }
  const auto& iv = std::get<Interval>(support);
  return Element::real(iv.lo + (iv.hi - iv.lo) * frac, atomless_ ? frac : 0.0);
}

SourceDistribution SourceDistribution::withAtomless(bool atomless) const {
  return SourceDistribution(cells_, atomless, labelCount_);
}

SampledPair sampleElement(const SourceDistribution& dist, Rng& rng) { return dist.sample(rng); }

// ------------------------------------------------------------ run loops

std::size_t checkedSelect(const PoolAlgorithm& alg, const PoolView& view) {
  const std::size_t idx = alg.selectNext(view);
  require(idx < view.elements.size(), ErrorCode::ContractViolation,
          alg.name() + " returned an out-of-range index");
  require(!view.taken[idx], ErrorCode::ContractViolation,
          alg.name() + " returned an already-selected index");
  return idx;
}

void checkRunRecord(const RunRecord& record, std::size_t q) {
  require(record.output.size() == q, ErrorCode::ContractViolation,
          "run output size differs from the budget");
  for (const LabeledPair& p : record.output) {
    require(!p.response.isHidden(), ErrorCode::ContractViolation,
            "run output contains an unrevealed response");
  }
  require(record.nIter >= record.nSel && record.nSel >= q, ErrorCode::ContractViolation,
          "run counters violate nIter >= nSel >= q");
}

RunRecord runPool(const PoolAlgorithm& alg, std::span<const LabeledPair> pool, std::size_t q) {
  require(q <= pool.size(), ErrorCode::InvalidArgument, "budget exceeds pool size");
  std::vector<Element> elements;
  elements.reserve(pool.size());
  for (const LabeledPair& p : pool) elements.push_back(p.element);
  std::vector<std::uint8_t> taken(pool.size(), 0);

  RunRecord record;
  record.nIter = pool.size();
  for (std::size_t round = 0; round < q; ++round) {
    const PoolView view{elements, taken, record.output};
    const std::size_t idx = checkedSelect(alg, view);
    taken[idx] = 1;
    require(!pool[idx].response.isHidden(), ErrorCode::ContractViolation,
            "pool element has no response to reveal");
    record.output.push_back(pool[idx]);
    ++record.nSel;
  }
  return record;
}

StreamSession::StreamSession(const SourceDistribution& dist, Rng& rng, std::uint64_t maxIter)
    : dist_(dist), rng_(rng), maxIter_(maxIter) {}

const Element& StreamSession::observe() {
  if (record_.nIter >= maxIter_) {
    throw IterationCapError("iteration cap of " + std::to_string(maxIter_) + " reached",
                            record_);
  }
  current_.emplace(dist_.sample(rng_));
  currentSelected_ = false;
  ++record_.nIter;
  return current_->element();
}

LabeledPair StreamSession::select() {
  require(current_.has_value(), ErrorCode::ContractViolation,
          "select called before any element was observed");
  require(!currentSelected_, ErrorCode::ContractViolation,
          "the current element was already selected");
  currentSelected_ = true;
  ++record_.nSel;
  return current_->reveal();
}

void StreamSession::emit(const LabeledPair& pair) {
  require(!pair.response.isHidden(), ErrorCode::ContractViolation,
          "cannot output an element whose response is hidden");
  record_.output.push_back(pair);
}

RunRecord runStream(const StreamAlgorithm& alg, const SourceDistribution& dist, std::size_t q,
                    std::uint64_t maxIter, Rng& rng) {
  require(q >= 1, ErrorCode::InvalidArgument, "budget q must be at least 1");
  StreamSession session(dist, rng, maxIter);
  alg.run(session, q);
  RunRecord record = std::move(session).release();
  checkRunRecord(record, q);
  return record;
}

}  // namespace streamemu
