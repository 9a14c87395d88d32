#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "streamemu/errors.hpp"
#include "streamemu/rng.hpp"

namespace streamemu {

using Symbol = std::uint32_t;
using Label = std::uint8_t;

/// A domain point: a discrete symbol or a real value, plus a tie-break
/// coordinate in [0,1) that makes discrete sources atomless when enabled.
class Element {
 public:
  static Element symbol(Symbol s, double tiebreak = 0.0);
  static Element real(double value, double tiebreak = 0.0);

  [[nodiscard]] bool isSymbol() const noexcept {
    return std::holds_alternative<Symbol>(base_);
  }
  [[nodiscard]] Symbol symbolValue() const;
  [[nodiscard]] double realValue() const;
  /// Symbol index or real value as a double.
  [[nodiscard]] double numeric() const noexcept;
  [[nodiscard]] double tiebreak() const noexcept { return tiebreak_; }

  [[nodiscard]] std::string toString() const;

  // Bitwise equality on real coordinates; elements are sampled, never computed.
  friend bool operator==(const Element& a, const Element& b) noexcept;
  friend std::strong_ordering operator<=>(const Element& a, const Element& b) noexcept;

 private:
  Element(std::variant<Symbol, double> base, double tiebreak);

  std::variant<Symbol, double> base_;
  double tiebreak_ = 0.0;
};

/// A response value, or the "not yet revealed" sentinel.
class Response {
 public:
  constexpr Response() noexcept = default;
  static constexpr Response hidden() noexcept { return Response(); }
  static constexpr Response of(Label label) noexcept { return Response(label); }

  [[nodiscard]] constexpr bool isHidden() const noexcept { return value_ < 0; }
  [[nodiscard]] Label label() const;

  friend constexpr bool operator==(Response, Response) noexcept = default;
  friend constexpr auto operator<=>(Response, Response) noexcept = default;

 private:
  constexpr explicit Response(Label label) noexcept : value_(label) {}
  std::int16_t value_ = -1;
};

struct LabeledPair {
  Element element;
  Response response;

  friend bool operator==(const LabeledPair&, const LabeledPair&) noexcept = default;
  friend std::strong_ordering operator<=>(const LabeledPair& a, const LabeledPair& b) noexcept;
};

/// Ordered selection history.
using History = std::vector<LabeledPair>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// One piece of a marginal: an atom on a symbol or a uniform density on an
/// interval, with its own response law. Cells sharing a group are merged
/// when outcomes are canonicalized.
struct Cell {
  std::variant<Symbol, Interval> support;
  double mass = 0.0;
  std::vector<double> responseProbs;
  std::uint32_t group = 0;
};

/// An element drawn together with its response, which stays sealed until a
/// run loop selects the element.
class SampledPair {
 public:
  SampledPair(Element element, Label sealedLabel)
      : element_(element), sealed_(sealedLabel) {}

  [[nodiscard]] const Element& element() const noexcept { return element_; }
  [[nodiscard]] LabeledPair reveal() const { return {element_, Response::of(sealed_)}; }

 private:
  Element element_;
  Label sealed_;
};

class SourceDistribution {
 public:
  SourceDistribution(std::vector<Cell> cells, bool atomless, std::size_t labelCount = 2);

  /// Uniform over symbols 0..n-1; probOne[s] is P[y=1 | s] (binary responses).
  static SourceDistribution uniformSymbols(std::span<const double> probOne, bool atomless);
  /// Uniform on [lo,hi) cut into probOne.size() equal cells, one group each.
  static SourceDistribution uniformInterval(double lo, double hi,
                                            std::span<const double> probOne);

  [[nodiscard]] std::span<const Cell> cells() const noexcept { return cells_; }
  [[nodiscard]] bool atomless() const noexcept { return atomless_; }
  [[nodiscard]] std::size_t labelCount() const noexcept { return labelCount_; }
  /// True when every cell is a symbol atom.
  [[nodiscard]] bool isDiscrete() const noexcept;
  [[nodiscard]] std::uint32_t groupCount() const noexcept;

  [[nodiscard]] SampledPair sample(Rng& rng) const;

  [[nodiscard]] std::size_t cellOf(const Element& e) const;
  [[nodiscard]] std::uint32_t groupOf(const Element& e) const { return cells_[cellOf(e)].group; }

  /// The rank-th of `count` points inside cell `cell`, strictly increasing in
  /// rank (through the tie-break coordinate for atoms). Used by exact enumeration.
  [[nodiscard]] Element representative(std::size_t cell, std::size_t rank,
                                       std::size_t count) const;

  [[nodiscard]] SourceDistribution withAtomless(bool atomless) const;

 private:
  std::vector<Cell> cells_;
  std::vector<double> cumulative_;
  bool atomless_;
  std::size_t labelCount_;
};

/// Draws (x, y) ~ D with y sealed.
SampledPair sampleElement(const SourceDistribution& dist, Rng& rng);

/// What a pool algorithm may look at: element values, which indices are
/// already taken, and the revealed history.
struct PoolView {
  std::span<const Element> elements;
  std::span<const std::uint8_t> taken;
  const History& history;
};

/// A black-box pool-based interactive algorithm. Must be permutation
/// invariant and never return a taken index.
class PoolAlgorithm {
 public:
  virtual ~PoolAlgorithm() = default;
  [[nodiscard]] virtual std::size_t selectNext(const PoolView& view) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Calls alg.selectNext and rejects out-of-range or repeated indices.
std::size_t checkedSelect(const PoolAlgorithm& alg, const PoolView& view);

struct RunRecord {
  History output;
  std::uint64_t nSel = 0;
  std::uint64_t nIter = 0;
  /// Secretary attempts per round; only the utility stream emulator fills it.
  std::vector<std::uint64_t> attemptsPerRound;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Throws ContractViolation unless |output| = q, all responses revealed and
/// nIter >= nSel >= q.
void checkRunRecord(const RunRecord& record, std::size_t q);

class IterationCapError : public Error {
 public:
  IterationCapError(const std::string& message, RunRecord partial)
      : Error(ErrorCode::IterationCapExceeded, message), partial_(std::move(partial)) {}
  [[nodiscard]] const RunRecord& partial() const noexcept { return partial_; }

 private:
  RunRecord partial_;
};

/// Executes q rounds of the pool protocol. nIter = m, nSel = q.
RunRecord runPool(const PoolAlgorithm& alg, std::span<const LabeledPair> pool, std::size_t q);

inline constexpr std::uint64_t kDefaultMaxIter = 100'000'000;

/// The stream side of an interaction: elements arrive one at a time and can
/// only be selected right after being observed.
class StreamSession {
 public:
  StreamSession(const SourceDistribution& dist, Rng& rng, std::uint64_t maxIter);

  /// Draws and observes the next stream element.
  const Element& observe();
  /// Selects the element just observed and reveals its response.
  LabeledPair select();
  /// Adds a pair to the algorithm's output.
  void emit(const LabeledPair& pair);
  void recordAttempts(std::uint64_t attempts) { record_.attemptsPerRound.push_back(attempts); }

  [[nodiscard]] std::uint64_t nIter() const noexcept { return record_.nIter; }
  [[nodiscard]] std::uint64_t nSel() const noexcept { return record_.nSel; }
  [[nodiscard]] const SourceDistribution& distribution() const noexcept { return dist_; }
  [[nodiscard]] RunRecord release() && { return std::move(record_); }

 private:
  const SourceDistribution& dist_;
  Rng& rng_;
  std::uint64_t maxIter_;
  RunRecord record_;
  std::optional<SampledPair> current_;
  bool currentSelected_ = false;
};

class StreamAlgorithm {
 public:
  virtual ~StreamAlgorithm() = default;
  virtual void run(StreamSession& session, std::size_t q) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Drives a stream algorithm on an i.i.d. stream from dist and validates the
/// resulting record. Throws IterationCapError when maxIter would be exceeded.
RunRecord runStream(const StreamAlgorithm& alg, const SourceDistribution& dist,
                    std::size_t q, std::uint64_t maxIter, Rng& rng);

}  // namespace streamemu
