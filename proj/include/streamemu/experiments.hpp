#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamemu/core.hpp"
#include "streamemu/emulators.hpp"

namespace streamemu::experiments {

/// Flat key=value experiment configuration. Unknown keys are rejected.
class Config {
 public:
  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Lines of key=value; blank lines and '#' comments are skipped.
  void loadText(std::string_view text);
  void loadFile(const std::string& path);

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
  [[nodiscard]] std::string getString(const std::string& key) const;
  [[nodiscard]] std::uint64_t getU64(const std::string& key) const;
  [[nodiscard]] double getDouble(const std::string& key) const;
  [[nodiscard]] std::vector<std::uint64_t> getList(const std::string& key) const;

  /// Every known key with its value or default, excluding ones that cannot
  /// change results (threads, out).
  [[nodiscard]] std::map<std::string, std::string> resolved() const;

  static const std::vector<std::string>& knownKeys();

 private:
  std::map<std::string, std::string> values_;
};

struct Report {
  std::string csv;
  bool failed = false;
};

/// A pool algorithm with the source it is exercised on.
struct Fixture {
  std::string name;
  std::shared_ptr<const PoolAlgorithm> pool;
  std::shared_ptr<const UtilityFunction> utility;  // set for utility-based fixtures
  std::shared_ptr<const SourceDistribution> dist;
};

/// Fixture names: greedy-max, greedy-max-discrete, thm3-good-pool,
/// thm6-chain, ex1-hypotheses. The emulator name picks the atom setting for
/// discrete sources (wait needs atoms).
Fixture makeFixture(const std::string& name, std::size_t m, std::size_t q,
                    const std::string& emulator, const Config& config);

/// Emulator names: pool, wait, nowait, gen, utility-stream, first-q.
/// Returns a per-trial runner for the fixture.
using Runner = std::function<RunRecord(Rng&)>;
Runner makeRunner(const std::string& emulator, const Fixture& fixture, std::size_t m,
                  std::size_t q, std::uint64_t maxIter);

Report equivTest(const Config& config);
Report iterBench(const Config& config);
Report secretaryTable(const Config& config);
Report lowerboundDemo(const Config& config);

/// Dispatches equiv-test, iter-bench, secretary-table, lowerbound-demo.
Report runCommand(std::string_view command, const Config& config);

/// %.12g formatting used in every report.
std::string formatNumber(double value);

}  // namespace streamemu::experiments
