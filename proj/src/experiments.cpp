#include "streamemu/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "streamemu/constructions.hpp"
#include "streamemu/secretary.hpp"
#include "streamemu/stats.hpp"

namespace streamemu::experiments {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"fixture", "greedy-max"},
      {"emulator", "utility-stream"},
      {"m", "4"},
      {"q", "2"},
      {"trials", "10000"},
      {"seed", "1"},
      {"max-iter", std::to_string(kDefaultMaxIter)},
      {"threshold", "0.02"},
      {"threads", "0"},
      {"t", "0"},
      {"target", "0"},
      {"T", "0"},
      {"n-min", "1"},
      {"n-max", "100"},
      {"n-step", "1"},
      {"n-values", ""},
      {"thm3-m", "2,4,8,16"},
      {"thm6-m", "8,16"},
      {"out", ""},
  };
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parseU64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // accept scientific forms like 2e5 for counts
  if (text.find_first_of("eE") != std::string::npos) {
    char* end = nullptr;
    const double d = std::strtod(text.c_str(), &end);
    require(end == text.c_str() + text.size() && d >= 0 && d == std::floor(d) && d < 1.8e19,
            ErrorCode::ConfigError, "'" + key + "' expects a non-negative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(d);
  }
  auto [ptr, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && ptr == last && !text.empty(), ErrorCode::ConfigError,
          "'" + key + "' expects a non-negative integer, got '" + text + "'");
  return v;
}

std::string csvHeader(std::string_view command, const Config& config) {
  std::string out = "# streamemu ";
  out += command;
  out += "\n# config:";
  for (const auto& [k, v] : config.resolved()) {
    out += ' ';
    out += k;
    out += '=';
    out += v.empty() ? "-" : v;
  }
  out += '\n';
  return out;
}

std::size_t toSize(std::uint64_t v) { return static_cast<std::size_t>(v); }

struct BatchSummary {
  std::vector<stats::TrialResult> results;
  std::vector<std::uint64_t> capped;
  std::vector<double> nIter;
  std::vector<double> nSel;
};

BatchSummary runBatch(const Runner& runner, std::uint64_t trials, std::uint64_t seed,
                      unsigned threads) {
  BatchSummary s;
  s.results = stats::runTrials([&](std::uint64_t, Rng& rng) { return runner(rng); }, trials,
                               seed, threads);
  for (std::uint64_t k = 0; k < s.results.size(); ++k) {
    const auto& r = s.results[k];
    if (r.status == stats::TrialStatus::Capped) {
      s.capped.push_back(k);
      continue;
    }
    s.nIter.push_back(static_cast<double>(r.record.nIter));
    s.nSel.push_back(static_cast<double>(r.record.nSel));
  }
  return s;
}

stats::MeanEstimate estimate(const std::vector<double>& xs) {
  if (xs.size() >= 2) return stats::meanCI(xs);
  return stats::MeanEstimate{xs.empty() ? 0.0 : xs.front(), 0.0, xs.size()};
}

std::size_t defaultT(std::size_t q) {
  std::size_t T = 0;
  while ((std::size_t{1} << T) < q) ++T;
  return std::max<std::size_t>(T, 1);
}

}  // namespace

std::string formatNumber(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

// ------------------------------------------------------------------ Config

const std::vector<std::string>& Config::knownKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, _] : defaults()) k.push_back(key);
    return k;
  }();
  return keys;
}

void Config::set(const std::string& key, const std::string& value) {
  require(defaults().contains(key), ErrorCode::ConfigError, "unknown config key '" + key + "'");
  values_[key] = trim(value);
}

void Config::loadText(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError,
            "config line " + std::to_string(lineNo) + " is not key=value");
    set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
}

void Config::loadFile(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigError, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  loadText(buf.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (auto it = defaults().find(key); it != defaults().end()) return it->second;
  return std::nullopt;
}

std::string Config::getString(const std::string& key) const {
  auto v = get(key);
  require(v.has_value(), ErrorCode::ConfigError, "unknown config key '" + key + "'");
  return *v;
}

std::uint64_t Config::getU64(const std::string& key) const {
  return parseU64(key, getString(key));
}

double Config::getDouble(const std::string& key) const {
  const std::string text = getString(key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  require(!text.empty() && end == text.c_str() + text.size() && std::isfinite(v),
          ErrorCode::ConfigError, "'" + key + "' expects a number, got '" + text + "'");
  return v;
}

std::vector<std::uint64_t> Config::getList(const std::string& key) const {
  std::vector<std::uint64_t> out;
  std::stringstream in(getString(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parseU64(key, t));
  }
  return out;
}

std::map<std::string, std::string> Config::resolved() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : defaults()) {
    if (k == "threads" || k == "out") continue;
    out[k] = values_.contains(k) ? values_.at(k) : v;
  }
  return out;
}

// ---------------------------------------------------------------- fixtures

Fixture makeFixture(const std::string& name, std::size_t m, std::size_t q,
                    const std::string& emulator, const Config& config) {
  require(q >= 1 && q <= m, ErrorCode::ConfigError, "need 1 <= q <= m");
  const bool atoms = emulator == "wait";
  Fixture f;
  f.name = name;
  if (name == "greedy-max") {
    static const double probOne[] = {0.2, 0.4, 0.6, 0.8};
    f.utility = std::make_shared<const GreedyMaxUtility>();
    f.dist = std::make_shared<const SourceDistribution>(
        SourceDistribution::uniformInterval(0.0, 1.0, probOne));
  } else if (name == "greedy-max-discrete") {
    static const double probOne[] = {0.25, 0.5, 0.75};
    f.utility = std::make_shared<const GreedyMaxUtility>();
    f.dist = std::make_shared<const SourceDistribution>(
        SourceDistribution::uniformSymbols(probOne, !atoms));
  } else if (name == "thm3-good-pool") {
    f.pool = std::make_shared<const constructions::GoodPoolAlgorithm>(m, q);
    f.dist = std::make_shared<const SourceDistribution>(
        constructions::makeGoodPoolMarginal(m, 3, 0.0));
  } else if (name == "thm6-chain") {
    const auto chain = constructions::makeChainUtility(m, q);
    f.utility = chain.utility;
    f.dist = std::make_shared<const SourceDistribution>(
        chain.distribution(toSize(config.getU64("t"))).withAtomless(!atoms));
  } else if (name == "ex1-hypotheses") {
    std::size_t T = toSize(config.getU64("T"));
    if (T == 0) T = defaultT(q);
    T = std::min(T, q);
    const auto formulaN = static_cast<std::size_t>(
        std::floor(static_cast<double>(m) / (7.0 * std::log(2.0 * static_cast<double>(q)))));
    const std::size_t n = std::max(q * (std::size_t{1} << (T - 1)), formulaN);
    auto hyp = std::make_shared<const constructions::HypothesisClass>(q, T, n);
    const std::uint64_t target = config.getU64("target");
    require(target < hyp->hypothesisCount(), ErrorCode::ConfigError,
            "target must be below 2^q");
    f.pool = std::make_shared<const constructions::BitLearner>(hyp, false);
    f.dist = std::make_shared<const SourceDistribution>(hyp->distribution(target, !atoms));
  } else {
    fail(ErrorCode::ConfigError, "unknown fixture '" + name + "'");
  }
  if (f.utility && !f.pool) f.pool = std::make_shared<const UtilityPoolAlgorithm>(f.utility);
  return f;
}

Runner makeRunner(const std::string& emulator, const Fixture& fixture, std::size_t m,
                  std::size_t q, std::uint64_t maxIter) {
  std::shared_ptr<const StreamAlgorithm> alg;
  if (emulator == "pool") {
    return [fixture, m, q](Rng& rng) {
      std::vector<LabeledPair> pool;
      pool.reserve(m);
      for (std::size_t j = 0; j < m; ++j) pool.push_back(fixture.dist->sample(rng).reveal());
      return runPool(*fixture.pool, pool, q);
    };
  }
  if (emulator == "wait") {
    require(!fixture.dist->atomless() && fixture.dist->isDiscrete(), ErrorCode::AtomlessDistribution,
            "the wait emulator needs a source with atoms; fixture '" + fixture.name + "' has none");
    alg = std::make_shared<const WaitEmulator>(fixture.pool, m);
  } else if (emulator == "nowait") {
    alg = std::make_shared<const NowaitEmulator>(fixture.pool, m);
  } else if (emulator == "gen") {
    require(fixture.dist->atomless(), ErrorCode::AtomlessDistribution,
            "the gen emulator needs an atomless source");
    alg = std::make_shared<const GenEmulator>(fixture.pool, m);
  } else if (emulator == "utility-stream") {
    require(fixture.utility != nullptr, ErrorCode::ConfigError,
            "fixture '" + fixture.name + "' is not utility-based");
    alg = std::make_shared<const UtilityStreamEmulator>(fixture.utility, m);
  } else if (emulator == "first-q") {
    alg = std::make_shared<const FirstArrivalsSelector>();
  } else {
    fail(ErrorCode::ConfigError, "unknown emulator '" + emulator + "'");
  }
  return [alg, dist = fixture.dist, q, maxIter](Rng& rng) {
    return runStream(*alg, *dist, q, maxIter, rng);
  };
}

// ---------------------------------------------------------------- commands

Report equivTest(const Config& config) {
  const std::size_t m = toSize(config.getU64("m"));
  const std::size_t q = toSize(config.getU64("q"));
  const std::string emulator = config.getString("emulator");
  const Fixture fixture = makeFixture(config.getString("fixture"), m, q, emulator, config);
  const double threshold = config.getDouble("threshold");

  const stats::OutcomeDistribution exact =
      stats::exactPoolDistribution(*fixture.pool, *fixture.dist, m, q);
  const Runner runner = makeRunner(emulator, fixture, m, q, config.getU64("max-iter"));
  const BatchSummary batch = runBatch(runner, config.getU64("trials"), config.getU64("seed"),
                                      static_cast<unsigned>(config.getU64("threads")));

  Report report;
  report.csv = csvHeader("equiv-test", config);
  report.csv += "kind,outcome,exact_mass,empirical_mass,status\n";
  const bool anyOk = batch.capped.size() < batch.results.size();
  stats::OutcomeDistribution empirical;
  if (anyOk) empirical = stats::distributionOf(batch.results, *fixture.dist);

  std::map<stats::Outcome, std::pair<double, double>> rows;
  for (const auto& [o, p] : exact.masses()) rows[o].first = p;
  for (const auto& [o, p] : empirical.masses()) rows[o].second = p;
  for (const auto& [o, pq] : rows) {
    report.csv += "outcome," + stats::outcomeId(o) + "," + formatNumber(pq.first) + "," +
                  formatNumber(pq.second) + ",\n";
  }
  for (std::uint64_t k : batch.capped) {
    report.csv += "trial," + std::to_string(k) + ",,,CAPPED\n";
  }
  const double tv = anyOk ? stats::tvDistance(exact, empirical) : 1.0;
  const bool tvPass = anyOk && tv <= threshold;
  report.csv += "summary,tv," + formatNumber(tv) + "," + formatNumber(threshold) + "," +
                (tvPass ? "PASS" : "FAIL") + "\n";
  report.csv += "summary,capped_trials," + std::to_string(batch.capped.size()) + ",0," +
                (batch.capped.empty() ? "PASS" : "FAIL") + "\n";
  report.failed = !tvPass || !batch.capped.empty();
  return report;
}

Report iterBench(const Config& config) {
  const std::size_t m = toSize(config.getU64("m"));
  const std::size_t q = toSize(config.getU64("q"));
  const std::string emulator = config.getString("emulator");
  const Fixture fixture = makeFixture(config.getString("fixture"), m, q, emulator, config);
  const std::uint64_t trials = config.getU64("trials");
  const BatchSummary batch = runBatch(makeRunner(emulator, fixture, m, q, config.getU64("max-iter")),
                                      trials, config.getU64("seed"),
                                      static_cast<unsigned>(config.getU64("threads")));

  Report report;
  report.csv = csvHeader("iter-bench", config);
  report.csv += "kind,metric,mean,ci_half_width,trials,reference,status\n";
  auto row = [&](const std::string& metric, const stats::MeanEstimate& e,
                 std::optional<double> reference, const std::string& status) {
    report.csv += "estimate," + metric + "," + formatNumber(e.mean) + "," +
                  formatNumber(e.halfWidth) + "," + std::to_string(e.trialCount) + "," +
                  (reference ? formatNumber(*reference) : std::string()) + "," + status + "\n";
    if (status == "FAIL") report.failed = true;
  };
  auto exactCounter = [&](const std::vector<double>& xs, double expected) {
    const bool ok = std::all_of(xs.begin(), xs.end(), [&](double x) { return x == expected; });
    return std::string(ok ? "PASS" : "FAIL");
  };
  // a bound is violated only when the whole confidence interval lies above it
  auto bound = [](const stats::MeanEstimate& e, double b) {
    return std::string(e.lower() > b ? "FAIL" : "PASS");
  };
  auto within = [](double value, double reference, double rel) {
    return std::abs(value - reference) <= rel * std::abs(reference);
  };

  const auto iter = estimate(batch.nIter);
  const auto sel = estimate(batch.nSel);
  const auto md = static_cast<double>(m);
  const auto qd = static_cast<double>(q);
  if (emulator == "gen") {
    row("n_iter", iter, genIterationBound(m, q), bound(iter, genIterationBound(m, q)));
    if (q == 1) {
      row("n_iter_vs_m_squared", iter, md * md, within(iter.mean, md * md, 0.05) ? "PASS" : "FAIL");
    }
    row("n_sel", sel, qd, exactCounter(batch.nSel, qd));
  } else if (emulator == "utility-stream") {
    row("n_iter", iter, utilityIterationBound(m, q), bound(iter, utilityIterationBound(m, q)));
    const double formula = utilitySelectionFormula(m, q);
    row("n_sel", sel, formula, within(sel.mean, formula, 0.03) ? "PASS" : "DEVIATES");
    // expectation under per-round horizons, where an attempt selects with
    // probability 1 - (r-1)/n and succeeds with probability p_sp(n)
    double expectedSel = 0.0;
    for (std::size_t i = 1; i <= q; ++i) {
      const auto policy = secretary::optimalPolicy(m - i + 1);
      expectedSel += secretary::selectionProbability(policy) / secretary::successProbability(policy);
    }
    row("n_sel_per_round_horizon", sel, expectedSel,
        within(sel.mean, expectedSel, 0.03) ? "PASS" : "FAIL");
    for (std::size_t i = 1; i <= q; ++i) {
      std::vector<double> attempts;
      for (const auto& r : batch.results) {
        if (r.status == stats::TrialStatus::Ok) {
          attempts.push_back(static_cast<double>(r.record.attemptsPerRound.at(i - 1)));
        }
      }
      const auto e = estimate(attempts);
      const double ref = 1.0 / secretary::successProbability(secretary::optimalPolicy(m - i + 1));
      row("attempts_round_" + std::to_string(i), e, ref, within(e.mean, ref, 0.03) ? "PASS" : "FAIL");
    }
  } else if (emulator == "nowait") {
    row("n_iter", iter, md, exactCounter(batch.nIter, md));
    row("n_sel", sel, md, exactCounter(batch.nSel, md));
  } else if (emulator == "wait") {
    row("n_iter", iter, std::nullopt, "INFO");
    row("n_sel", sel, qd, exactCounter(batch.nSel, qd));
  } else if (emulator == "pool") {
    row("n_iter", iter, md, exactCounter(batch.nIter, md));
    row("n_sel", sel, qd, exactCounter(batch.nSel, qd));
  } else {
    row("n_iter", iter, std::nullopt, "INFO");
    row("n_sel", sel, std::nullopt, "INFO");
  }
  for (std::uint64_t k : batch.capped) {
    report.csv += "trial,capped," + std::to_string(batch.results[k].record.nIter) + ",," +
                  std::to_string(k) + ",,CAPPED\n";
  }
  report.csv += "summary,capped_trials," + std::to_string(batch.capped.size()) + ",," +
                std::to_string(trials) + ",0," + (batch.capped.empty() ? "PASS" : "FAIL") + "\n";
  if (!batch.capped.empty()) report.failed = true;
  return report;
}

Report secretaryTable(const Config& config) {
  std::vector<std::uint64_t> ns = config.getList("n-values");
  if (ns.empty()) {
    const std::uint64_t lo = config.getU64("n-min");
    const std::uint64_t hi = config.getU64("n-max");
    const std::uint64_t step = config.getU64("n-step");
    require(step >= 1, ErrorCode::ConfigError, "n-step must be positive");
    for (std::uint64_t n = lo; n <= hi; n += step) ns.push_back(n);
  }
  for (std::uint64_t n : ns) {
    require(n <= 100'000, ErrorCode::ConfigError, "secretary table horizons are capped at 1e5");
  }
  Report report;
  report.csv = csvHeader("secretary-table", config);
  report.csv += "n,threshold,p_sp\n";
  for (std::uint64_t n : ns) {
    const auto policy = secretary::optimalPolicy(n);
    report.csv += std::to_string(n) + "," + std::to_string(policy.threshold) + "," +
                  formatNumber(secretary::successProbability(policy)) + "\n";
  }
  return report;
}

Report lowerboundDemo(const Config& config) {
  const std::size_t q = toSize(config.getU64("q"));
  const std::uint64_t trials = config.getU64("trials");
  const std::uint64_t seed = config.getU64("seed");
  const std::uint64_t maxIter = config.getU64("max-iter");
  const auto threads = static_cast<unsigned>(config.getU64("threads"));
  require(q >= 1 && q <= 4, ErrorCode::ConfigError, "lowerbound-demo supports 1 <= q <= 4");

  Report report;
  report.csv = csvHeader("lowerbound-demo", config);
  report.csv +=
      "fixture,emulator,m,q,trials,mean_n_iter,ci_half_width,lower_reference,upper_bound,capped,status\n";

  auto emit = [&](const std::string& fixture, const std::string& emulator, std::size_t m,
                  const BatchSummary& batch, const stats::MeanEstimate& e,
                  std::optional<double> lower, std::optional<double> upper, bool pass) {
    const bool ok = pass && batch.capped.empty();
    report.csv += fixture + "," + emulator + "," + std::to_string(m) + "," + std::to_string(q) +
                  "," + std::to_string(trials) + "," + formatNumber(e.mean) + "," +
                  formatNumber(e.halfWidth) + "," + (lower ? formatNumber(*lower) : "") + "," +
                  (upper ? formatNumber(*upper) : "") + "," + std::to_string(batch.capped.size()) +
                  "," + (ok ? "PASS" : "FAIL") + "\n";
    if (!ok) report.failed = true;
  };

  std::vector<std::uint64_t> goodPoolSizes = config.getList("thm3-m");
  std::sort(goodPoolSizes.begin(), goodPoolSizes.end());
  std::optional<double> previous;
  for (std::uint64_t mv : goodPoolSizes) {
    const std::size_t m = toSize(mv);
    require(m >= 2 && m >= q && m <= 20, ErrorCode::ConfigError,
            "thm3-m entries must satisfy max(2,q) <= m <= 20");
    const Fixture f = makeFixture("thm3-good-pool", m, q, "gen", config);
    const BatchSummary batch = runBatch(makeRunner("gen", f, m, q, maxIter), trials, seed, threads);
    const auto e = estimate(batch.nIter);
    const bool increasing = !previous || e.mean > *previous;
    emit("thm3-good-pool", "gen", m, batch, e, previous, genIterationBound(m, q), increasing);
    previous = e.mean;
  }
  std::vector<std::uint64_t> chainSizes = config.getList("thm6-m");
  std::sort(chainSizes.begin(), chainSizes.end());
  for (std::uint64_t mv : chainSizes) {
    const std::size_t m = toSize(mv);
    require(m >= 8 && 2 * q <= m && m <= 20, ErrorCode::ConfigError,
            "thm6-m entries must satisfy 8 <= m <= 20 and q <= m/2");
    const Fixture f = makeFixture("thm6-chain", m, q, "utility-stream", config);
    const auto chain = constructions::makeChainUtility(m, q);
    const BatchSummary batch =
        runBatch(makeRunner("utility-stream", f, m, q, maxIter), trials, seed, threads);
    const auto e = estimate(batch.nIter);
    const double lower = chain.iterationLowerBound();
    emit("thm6-chain", "utility-stream", m, batch, e, lower, utilityIterationBound(m, q),
         e.mean >= lower);
  }
  return report;
}

Report runCommand(std::string_view command, const Config& config) {
  if (command == "equiv-test") return equivTest(config);
  if (command == "iter-bench") return iterBench(config);
  if (command == "secretary-table") return secretaryTable(config);
  if (command == "lowerbound-demo") return lowerboundDemo(config);
  fail(ErrorCode::ConfigError, "unknown command '" + std::string(command) + "'");
}

}  // namespace streamemu::experiments
