#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "streamemu/constructions.hpp"
#include "streamemu/emulators.hpp"
#include "streamemu/secretary.hpp"
#include "streamemu/stats.hpp"

using namespace streamemu;

namespace {

std::shared_ptr<const UtilityFunction> greedy() { return std::make_shared<GreedyMaxUtility>(); }

std::shared_ptr<const PoolAlgorithm> greedyPool() {
  return std::make_shared<UtilityPoolAlgorithm>(greedy());
}

SourceDistribution threeSymbols(bool atomless) {
  static const double p[] = {0.25, 0.5, 0.75};
  return SourceDistribution::uniformSymbols(p, atomless);
}

SourceDistribution fourBins() {
  static const double p[] = {0.2, 0.4, 0.6, 0.8};
  return SourceDistribution::uniformInterval(0.0, 1.0, p);
}

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

struct ConstantUtility final : UtilityFunction {
  double score(const Element&, const History&) const override { return 1.0; }
  std::string name() const override { return "constant"; }
};

using Runner = std::function<RunRecord(Rng&)>;

std::vector<RunRecord> runMany(const Runner& run, std::uint64_t trials, std::uint64_t seed) {
  std::vector<RunRecord> out;
  for (const auto& r : stats::runTrials([&](std::uint64_t, Rng& rng) { return run(rng); }, trials, seed)) {
    REQUIRE(r.status == stats::TrialStatus::Ok);
    out.push_back(r.record);
  }
  return out;
}

}  // namespace

TEST_CASE("greedy utility pool: ties between equal elements, errors on distinct ties") {
  const std::vector<LabeledPair> same{{Element::symbol(1), Response::of(0)},
                                      {Element::symbol(1), Response::of(1)}};
  const auto rec = runUtilityPool(greedy(), same, 1);
  CHECK(rec.output[0].response == Response::of(0));
  const std::vector<LabeledPair> distinct{{Element::real(0.1), Response::of(0)},
                                          {Element::real(0.2), Response::of(0)}};
  try {
    (void)runUtilityPool(std::make_shared<ConstantUtility>(), distinct, 1);
    FAIL("expected TieDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TieDetected);
  }
}

TEST_CASE("greedy utility breaks symbol ties by tie-break but keeps symbol order") {
  GreedyMaxUtility u;
  const History h;
  CHECK(u.score(Element::symbol(2, 0.0), h) > u.score(Element::symbol(1, 0.99), h));
  CHECK(u.score(Element::symbol(1, 0.6), h) > u.score(Element::symbol(1, 0.5), h));
  CHECK(u.score(Element::real(0.3, 0.9), h) == 0.3);
}

TEST_CASE("nowait: nIter = nSel = m on every run") {
  const auto d = fourBins();
  for (const auto& r : runMany([&](Rng& rng) { return runANowait(greedyPool(), d, 5, 2, rng); }, 2000, 1)) {
    CHECK(r.nIter == 5);
    CHECK(r.nSel == 5);
    CHECK(r.output.size() == 2);
  }
}

TEST_CASE("nowait output equals the pool algorithm on the first m draws") {
  const auto d = fourBins();
  Rng a(11), b(11);
  const RunRecord s = runANowait(greedyPool(), d, 4, 2, a);
  std::vector<LabeledPair> pool;
  for (int i = 0; i < 4; ++i) pool.push_back(d.sample(b).reveal());
  const RunRecord p = runPool(*greedyPool(), pool, 2);
  CHECK(s.output == p.output);
}

TEST_CASE("wait: requires atoms, selects exactly q") {
  const double two[] = {0.5, 0.5};
  const auto d = SourceDistribution::uniformSymbols(two, false);
  Rng rng(3);
  const RunRecord r = runAWait(greedyPool(), d, 2, 1, rng);
  CHECK(r.nSel == 1);
  try {
    (void)runAWait(greedyPool(), d.withAtomless(true), 2, 1, rng);
    FAIL("expected AtomlessDistribution");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AtomlessDistribution);
  }
  CHECK_THROWS_AS((void)runAWait(greedyPool(), fourBins(), 2, 1, rng), Error);
}

TEST_CASE("wait: point mass recurs immediately") {
  const double one[] = {0.5};
  const auto d = SourceDistribution::uniformSymbols(one, false);
  for (const auto& r : runMany([&](Rng& rng) { return runAWait(greedyPool(), d, 1, 1, rng); }, 1000, 2)) {
    CHECK(r.nIter == 2);
    CHECK(r.nSel == 1);
  }
}

TEST_CASE("wait: geometric waiting time for a named symbol") {
  const double p[] = {0.5, 0.5, 0.5, 0.5};
  const auto d = SourceDistribution::uniformSymbols(p, false);
  std::vector<double> extra;
  for (const auto& r : runMany([&](Rng& rng) { return runAWait(greedyPool(), d, 4, 1, rng); }, 100'000, 3)) {
    extra.push_back(double(r.nIter) - 4.0);
  }
  const double m = mean(extra);
  CHECK(m >= 3.88);
  CHECK(m <= 4.12);
}

TEST_CASE("gen: m = q = 1 accepts the first draw") {
  const auto d = fourBins();
  for (const auto& r : runMany([&](Rng& rng) { return runAGen(greedyPool(), d, 1, 1, rng); }, 500, 4)) {
    CHECK(r.nIter == 1);
    CHECK(r.nSel == 1);
  }
}

TEST_CASE("gen: q = 1 takes m^2 iterations on average") {
  const auto d = fourBins();
  std::vector<double> it;
  for (const auto& r : runMany([&](Rng& rng) { return runAGen(greedyPool(), d, 3, 1, rng); }, 100'000, 5)) {
    it.push_back(double(r.nIter));
  }
  CHECK(mean(it) >= 8.7);
  CHECK(mean(it) <= 9.3);
}

TEST_CASE("gen: needs an atomless source and selects exactly q") {
  Rng rng(6);
  try {
    (void)runAGen(greedyPool(), threeSymbols(false), 3, 2, rng);
    FAIL("expected AtomlessDistribution");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AtomlessDistribution);
  }
  const auto d = threeSymbols(true);
  for (const auto& r : runMany([&](Rng& rng) { return runAGen(greedyPool(), d, 4, 3, rng); }, 2000, 6)) {
    CHECK(r.nSel == 3);
    std::set<Element> seen;
    for (const auto& p : r.output) CHECK(seen.insert(p.element).second);
  }
}

TEST_CASE("gen iteration bound holds for small configurations") {
  const auto d = fourBins();
  for (std::size_t m = 2; m <= 6; ++m) {
    for (std::size_t q = 1; q <= std::min<std::size_t>(3, m); ++q) {
      std::vector<double> it;
      for (const auto& r : runMany([&](Rng& rng) { return runAGen(greedyPool(), d, m, q, rng); }, 4000, 7 * m + q)) {
        it.push_back(double(r.nIter));
      }
      const auto e = stats::meanCI(it);
      CAPTURE(m);
      CAPTURE(q);
      CHECK(e.lower() <= genIterationBound(m, q));
      CHECK(genIterationSum(m, q) <= genIterationBound(m, q) * (1 + 1e-12));
    }
  }
}

TEST_CASE("bound helpers") {
  CHECK(genIterationBound(3, 1) == 9.0);
  CHECK(genIterationBound(4, 2) == doctest::Approx(16.0 * 4.0 * std::exp(1.0)));
  CHECK(genIterationSum(3, 1) == 9.0);
  CHECK(utilitySelectionFormula(4, 2) == doctest::Approx(2.0 * 24.0 / 11.0));
  CHECK(utilityIterationBound(4, 2) == doctest::Approx(24.0 / 11.0 * std::exp(1.0) * 8.0));
  CHECK(std::isinf(utilityIterationBound(3, 3)));
}

TEST_CASE("utility stream: m = q = 1 is a single draw") {
  const auto d = fourBins();
  for (const auto& r : runMany([&](Rng& rng) { return runUtilityStream(greedy(), d, 1, 1, rng); }, 500, 8)) {
    CHECK(r.nIter == 1);
    CHECK(r.nSel == 1);
    REQUIRE(r.attemptsPerRound.size() == 1);
    CHECK(r.attemptsPerRound[0] == 1);
  }
}

TEST_CASE("utility stream: outputs respect the nested domains") {
  const auto d = fourBins();
  const auto u = greedy();
  for (const auto& r : runMany([&](Rng& rng) { return runUtilityStream(u, d, 6, 3, rng); }, 3000, 9)) {
    REQUIRE(r.output.size() == 3);
    CHECK(r.attemptsPerRound.size() == 3);
    for (std::size_t i = 0; i < r.output.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const History prefix(r.output.begin(), r.output.begin() + static_cast<std::ptrdiff_t>(j));
        CHECK(u->score(r.output[i].element, prefix) < u->score(r.output[j].element, prefix));
      }
    }
    std::uint64_t attempts = 0;
    for (auto a : r.attemptsPerRound) attempts += a;
    CHECK(r.nSel <= attempts);
  }
}

TEST_CASE("utility stream: inDomain checks every cut") {
  GreedyMaxUtility u;
  std::vector<DomainCut> cuts{{History{}, 0.8}, {History{}, 0.5}};
  CHECK(inDomain(u, cuts, Element::real(0.4)));
  CHECK_FALSE(inDomain(u, cuts, Element::real(0.6)));
  CHECK(inDomain(u, {}, Element::real(0.99)));
}

TEST_CASE("utility stream iteration bound and per-round attempts") {
  const auto d = fourBins();
  for (std::size_t m = 2; m <= 10; ++m) {
    for (std::size_t q = 1; 2 * q <= m; ++q) {
      const auto runs = runMany([&](Rng& rng) { return runUtilityStream(greedy(), d, m, q, rng); }, 3000, 100 + 11 * m + q);
      std::vector<double> it;
      for (const auto& r : runs) it.push_back(double(r.nIter));
      CAPTURE(m);
      CAPTURE(q);
      CHECK(stats::meanCI(it).upper() < utilityIterationBound(m, q));
    }
  }
  const auto runs = runMany([&](Rng& rng) { return runUtilityStream(greedy(), d, 4, 2, rng); }, 50'000, 12);
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> a;
    for (const auto& r : runs) a.push_back(double(r.attemptsPerRound[i]));
    const double want = 1.0 / secretary::successProbability(secretary::optimalPolicy(4 - i));
    CHECK(std::abs(mean(a) / want - 1.0) < 0.03);
  }
}

TEST_CASE("first-q selects the first q arrivals") {
  const auto d = fourBins();
  Rng rng(13);
  const RunRecord r = runStream(FirstArrivalsSelector{}, d, 3, 100, rng);
  CHECK(r.nIter == 3);
  CHECK(r.nSel == 3);
}

TEST_CASE("every emulator is deterministic given the seed") {
  const auto d = threeSymbols(true);
  const auto w = threeSymbols(false);
  const std::vector<Runner> runners{
      [&](Rng& rng) { return runAWait(greedyPool(), w, 4, 2, rng); },
      [&](Rng& rng) { return runANowait(greedyPool(), d, 4, 2, rng); },
      [&](Rng& rng) { return runAGen(greedyPool(), d, 4, 2, rng); },
      [&](Rng& rng) { return runUtilityStream(greedy(), d, 4, 2, rng); },
  };
  for (const auto& run : runners) {
    for (std::uint64_t k = 0; k < 50; ++k) {
      Rng a = Rng::forTrial(99, k), b = Rng::forTrial(99, k);
      CHECK(run(a) == run(b));
    }
  }
}

TEST_CASE("runs stop at the iteration cap") {
  const auto d = fourBins();
  Rng rng(14);
  CHECK_THROWS_AS((void)runAGen(greedyPool(), d, 6, 3, rng, 10), IterationCapError);
  CHECK_THROWS_AS((void)runUtilityStream(greedy(), d, 6, 3, rng, 3), IterationCapError);
}

// Pools are shuffled and the output multiset must not move; all shipped
// pool algorithms are deterministic, so the match is exact.
TEST_CASE("shipped pool algorithms are permutation invariant") {
  struct Case {
    std::shared_ptr<const PoolAlgorithm> alg;
    std::vector<LabeledPair> pool;
    std::size_t q;
  };
  std::vector<Case> cases;
  cases.push_back({greedyPool(),
                   {{Element::real(0.3), Response::of(1)},
                    {Element::real(0.9), Response::of(0)},
                    {Element::real(0.1), Response::of(1)},
                    {Element::real(0.5), Response::of(0)},
                    {Element::real(0.7), Response::of(1)}},
                   3});
  cases.push_back({greedyPool(),
                   {{Element::symbol(1, 0.2), Response::of(1)},
                    {Element::symbol(1, 0.4), Response::of(0)},
                    {Element::symbol(0, 0.9), Response::of(1)},
                    {Element::symbol(2, 0.1), Response::of(0)}},
                   3});
  for (Label y : {Label{0}, Label{1}}) {
    cases.push_back({std::make_shared<constructions::GoodPoolAlgorithm>(5, 3),
                     {{Element::real(0.2), Response::of(y)},
                      {Element::real(0.6), Response::of(0)},
                      {Element::real(1.7), Response::of(0)},
                      {Element::real(0.4), Response::of(y)},
                      {Element::real(0.9), Response::of(0)}},
                     3});
  }
  cases.push_back({std::make_shared<constructions::GoodPoolAlgorithm>(4, 2),
                   {{Element::real(0.2), Response::of(0)},
                    {Element::real(1.6), Response::of(0)},
                    {Element::real(1.3), Response::of(0)},
                    {Element::real(0.4), Response::of(0)}},
                   2});
  {
    const auto chain = constructions::makeChainUtility(8, 2);
    std::vector<LabeledPair> pool;
    for (Symbol s = 0; s < 3; ++s) pool.push_back({Element::symbol(s, 0.1 * (s + 1)), Response::of(s == 0)});
    pool.push_back({Element::symbol(1, 0.95), Response::of(0)});
    cases.push_back({std::make_shared<UtilityPoolAlgorithm>(chain.utility), pool, 2});
  }
  {
    auto hyp = std::make_shared<const constructions::HypothesisClass>(3, 2, 6);
    std::vector<LabeledPair> pool;
    for (Symbol s = 0; s < 5; ++s) pool.push_back({Element::symbol(s), Response::of(hyp->evaluate(5, s))});
    cases.push_back({std::make_shared<constructions::BitLearner>(hyp), pool, 3});
  }

  Rng rng(15);
  for (const auto& c : cases) {
    const auto ref = runPool(*c.alg, c.pool, c.q).output;
    const std::multiset<LabeledPair> want(ref.begin(), ref.end());
    auto pool = c.pool;
    for (int trial = 0; trial < 10'000; ++trial) {
      for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
      const auto out = runPool(*c.alg, pool, c.q).output;
      const std::multiset<LabeledPair> got(out.begin(), out.end());
      REQUIRE(got == want);
    }
  }
}
