#include "streamemu/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace streamemu::stats {

Outcome canonicalize(const History& output, const SourceDistribution& dist) {
  Outcome out;
  out.reserve(output.size());
  for (const LabeledPair& p : output) {
    out.push_back(CanonicalPair{dist.groupOf(p.element), p.response.label()});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome canonicalize(Outcome outcome) {
  std::sort(outcome.begin(), outcome.end());
  return outcome;
}

std::string outcomeId(const Outcome& outcome) {
  std::string id;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (i) id += ';';
    id += std::to_string(outcome[i].group);
    id += ':';
    id += std::to_string(static_cast<unsigned>(outcome[i].label));
  }
  return id.empty() ? "-" : id;
}

OutcomeDistribution::OutcomeDistribution(DistributionKind kind,
                                         std::map<Outcome, double> masses,
                                         std::uint64_t trials)
    : kind_(kind), masses_(std::move(masses)), trials_(trials) {}

double OutcomeDistribution::mass(const Outcome& outcome) const {
  auto it = masses_.find(outcome);
  return it == masses_.end() ? 0.0 : it->second;
}

double OutcomeDistribution::totalMass() const {
  double total = 0.0;
  for (const auto& [_, m] : masses_) total += m;
  return total;
}

OutcomeDistribution OutcomeDistribution::fromCounts(
    const std::map<Outcome, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  require(total > 0, ErrorCode::InvalidArgument, "empirical distribution needs samples");
  std::map<Outcome, double> masses;
  for (const auto& [o, c] : counts) {
    masses.emplace(o, static_cast<double>(c) / static_cast<double>(total));
  }
  return OutcomeDistribution(DistributionKind::Empirical, std::move(masses), total);
}

// -------------------------------------------------------- exact enumeration

OutcomeDistribution exactPoolDistribution(const PoolAlgorithm& alg,
                                          const SourceDistribution& dist, std::size_t m,
                                          std::size_t q, const PoolEvent& event) {
  require(q <= m && m >= 1, ErrorCode::InvalidArgument, "need 1 <= m and q <= m");
  const std::span<const Cell> cells = dist.cells();
  const std::size_t cellCount = cells.size();
  const std::size_t labelCount = dist.labelCount();
  const double size = std::pow(static_cast<double>(cellCount), static_cast<double>(m)) *
                      std::pow(static_cast<double>(labelCount), static_cast<double>(m));
  require(size <= kMaxEnumeration, ErrorCode::TooLargeToEnumerate,
          "joint pool space of " + std::to_string(size) + " configurations is too large");

  std::map<Outcome, double> masses;
  double eventMass = 0.0;
  std::vector<std::size_t> cellOf(m, 0);
  std::vector<std::size_t> counts(cellCount);
  std::vector<std::size_t> seen(cellCount);
  std::vector<Element> elements;
  std::vector<LabeledPair> pool;
  std::vector<std::vector<Label>> choices(m);
  std::vector<std::size_t> pick(m);

  for (;;) {
    double weight = 1.0;
    for (std::size_t j = 0; j < m; ++j) weight *= cells[cellOf[j]].mass;

    if (weight > 0.0) {
      std::fill(counts.begin(), counts.end(), 0);
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t c : cellOf) ++counts[c];
      elements.clear();
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = cellOf[j];
        elements.push_back(dist.representative(c, seen[c]++, counts[c]));
      }
      if (!event || event(elements)) {
        eventMass += weight;
        for (std::size_t j = 0; j < m; ++j) {
          choices[j].clear();
          for (std::size_t y = 0; y < labelCount; ++y) {
            if (cells[cellOf[j]].responseProbs[y] > 0.0) choices[j].push_back(static_cast<Label>(y));
          }
        }
        std::fill(pick.begin(), pick.end(), 0);
        for (;;) {
          double w = weight;
          pool.clear();
          for (std::size_t j = 0; j < m; ++j) {
            const Label y = choices[j][pick[j]];
            w *= cells[cellOf[j]].responseProbs[y];
            pool.push_back(LabeledPair{elements[j], Response::of(y)});
          }
          masses[canonicalize(runPool(alg, pool, q).output, dist)] += w;
          std::size_t j = 0;
          while (j < m && ++pick[j] == choices[j].size()) pick[j++] = 0;
          if (j == m) break;
        }
      }
    }

    std::size_t j = 0;
    while (j < m && ++cellOf[j] == cellCount) cellOf[j++] = 0;
    if (j == m) break;
  }

  require(eventMass > 0.0, ErrorCode::InvalidArgument, "conditioning event has zero probability");
  for (auto& [_, mass] : masses) mass /= eventMass;
  return OutcomeDistribution(DistributionKind::Exact, std::move(masses));
}

double tvDistance(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  double sum = 0.0;
  for (const auto& [o, mp] : p.masses()) sum += std::abs(mp - q.mass(o));
  for (const auto& [o, mq] : q.masses()) {
    if (!p.masses().contains(o)) sum += mq;
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

MeanEstimate meanCI(std::span<const double> samples) {
  require(samples.size() >= 2, ErrorCode::InsufficientSamples,
          "a confidence interval needs at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t n = 0;
  for (double x : samples) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  const double halfWidth = 1.96 * std::sqrt(std::max(variance, 0.0) / static_cast<double>(n));
  return MeanEstimate{mean, halfWidth, n};
}

// ------------------------------------------------------------ trial batches

std::vector<TrialResult> runTrials(const TrialRunner& runner, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads) {
  require(trials >= 1, ErrorCode::InvalidArgument, "need at least one trial");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));

  std::vector<TrialResult> results(trials);
  std::atomic<std::uint64_t> next{0};
  std::mutex failureMutex;
  std::optional<TrialError> failure;
  constexpr std::uint64_t kChunk = 64;

  auto work = [&] {
    for (;;) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= trials) return;
      const std::uint64_t end = std::min(trials, begin + kChunk);
      for (std::uint64_t k = begin; k < end; ++k) {
        Rng rng = Rng::forTrial(seed, k);
        std::optional<TrialError> err;
        try {
          results[k].record = runner(k, rng);
        } catch (const IterationCapError& e) {
          results[k].status = TrialStatus::Capped;
          results[k].record = e.partial();
        } catch (const Error& e) {
          err.emplace(k, e.code(), "trial " + std::to_string(k) + ": " + e.what());
        } catch (const std::exception& e) {
          err.emplace(k, ErrorCode::TrialFailure, "trial " + std::to_string(k) + ": " + e.what());
        }
        if (err) {
          std::lock_guard lock(failureMutex);
          if (!failure || failure->trial() > k) failure = std::move(err);
        }
      }
    }
  };

  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) throw *failure;
  return results;
}

OutcomeDistribution distributionOf(std::span<const TrialResult> results,
                                   const SourceDistribution& dist) {
  std::map<Outcome, std::uint64_t> counts;
  for (const TrialResult& r : results) {
    if (r.status == TrialStatus::Ok) ++counts[canonicalize(r.record.output, dist)];
  }
  return OutcomeDistribution::fromCounts(counts);
}

OutcomeDistribution empiricalDistribution(const TrialRunner& runner,
                                          const SourceDistribution& dist,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads) {
  const std::vector<TrialResult> results = runTrials(runner, trials, seed, threads);
  for (std::uint64_t k = 0; k < results.size(); ++k) {
    if (results[k].status == TrialStatus::Capped) {
      throw TrialError(k, ErrorCode::IterationCapExceeded,
                       "trial " + std::to_string(k) + ": iteration cap reached");
    }
  }
  return distributionOf(results, dist);
}

}  // namespace streamemu::stats
