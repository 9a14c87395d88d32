#include "streamemu/secretary.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "streamemu/errors.hpp"

namespace streamemu::secretary {

Policy optimalPolicy(std::uint64_t n) {
  require(n >= 1, ErrorCode::InvalidHorizon, "secretary horizon must be at least 1");
  // phi(r+1) - phi(r) = (sum_{k=r}^{n-1} 1/k - 1) / n, so phi increases while
  // the tail harmonic sum exceeds 1; the optimum is the first r where it does not.
  // Walk r down from n accumulating the tail sum.
  double tail = 0.0;
  std::uint64_t r = n;
  while (r > 1) {
    const double next = tail + 1.0 / static_cast<double>(r - 1);
    if (next > 1.0) break;
    tail = next;
    --r;
  }
  return Policy{n, r};
}

double successProbability(const Policy& policy) {
  require(policy.n >= 1 && policy.threshold >= 1 && policy.threshold <= policy.n,
          ErrorCode::InvalidHorizon, "invalid secretary policy");
  const auto n = static_cast<double>(policy.n);
  if (policy.threshold == 1) return 1.0 / n;
  double sum = 0.0;
  for (std::uint64_t k = policy.n - 1; k >= policy.threshold - 1; --k) {
    sum += 1.0 / static_cast<double>(k);
  }
  return static_cast<double>(policy.threshold - 1) / n * sum;
}

Rational exactSuccessProbability(const Policy& policy) {
  require(policy.n >= 1 && policy.threshold >= 1 && policy.threshold <= policy.n,
          ErrorCode::InvalidHorizon, "invalid secretary policy");
  require(policy.n <= 30, ErrorCode::InvalidHorizon,
          "exact secretary arithmetic supports horizons up to 30");
  __extension__ typedef __int128 i128;
  auto gcd128 = [](i128 a, i128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  };
  i128 num = 0;
  i128 den = 1;
  if (policy.threshold == 1) {
    num = 1;
    den = static_cast<i128>(policy.n);
  } else {
    for (std::uint64_t k = policy.threshold - 1; k <= policy.n - 1; ++k) {
      num = num * static_cast<i128>(k) + den;
      den *= static_cast<i128>(k);
      const i128 g = gcd128(num, den);
      num /= g;
      den /= g;
    }
    num *= static_cast<i128>(policy.threshold - 1);
    den *= static_cast<i128>(policy.n);
  }
  const i128 g = gcd128(num, den);
  return Rational{static_cast<std::int64_t>(num / g), static_cast<std::int64_t>(den / g)};
}

bool secPr(const Policy& policy, std::span<const double> prefixScores) {
  const std::size_t k = prefixScores.size();
  require(k >= 1 && k <= policy.n, ErrorCode::InvalidArgument,
          "secretary prefix length must be in [1, n]");
  {
    std::vector<double> sorted(prefixScores.begin(), prefixScores.end());
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            ErrorCode::DuplicateScore, "secretary scores must be pairwise distinct");
  }
  if (k < policy.threshold) return false;
  if (policy.threshold == 1) return k == 1;
  // running maxima inside the selection phase, before k, mean the rule stopped earlier
  double best = prefixScores[0];
  for (std::size_t j = 1; j + 1 < k; ++j) {
    if (prefixScores[j] > best) {
      if (j + 1 >= policy.threshold) return false;
      best = prefixScores[j];
    }
  }
  return prefixScores[k - 1] > best;
}

double selectionProbability(const Policy& policy) {
  return 1.0 - static_cast<double>(policy.threshold - 1) / static_cast<double>(policy.n);
}

}  // namespace streamemu::secretary
