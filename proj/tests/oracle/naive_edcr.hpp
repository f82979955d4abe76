#pragma once

// Test-only reference implementations. Every quantity is recomputed from
// scratch over plain int vectors; nothing here calls into the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// 1 = spike, 0 = no.
struct Instance {
  std::vector<int> base;
  std::vector<int> truth;
  std::vector<std::vector<int>> cond;  // cond[c][s]
};

inline std::size_t count_if_idx(std::size_t n, auto pred) {
  std::size_t k = 0;
  for (std::size_t s = 0; s < n; ++s) k += pred(s) ? 1 : 0;
  return k;
}

inline bool any_fires(const Instance& in, const std::set<std::size_t>& dc, std::size_t s) {
  for (auto c : dc) {
    if (in.cond[c][s] == 1) return true;
  }
  return false;
}

inline std::size_t det_pos(const Instance& in, const std::set<std::size_t>& dc, int cls) {
  return count_if_idx(in.base.size(), [&](std::size_t s) {
    return in.base[s] == cls && any_fires(in, dc, s) && in.truth[s] != cls;
  });
}

inline std::size_t det_neg(const Instance& in, const std::set<std::size_t>& dc, int cls) {
  return count_if_idx(in.base.size(), [&](std::size_t s) {
    return in.base[s] == cls && any_fires(in, dc, s) && in.truth[s] == cls;
  });
}

// Greedy detection learner; feasibility against eps * N * P / R.
inline std::vector<std::size_t> det_rule_learn(const Instance& in, int cls, double eps,
                                               const std::vector<std::size_t>& C) {
  const std::size_t n = in.base.size();
  const double N = static_cast<double>(count_if_idx(n, [&](auto s) { return in.base[s] == cls; }));
  const double TP = static_cast<double>(count_if_idx(n, [&](auto s) { return in.base[s] == cls && in.truth[s] == cls; }));
  const double GT = static_cast<double>(count_if_idx(n, [&](auto s) { return in.truth[s] == cls; }));
  const double P = N > 0 ? TP / N : 0.0;
  const double R = TP / GT;
  const double budget = R > 0 ? eps * N * P / R : eps * GT;

  std::set<std::size_t> dc;
  std::vector<std::size_t> order;
  auto feasible = [&]() {
    std::vector<std::size_t> out;
    for (auto c : C) {
      if (dc.count(c)) continue;
      auto with = dc;
      with.insert(c);
      if (static_cast<double>(det_neg(in, with, cls)) <= budget) out.push_back(c);
    }
    return out;
  };
  auto star = feasible();
  while (!star.empty()) {
    std::size_t best = star.front();
    std::size_t best_pos = 0;
    bool first = true;
    for (auto c : star) {
      auto with = dc;
      with.insert(c);
      const auto pos = det_pos(in, with, cls);
      if (first || pos > best_pos || (pos == best_pos && c < best)) {
        best = c;
        best_pos = pos;
        first = false;
      }
    }
    dc.insert(best);
    order.push_back(best);
    star = feasible();
  }
  return order;
}

using Pair = std::pair<std::size_t, int>;  // (condition, prior class)

inline std::pair<std::size_t, std::size_t> corr_pos_bod(const Instance& in, const std::set<Pair>& cc, int target) {
  std::size_t pos = 0;
  std::size_t bod = 0;
  for (std::size_t s = 0; s < in.base.size(); ++s) {
    bool body = false;
    for (const auto& [c, j] : cc) body = body || (in.cond[c][s] == 1 && in.base[s] == j);
    if (!body) continue;
    ++bod;
    if (in.truth[s] == target) ++pos;
  }
  return {pos, bod};
}

inline double corr_ratio(const Instance& in, const std::set<Pair>& cc, int target) {
  const auto [pos, bod] = corr_pos_bod(in, cc, target);
  return bod == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(bod);
}

// Ratio-ordered correction learner, with CC' initialised to the unfiltered pair set.
inline std::vector<Pair> corr_rule_learn(const Instance& in, int target, const std::vector<Pair>& all) {
  const std::size_t n = in.base.size();
  const auto N = count_if_idx(n, [&](auto s) { return in.base[s] == target; });
  const auto TP = count_if_idx(n, [&](auto s) { return in.base[s] == target && in.truth[s] == target; });
  const double P = N > 0 ? static_cast<double>(TP) / static_cast<double>(N) : 0.0;

  std::set<Pair> cc;
  std::set<Pair> cc_prime(all.begin(), all.end());
  std::vector<std::pair<double, Pair>> sorted;
  for (const auto& p : std::set<Pair>(all.begin(), all.end())) {
    const double r = corr_ratio(in, {p}, target);
    if (r > P) sorted.emplace_back(r, p);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<Pair> order;
  for (const auto& [r, p] : sorted) {
    auto with = cc;
    with.insert(p);
    auto without = cc_prime;
    without.erase(p);
    const double a = corr_ratio(in, with, target) - corr_ratio(in, cc, target);
    const double b = corr_ratio(in, without, target) - corr_ratio(in, cc_prime, target);
    if (a >= b) {
      cc.insert(p);
      order.push_back(p);
    } else {
      cc_prime.erase(p);
    }
  }
  if (corr_ratio(in, cc, target) <= P) order.clear();
  return order;
}

struct Prf {
  double precision;
  double recall;
  double f1;
};

// Brute-force confusion matrix by enumerating the four cells.
inline Prf prf1(const std::vector<int>& pred, const std::vector<int>& truth) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s] == 1 && truth[s] == 1) tp += 1;
    if (pred[s] == 1 && truth[s] == 0) fp += 1;
    if (pred[s] == 0 && truth[s] == 1) fn += 1;
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

// Trailing mean / sample std in long double, Welford-style.
inline std::pair<double, double> trailing_stats(const std::vector<double>& x, std::size_t t, std::size_t w) {
  long double mean = 0, m2 = 0;
  std::size_t k = 0;
  for (std::size_t i = t - w; i < t; ++i) {
    ++k;
    const long double d = x[i] - mean;
    mean += d / k;
    m2 += d * (x[i] - mean);
  }
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(m2 / (w - 1)))};
}

}  // namespace oracle
