#include "tempoframe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tempoframe::kernels {

void linear_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, double bias, std::span<double> out,
                   Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const auto d = x.cols();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = bias;
    for (Eigen::Index k = 0; k < d; ++k) s += x(i, k) * w[k];
    out[static_cast<std::size_t>(i)] = s;
  }
}

PairCounts concordance_counts(std::span<const double> risks, std::span<const double> times,
                              std::span<const std::uint8_t> occurred, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(risks.size());
  std::int64_t half = 0;
  std::int64_t comparable = 0;
  // Integer counts make the reduction order irrelevant.
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : half, comparable) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!occurred[i]) continue;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      if (!(times[i] < times[j])) continue;
      ++comparable;
      if (risks[i] > risks[j]) {
        half += 2;
      } else if (risks[i] == risks[j]) {
        half += 1;
      }
    }
  }
  return {half, comparable};
}

CoxTerms cox_terms(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, std::span<const double> times,
                   std::span<const std::uint8_t> occurred, Exec exec) {
  const std::size_t n = times.size();
  const auto d = x.cols();
  std::vector<double> eta(n);
  linear_scores(x, beta, 0.0, eta, exec);
  const double shift = n == 0 ? 0.0 : *std::max_element(eta.begin(), eta.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(eta[i] - shift);

  // Latest time first, so each risk set is a prefix of `order`.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  std::vector<std::size_t> group_end;  // exclusive end of each equal-time block
  for (std::size_t k = 1; k <= n; ++k) {
    if (k == n || times[order[k]] != times[order[k - 1]]) group_end.push_back(k);
  }

  CoxTerms out;
  out.gradient = Eigen::VectorXd::Zero(d);
  std::vector<double> s0_at(group_end.size());
  {
    double s0 = 0;
    std::size_t start = 0;
    for (std::size_t g = 0; g < group_end.size(); ++g) {
      for (std::size_t k = start; k < group_end[g]; ++k) s0 += w[order[k]];
      s0_at[g] = s0;
      for (std::size_t k = start; k < group_end[g]; ++k) {
        const std::size_t i = order[k];
        if (!occurred[i]) continue;
        ++out.events;
        out.loglik += eta[i] - (shift + std::log(s0));
      }
      start = group_end[g];
    }
  }

#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (Eigen::Index c = 0; c < d; ++c) {
    double s1 = 0;
    double g_c = 0;
    std::size_t start = 0;
    for (std::size_t g = 0; g < group_end.size(); ++g) {
      for (std::size_t k = start; k < group_end[g]; ++k) s1 += w[order[k]] * x(order[k], c);
      for (std::size_t k = start; k < group_end[g]; ++k) {
        const std::size_t i = order[k];
        if (occurred[i]) g_c += x(i, c) - s1 / s0_at[g];
      }
      start = group_end[g];
    }
    out.gradient[c] = g_c;
  }
  return out;
}

}  // namespace tempoframe::kernels
