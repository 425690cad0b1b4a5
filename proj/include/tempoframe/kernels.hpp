#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tempoframe::kernels {

/// Serial is the reference; Parallel spreads independent work over OpenMP
/// threads. Every kernel keeps each floating-point reduction in one thread
/// and in a fixed order, so both modes return bit-identical results.
enum class Exec { Serial, Parallel };

/// out[i] = bias + sum_k X(i,k) * w[k], summed left to right.
void linear_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, double bias, std::span<double> out,
                   Exec exec = Exec::Parallel);

struct PairCounts {
  std::int64_t half_concordant = 0;  // 2 per concordant pair, 1 per tied pair
  std::int64_t comparable = 0;
};

/// Harrell's pair counts over pairs with t_i < t_j where i had the event.
PairCounts concordance_counts(std::span<const double> risks, std::span<const double> times,
                              std::span<const std::uint8_t> occurred, Exec exec = Exec::Parallel);

struct CoxTerms {
  double loglik = 0;        // Breslow log partial likelihood, unpenalized
  Eigen::VectorXd gradient;  // of loglik
  std::size_t events = 0;
};

/// Log partial likelihood and its gradient at `beta`, risk sets R(t) = {j : t_j >= t}.
CoxTerms cox_terms(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, std::span<const double> times,
                   std::span<const std::uint8_t> occurred, Exec exec = Exec::Parallel);

}  // namespace tempoframe::kernels
