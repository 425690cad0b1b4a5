#include <doctest.h>

#include <omp.h>

#include <cstring>

#include "tempoframe/kernels.hpp"
#include "test_util.hpp"

using namespace tempoframe;
using namespace tempoframe::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Eigen::MatrixXd random_matrix(Lcg& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) x(i, k) = rng.uniform(-3, 3);
  }
  return x;
}

struct Outcomes {
  std::vector<double> times;
  std::vector<std::uint8_t> occurred;
};

Outcomes random_outcomes(Lcg& rng, std::size_t n) {
  Outcomes o;
  for (std::size_t i = 0; i < n; ++i) {
    o.times.push_back(static_cast<double>(rng.below(n / 3 + 1)));
    o.occurred.push_back(rng.uniform() < 0.6 ? 1 : 0);
  }
  return o;
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  omp_set_num_threads(4);
  Lcg rng(77);
  for (const std::size_t n : {1, 7, 64, 513, 3000}) {
    const auto x = random_matrix(rng, static_cast<Eigen::Index>(n), 5);
    Eigen::VectorXd w(5);
    for (int k = 0; k < 5; ++k) w[k] = rng.uniform(-0.5, 0.5);

    std::vector<double> serial(n), parallel(n);
    linear_scores(x, w, 0.25, serial, Exec::Serial);
    linear_scores(x, w, 0.25, parallel, Exec::Parallel);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(serial[i], parallel[i]));

    const auto o = random_outcomes(rng, n);
    const auto cs = concordance_counts(serial, o.times, o.occurred, Exec::Serial);
    const auto cp = concordance_counts(serial, o.times, o.occurred, Exec::Parallel);
    CHECK(cs.half_concordant == cp.half_concordant);
    CHECK(cs.comparable == cp.comparable);

    const auto ts = cox_terms(x, w, o.times, o.occurred, Exec::Serial);
    const auto tp = cox_terms(x, w, o.times, o.occurred, Exec::Parallel);
    CHECK(same_bits(ts.loglik, tp.loglik));
    CHECK(ts.events == tp.events);
    for (int k = 0; k < 5; ++k) CHECK(same_bits(ts.gradient[k], tp.gradient[k]));
  }
}

TEST_CASE("linear_scores sums left to right") {
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, -1, 0.5, 4;
  Eigen::VectorXd w(3);
  w << 0.5, -1, 2;
  std::vector<double> out(2);
  linear_scores(x, w, 1.0, out, Exec::Serial);
  CHECK(out[0] == ((1.0 + 1 * 0.5) + 2 * -1.0) + 3 * 2.0);
  CHECK(out[1] == ((1.0 + -1 * 0.5) + 0.5 * -1.0) + 4 * 2.0);
}

TEST_CASE("concordance_counts counts pairs by brute force") {
  Lcg rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const auto o = random_outcomes(rng, n);
    std::vector<double> risk;
    for (std::size_t i = 0; i < n; ++i) risk.push_back(static_cast<double>(rng.below(5)));
    std::int64_t half = 0, comparable = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!o.occurred[i] || !(o.times[i] < o.times[j])) continue;
        ++comparable;
        half += risk[i] > risk[j] ? 2 : risk[i] == risk[j] ? 1 : 0;
      }
    }
    const auto c = concordance_counts(risk, o.times, o.occurred, Exec::Serial);
    CHECK(c.comparable == comparable);
    CHECK(c.half_concordant == half);
  }
}

TEST_CASE("cox_terms gradient matches central differences") {
  Lcg rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.below(20);
    const auto x = random_matrix(rng, static_cast<Eigen::Index>(n), 3);
    auto o = random_outcomes(rng, n);
    o.occurred[0] = 1;
    Eigen::VectorXd beta(3);
    for (int k = 0; k < 3; ++k) beta[k] = rng.uniform(-0.3, 0.3);
    const auto t = cox_terms(x, beta, o.times, o.occurred, Exec::Serial);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6;
      Eigen::VectorXd up = beta, down = beta;
      up[k] += h;
      down[k] -= h;
      const double fd = (cox_terms(x, up, o.times, o.occurred).loglik - cox_terms(x, down, o.times, o.occurred).loglik) /
                        (2 * h);
      CHECK(std::abs(fd - t.gradient[k]) <= 1e-5 * (1 + std::abs(fd)));
    }
  }
}
