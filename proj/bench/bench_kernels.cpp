#include <benchmark/benchmark.h>

#include <vector>

#include "tempoframe/kernels.hpp"
#include "tempoframe/rng.hpp"

using namespace tempoframe;
using namespace tempoframe::kernels;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd beta;
  std::vector<double> times;
  std::vector<std::uint8_t> occurred;
  std::vector<double> risks;
};

Problem make_problem(std::size_t n, Eigen::Index d) {
  Lcg rng(42);
  Problem p;
  p.x.resize(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) p.x(i, k) = rng.uniform(-1, 1);
  }
  p.beta = Eigen::VectorXd::Constant(d, 0.1);
  for (std::size_t i = 0; i < n; ++i) {
    p.times.push_back(rng.uniform(0, 100));
    p.occurred.push_back(rng.uniform() < 0.7 ? 1 : 0);
    p.risks.push_back(rng.uniform(-2, 2));
  }
  return p;
}

Exec mode(const benchmark::State& state) { return state.range(1) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_LinearScores(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 16);
  std::vector<double> out(p.times.size());
  for (auto _ : state) {
    linear_scores(p.x, p.beta, 0.0, out, mode(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Concordance(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(concordance_counts(p.risks, p.times, p.occurred, mode(state)));
}

void BM_CoxTerms(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(cox_terms(p.x, p.beta, p.times, p.occurred, mode(state)));
}

}  // namespace

// Second argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_LinearScores)->ArgsProduct({{1000, 100000}, {0, 1}});
BENCHMARK(BM_Concordance)->ArgsProduct({{1000, 5000}, {0, 1}});
BENCHMARK(BM_CoxTerms)->ArgsProduct({{1000, 20000}, {0, 1}});

BENCHMARK_MAIN();
