#include <benchmark/benchmark.h>

#include "dissmps/aklt_mps.hpp"
#include "dissmps/connection.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/rydberg_eit.hpp"
#include "dissmps/trajectory.hpp"
#include "dissmps/uniqueness.hpp"

using namespace dissmps;

static void BM_DenseState(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dense_state(aklt_spec(), n, Boundary::open(0, 1)));
}
BENCHMARK(BM_DenseState)->DenseRange(4, 8, 2);

static void BM_CwDiagonalize(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cw_diagonalize(q));
}
BENCHMARK(BM_CwDiagonalize)->Arg(64)->Arg(256);

static void BM_LiouvillianApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Liouvillian l(make_spec(n, BoundaryKind::Open, Protocol{}));
  const Eigen::Index N = l.dim();
  RMat rho = RMat::Identity(N, N) / static_cast<double>(N);
  for (auto _ : state) benchmark::DoNotOptimize(l.apply_real(rho));
  state.SetLabel("dim=" + std::to_string(N));
}
BENCHMARK(BM_LiouvillianApply)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_Trajectory(benchmark::State& state) {
  TrajectoryConfig cfg;
  cfg.liouvillian = make_spec(static_cast<int>(state.range(0)), BoundaryKind::Open, Protocol{});
  cfg.t_max = 20.0;
  cfg.record_every = 100;
  TrajectoryEngine eng(cfg);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(eng.run(seed++));
}
BENCHMARK(BM_Trajectory)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_SpectralEnsemble(benchmark::State& state) {
  TrajectoryConfig cfg;
  cfg.liouvillian = make_spec(static_cast<int>(state.range(0)), BoundaryKind::Open, Protocol{});
  cfg.integrator = Integrator::Spectral;
  cfg.record_energy = false;
  cfg.t_max = 200.0;
  cfg.record_every = 1000;
  TrajectoryEngine eng(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(eng.run_ensemble(128, 1));
}
BENCHMARK(BM_SpectralEnsemble)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

static void BM_UniquenessCertificate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(det_certificate_open(n, JumpFamily::MP));
}
BENCHMARK(BM_UniquenessCertificate)->DenseRange(2, 6, 2);

static void BM_ConnectionTree(benchmark::State& state) {
  ScalingModel m;
  DetectorModel det;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_tree(m, det, static_cast<double>(state.range(0)), 4, 1));
}
BENCHMARK(BM_ConnectionTree)->Arg(1 << 10)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

static void BM_EffectiveRate(benchmark::State& state) {
  EITParams p;
  for (auto _ : state) benchmark::DoNotOptimize(effective_rate(p, true));
}
BENCHMARK(BM_EffectiveRate);
BENCHMARK_MAIN();
