// Serial reference vs OpenMP for each batch kernel. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <numeric>

#include "cerebellum/config.hpp"
#include "cerebellum/experiment.hpp"
#include "cerebellum/kernels.hpp"

using namespace cerebellum;

namespace {

struct Setup {
  ExperimentConfig cfg;
  Network net;
  Dataset ds;
  std::vector<SampleInputs> inputs;
  std::vector<std::size_t> order;
  std::vector<Eigen::VectorXd> states;

  Setup() {
    cfg = default_experiment();
    cfg.dataset.count = 2000;
    cfg.calibration_samples = 200;
    net = build_network(cfg);
    ds = generate(cfg.robot, cfg.position, cfg.dataset, "bench");
    inputs = kernels::encode_serial(net, cfg.robot, ds.samples);
    order.resize(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    states = workspace_states(cfg.position, 500, 3);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

template <bool Omp>
void BM_Breakdowns(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) {
    auto out = Omp ? kernels::breakdowns_omp(s.cfg.robot, s.ds.samples)
                   : kernels::breakdowns_serial(s.cfg.robot, s.ds.samples);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.ds.samples.size()));
}

template <bool Omp>
void BM_Encode(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) {
    auto out = Omp ? kernels::encode_omp(s.net, s.cfg.robot, s.ds.samples)
                   : kernels::encode_serial(s.net, s.cfg.robot, s.ds.samples);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.ds.samples.size()));
}

template <bool Omp>
void BM_Evaluate(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) {
    auto out = Omp ? kernels::evaluate_omp(s.net, s.inputs, s.ds.targets)
                   : kernels::evaluate_serial(s.net, s.inputs, s.ds.targets);
    benchmark::DoNotOptimize(out);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.inputs.size()));
}

template <bool Omp>
void BM_TrainEpoch(benchmark::State& st) {
  const auto& s = setup();
  Network net = s.net;
  const TrainingConfig cfg;
  for (auto _ : st) {
    if (Omp) {
      kernels::train_epoch_omp(net, s.inputs, s.ds.targets, s.order, cfg);
    } else {
      kernels::train_epoch_serial(net, s.inputs, s.ds.targets, s.order, cfg);
    }
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.inputs.size()));
}

template <bool Omp>
void BM_ActiveFraction(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) {
    auto out = Omp ? kernels::active_fraction_omp(s.cfg.position, s.net.golgi, s.states)
                   : kernels::active_fraction_serial(s.cfg.position, s.net.golgi, s.states);
    benchmark::DoNotOptimize(out);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.states.size()));
}

}  // namespace

BENCHMARK(BM_Breakdowns<false>)->Name("breakdowns/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Breakdowns<true>)->Name("breakdowns/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Encode<false>)->Name("encode/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Encode<true>)->Name("encode/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate<false>)->Name("evaluate/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate<true>)->Name("evaluate/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpoch<false>)->Name("train_epoch/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpoch<true>)->Name("train_epoch/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ActiveFraction<false>)->Name("active_fraction/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ActiveFraction<true>)->Name("active_fraction/omp")->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
