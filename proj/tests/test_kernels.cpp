#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>

#include "cerebellum/config.hpp"
#include "cerebellum/errors.hpp"
#include "cerebellum/experiment.hpp"
#include "cerebellum/kernels.hpp"

using namespace cerebellum;

namespace {

struct Fixture {
  ExperimentConfig cfg;
  Network net;
  Dataset ds;
  std::vector<SampleInputs> inputs;

  Fixture() {
    cfg = default_experiment();
    cfg.dataset.count = 600;
    cfg.calibration_samples = 100;
    net = build_network(cfg);
    ds = generate(cfg.robot, cfg.position, cfg.dataset, "x");
    inputs = kernels::encode_serial(net, cfg.robot, ds.samples);
  }
};

bool same(const EpochStats& a, const EpochStats& b) {
  for (std::size_t f = 0; f < kReportFamilies; ++f) {
    const auto& x = a.families[f];
    const auto& y = b.families[f];
    if (x.sum_sq_err != y.sum_sq_err || x.sum_sq_target != y.sum_sq_target || x.max_abs_err != y.max_abs_err ||
        x.count != y.count) {
      return false;
    }
  }
  return true;
}

class Threads : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { omp_set_num_threads(GetParam()); }
};

}  // namespace

TEST_P(Threads, BreakdownsMatchSerial) {
  Fixture f;
  const auto a = kernels::breakdowns_serial(f.cfg.robot, f.ds.samples);
  const auto b = kernels::breakdowns_omp(f.cfg.robot, f.ds.samples);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].total, b[i].total);
    EXPECT_EQ(a[i].inertial, b[i].inertial);
  }
}

TEST_P(Threads, EncodeMatchesSerial) {
  Fixture f;
  const auto b = kernels::encode_omp(f.net, f.cfg.robot, f.ds.samples);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(f.inputs[i].position.indices, b[i].position.indices);
    EXPECT_EQ(f.inputs[i].gravity, b[i].gravity);
  }
}

TEST_P(Threads, TrainingAndEvaluationMatchSerial) {
  Fixture f;
  Network a = f.net, b = f.net;
  std::vector<std::size_t> order(f.inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (i * 7) % order.size();
  TrainingConfig cfg;
  kernels::train_epoch_serial(a, f.inputs, f.ds.targets, order, cfg);
  kernels::train_epoch_omp(b, f.inputs, f.ds.targets, order, cfg);
  for (std::size_t z = 0; z < a.zones.size(); ++z) {
    for (std::size_t c = 0; c < a.zones[z].cepus.size(); ++c) {
      EXPECT_EQ(a.zones[z].cepus[c].w_pc, b.zones[z].cepus[c].w_pc);
    }
  }
  EXPECT_TRUE(same(kernels::evaluate_serial(a, f.inputs, f.ds.targets), kernels::evaluate_omp(b, f.inputs, f.ds.targets)));
}

TEST_P(Threads, ActiveFractionMatchesSerial) {
  Fixture f;
  const auto states = workspace_states(f.cfg.position, 300, 5);
  const auto a = kernels::active_fraction_serial(f.cfg.position, f.net.golgi, states);
  const auto b = kernels::active_fraction_omp(f.cfg.position, f.net.golgi, states);
  EXPECT_EQ(a.mean_fraction, b.mean_fraction);
  EXPECT_EQ(a.max_fraction, b.max_fraction);
}

TEST_P(Threads, ErrorsPropagateFromWorkers) {
  Fixture f;
  auto inputs = f.inputs;
  inputs[17].qdd[0] = std::nan("");
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Network net = f.net;
  EXPECT_THROW(kernels::train_epoch_omp(net, inputs, f.ds.targets, order, TrainingConfig{}), NumericalError);
}

INSTANTIATE_TEST_SUITE_P(Counts, Threads, ::testing::Values(1, 2, 4));
