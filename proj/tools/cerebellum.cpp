// cerebellum: command-line front end.
//
//   cerebellum oracle         --config C --q .. --qd .. --qdd .. [--wrench fx,fy,mz] [--tilt t]
//   cerebellum generate       --config C [--out dataset.csv] [--seed s]
//   cerebellum train          --config C --dataset D [--out dir] [--seed s]
//   cerebellum eval           --config C --weights W --dataset D [--split holdout|train|all] [--out f]
//   cerebellum arch           [--preset n10-b16] [--n ..] [--b ..] [--csv]
//   cerebellum encode-inspect --config C --q .. [--r R]
//
// Exit codes: 0 ok, 2 input error, 3 hash/consistency error, 4 numerical failure.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cerebellum/arch.hpp"
#include "cerebellum/config.hpp"
#include "cerebellum/dataset.hpp"
#include "cerebellum/errors.hpp"
#include "cerebellum/experiment.hpp"
#include "cerebellum/golgi.hpp"
#include "cerebellum/kernels.hpp"
#include "cerebellum/text_format.hpp"
#include "cerebellum/weights.hpp"

namespace fs = std::filesystem;
using namespace cerebellum;

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw InputError(what + ": '" + item + "' is not a number");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

Eigen::VectorXd vector_arg(const std::string& text, int n, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.empty()) return Eigen::VectorXd::Zero(n);
  if (static_cast<int>(v.size()) != n) {
    throw InputError(what + " needs " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? default_experiment() : load_experiment(path);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  return os;
}

Dataset load_dataset(const std::string& path, const ExperimentConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open dataset '" + path + "'");
  Dataset ds = read_dataset(is, cfg.robot);
  const std::string expected = layout_hash(cfg.position, cfg.speed);
  if (ds.layout_hash != expected) {
    throw ConsistencyError("dataset layout hash " + ds.layout_hash + " does not match config " + expected);
  }
  return ds;
}

struct Options {
  std::string config;
  std::string dataset;
  std::string weights;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::string split = "holdout";
  bool csv = false;
  std::string q, qd, qdd, wrench;
  std::optional<double> tilt;
  double r = 1.0;
  std::optional<int> n;
  std::string b;
  std::optional<double> t_ins_us, t_c_ms;
  std::optional<std::uint64_t> n_dm, bytes_per_entry;
};

int cmd_oracle(const Options& o) {
  const ExperimentConfig cfg = config_or_default(o.config);
  RobotModel model = cfg.robot;
  if (o.tilt) model.base_tilt = *o.tilt;
  const int n = model.dof();
  JointState s{vector_arg(o.q, n, "--q"), vector_arg(o.qd, n, "--qd"), vector_arg(o.qdd, n, "--qdd")};
  const auto w = parse_list(o.wrench, "--wrench");
  if (!w.empty() && w.size() != 3) throw InputError("--wrench needs fx,fy,mz");
  ExternalWrench wrench;
  if (!w.empty()) wrench = {w[0], w[1], w[2]};
  const TorqueBreakdown b = term_breakdown(model, s, wrench);
  std::ostream& os = std::cout;
  os << "term,joint,i,j,value\n";
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < n; ++m) os << "inertial," << k << ',' << m << ",," << format_double(b.inertial(k, m)) << '\n';
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        os << "coriolis," << k << ',' << i << ',' << j << ',' << format_double(b.coriolis[k](i, j)) << '\n';
      }
    }
    for (int c = 0; c < 2; ++c) os << "gravity," << k << ',' << c << ",," << format_double(b.gravity(k, c)) << '\n';
    os << "fric_dyn," << k << ",,," << format_double(b.fric_dyn[k]) << '\n';
    os << "fric_stat," << k << ",,," << format_double(b.fric_stat[k]) << '\n';
    for (int c = 0; c < 3; ++c) os << "external," << k << ',' << c << ",," << format_double(b.external(k, c)) << '\n';
    os << "total," << k << ",,," << format_double(b.total[k]) << '\n';
  }
  return 0;
}

int cmd_generate(const Options& o) {
  ExperimentConfig cfg = config_or_default(o.config);
  if (o.seed) cfg.dataset.seed = *o.seed;
  const Dataset ds = generate(cfg.robot, cfg.position, cfg.dataset, layout_hash(cfg.position, cfg.speed));
  const fs::path out = o.out.empty() ? fs::path(cfg.out_dir) / "dataset.csv" : fs::path(o.out);
  auto os = open_out(out);
  write_dataset(os, ds, cfg.robot.dof());
  spdlog::info("wrote {} samples to {}", ds.samples.size(), out.string());
  return 0;
}

int cmd_train(const Options& o) {
  ExperimentConfig cfg = config_or_default(o.config);
  if (o.seed) cfg.training.seed = *o.seed;
  if (o.dataset.empty()) throw InputError("train needs --dataset");
  const Dataset ds = load_dataset(o.dataset, cfg);
  const std::size_t n_train = ds.train_count();
  if (n_train == 0) throw InputError("dataset has no training samples");
  Network net = build_network(cfg);
  const std::span<const Sample> samples(ds.samples);
  const auto inputs = kernels::encode_omp(net, cfg.robot, samples.first(n_train));
  const TrainingReport report = train(net, inputs, std::span(ds.targets).first(n_train), cfg.training);

  const fs::path dir = o.out.empty() ? fs::path(cfg.out_dir) : fs::path(o.out);
  {
    auto os = open_out(dir / "weights.json");
    save_weights(os, net, cfg.robot);
  }
  {
    auto os = open_out(dir / "training_report.csv");
    report.write_csv(os);
  }
  const auto& last = report.epochs.back().families[kReportFamilies - 1];
  spdlog::info("trained {} epochs on {} samples; total relative RMS {}", report.epochs.size() - 1,
               inputs.size(), format_double(last.relative_rms()));
  return 0;
}

int cmd_eval(const Options& o) {
  const ExperimentConfig cfg = config_or_default(o.config);
  if (o.weights.empty() || o.dataset.empty()) throw InputError("eval needs --weights and --dataset");
  const Dataset ds = load_dataset(o.dataset, cfg);
  std::ifstream ws(o.weights, std::ios::binary);
  if (!ws) throw InputError("cannot open weights '" + o.weights + "'");
  const Network net = load_weights(ws, cfg.robot, layout_hash(cfg.position, cfg.speed));

  std::span<const Sample> samples(ds.samples);
  std::span<const TorqueBreakdown> targets(ds.targets);
  const std::size_t n_train = ds.train_count();
  if (o.split == "train") {
    const std::size_t n = cfg.training.sample_count > 0 ? std::min(n_train, cfg.training.sample_count) : n_train;
    samples = samples.first(n);
    targets = targets.first(n);
  } else if (o.split == "holdout") {
    samples = samples.subspan(n_train);
    targets = targets.subspan(n_train);
  } else if (o.split != "all") {
    throw InputError("--split must be holdout, train or all");
  }
  const EvalReport report =
      evaluate_report(net, cfg.robot, samples, targets, cfg.calibration_samples, cfg.dataset.seed + 2);
  if (!report.sparsity_in_band()) {
    spdlog::warn("mean active fraction {} outside [{}, {}]", format_double(report.sparsity.mean_fraction),
                 format_double(0.5 * report.sparsity_target), format_double(2.0 * report.sparsity_target));
  }
  if (o.out.empty()) {
    report.write_csv(std::cout);
  } else {
    auto os = open_out(o.out);
    report.write_csv(os);
  }
  return 0;
}

int cmd_arch(const Options& o) {
  ArchitectureParams p = o.preset.empty() ? ArchitectureParams{} : arch_preset(o.preset);
  if (o.n) p.n = *o.n;
  if (!o.b.empty()) {
    p.b.clear();
    for (double v : parse_list(o.b, "--b")) {
      if (v != std::floor(v)) throw InputError("--b takes integers");
      p.b.push_back(static_cast<int>(v));
    }
  }
  auto to_nanos = [](double v, double scale) {
    return Nanos(static_cast<std::int64_t>(std::llround(v * scale)));
  };
  if (o.t_ins_us) p.t_ins = to_nanos(*o.t_ins_us, 1e3);
  if (o.t_c_ms) p.t_c = to_nanos(*o.t_c_ms, 1e6);
  if (o.n_dm) p.n_dm = *o.n_dm;
  if (o.bytes_per_entry) p.bytes_per_entry = *o.bytes_per_entry;
  write_arch_report(std::cout, p, o.csv);
  return 0;
}

int cmd_encode_inspect(const Options& o) {
  const ExperimentConfig cfg = config_or_default(o.config);
  const BasisLayout& layout = cfg.position;
  const auto q = vector_arg(o.q, layout.dims(), "--q");
  const std::span<const double> x(q.data(), static_cast<std::size_t>(q.size()));
  bool clamped = false;
  const SparseActivation b = modulate(encode_position(layout, x, &clamped), o.r);
  std::ostream& os = std::cout;
  os << "tiling,cell_index,value\n";
  const std::size_t per = layout.cells_per_tiling();
  for (std::size_t a = 0; a < b.indices.size(); ++a) {
    os << b.indices[a] / per << ',' << b.indices[a] % per << ',' << format_double(b.values[a]) << '\n';
  }
  GolgiParams golgi = cfg.golgi;
  golgi.p_syn = layout.cell_count();
  const auto states = workspace_states(layout, cfg.calibration_samples, cfg.dataset.seed + 1);
  golgi = calibrate_sparsity(layout, golgi, states);
  const auto mossy = mossy_sums(layout, x);
  const double r_sum = static_cast<double>(golgi.q_low) * o.r;
  const GolgiResult g = golgi_output(golgi, mossy, r_sum);
  double sigma_total = 0.0;
  double m_total = 0.0;
  for (auto i : g.y.indices) {
    sigma_total += golgi.sigma_at(i);
    m_total += mossy[i];
  }
  os << "# clamped=" << (clamped ? 1 : 0) << '\n';
  os << "# golgi_rate=" << format_double(g.rate) << '\n';
  os << "# active_granules=" << g.y.active() << '\n';
  os << "# granule_sum=" << format_double(g.y.sum()) << '\n';
  os << "# mossy_total=" << format_double(m_total) << '\n';
  os << "# r_sum=" << format_double(r_sum) << '\n';
  if (g.y.active() > 0) {
    const LineParams lp = line_params(golgi, g.y.active(), sigma_total);
    os << "# k1=" << format_double(lp.k1) << '\n';
    os << "# k2=" << format_double(lp.k2) << '\n';
    os << "# k3=" << format_double(lp.k3) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("cerebellum"));
  spdlog::set_pattern("%l: %v");

  CLI::App app{"Cerebellar term-by-term inverse dynamics approximator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "experiment config (JSON with comments)");
    c->add_option("--out", o.out, "output file or directory");
  };

  auto* oracle = app.add_subcommand("oracle", "print the analytic torque breakdown of one state");
  common(oracle);
  oracle->add_option("--q", o.q, "joint positions, comma separated");
  oracle->add_option("--qd", o.qd, "joint speeds");
  oracle->add_option("--qdd", o.qdd, "joint accelerations");
  oracle->add_option("--wrench", o.wrench, "fx,fy,mz at the tip");
  oracle->add_option("--tilt", o.tilt, "base tilt override");

  auto* gen = app.add_subcommand("generate", "write an oracle-labelled dataset");
  common(gen);
  gen->add_option("--seed", o.seed, "dataset seed override");

  auto* tr = app.add_subcommand("train", "train microzones, write weights.json and training_report.csv");
  common(tr);
  tr->add_option("--dataset", o.dataset, "dataset file")->required();
  tr->add_option("--seed", o.seed, "training seed override");

  auto* ev = app.add_subcommand("eval", "evaluate a weight store on a dataset");
  common(ev);
  ev->add_option("--dataset", o.dataset, "dataset file")->required();
  ev->add_option("--weights", o.weights, "weight store")->required();
  ev->add_option("--split", o.split, "holdout (default), train or all");

  auto* ar = app.add_subcommand("arch", "architecture sizing report");
  ar->add_option("--preset", o.preset, "named parameter set (n10-b16)");
  ar->add_option("--n", o.n, "degrees of freedom");
  ar->add_option("--b", o.b, "quantization levels, one or one per joint");
  ar->add_option("--t-ins-us", o.t_ins_us, "instruction time in microseconds");
  ar->add_option("--t-c-ms", o.t_c_ms, "control period in milliseconds");
  ar->add_option("--n-dm", o.n_dm, "instruction count of the dynamics model");
  ar->add_option("--bytes-per-entry", o.bytes_per_entry, "bytes per table entry");
  ar->add_flag("--csv", o.csv, "CSV instead of aligned text");

  auto* ins = app.add_subcommand("encode-inspect", "dump the active cells and Golgi state for one position");
  common(ins);
  ins->add_option("--q", o.q, "joint positions")->required();
  ins->add_option("--r", o.r, "modulation rate R");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*oracle) return cmd_oracle(o);
    if (*gen) return cmd_generate(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*ar) return cmd_arch(o);
    if (*ins) return cmd_encode_inspect(o);
  } catch (const ConsistencyError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const NumericalError& e) {
    spdlog::error("{}", e.what());
    return 4;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 2;
}
