#pragma once

// Experiment configuration: one JSON file (comments allowed) that drives every
// subcommand. See configs/default.json for the annotated reference.

#include <string>
#include <string_view>

#include "cerebellum/dataset.hpp"
#include "cerebellum/dynamics.hpp"
#include "cerebellum/encoding.hpp"
#include "cerebellum/golgi.hpp"
#include "cerebellum/text_format.hpp"
#include "cerebellum/training.hpp"

namespace cerebellum {

RobotModel robot_from_json(const Json& j);
Json robot_to_json(const RobotModel& model);
/// Hash of the canonical robot description.
std::string robot_hash(const RobotModel& model);

BasisLayout layout_from_json(const Json& j, const std::string& where);
Json layout_to_json(const BasisLayout& layout);

GolgiParams golgi_from_json(const Json& j);
Json golgi_to_json(const GolgiParams& p);

TrainingConfig training_from_json(const Json& j);
Json training_to_json(const TrainingConfig& cfg);

DatasetSpec dataset_spec_from_json(const Json& j);
Json dataset_spec_to_json(const DatasetSpec& spec);

struct ExperimentConfig {
  RobotModel robot;
  BasisLayout position;
  BasisLayout speed;
  GolgiParams golgi;
  TrainingConfig training;
  DatasetSpec dataset;
  std::string out_dir = "out";
  std::size_t calibration_samples = 1000;
};

/// 2-link arm, 10 x 10 position cells in 32 tilings, 1-D speed code per joint.
ExperimentConfig default_experiment();

/// `base_dir` resolves a robot given as a file path.
ExperimentConfig experiment_from_text(std::string_view text, const std::string& base_dir = ".");
ExperimentConfig load_experiment(const std::string& path);
Json experiment_to_json(const ExperimentConfig& cfg);

/// Hash of both encoder layouts; guards datasets and weight stores.
std::string layout_hash(const BasisLayout& position, const BasisLayout& speed);

void validate(const ExperimentConfig& cfg);

}  // namespace cerebellum
