#include "cerebellum/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

#include "cerebellum/errors.hpp"

namespace cerebellum {

namespace {

// Strict object reader: unknown keys and wrong types are reported with their path.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_, 0, "expected an object");
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path(key), 0, "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), 0, "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key) {
    require(key);
    return number(key, 0.0);
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), 0, "expected an integer");
    return v.get<long>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), 0, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(path(key), 0, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(path(key), 0, "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const Json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  void require(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(path(key), 0, "missing required key");
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::size_t line_of_field(std::string_view text, const std::string& field) {
  // "links[2].mass" -> third occurrence of "mass" after "links".
  std::string key = field;
  std::size_t skip = 0;
  std::size_t start = 0;
  if (auto lb = field.find('['); lb != std::string::npos) {
    const auto rb = field.find(']', lb);
    const auto dot = field.find('.', rb);
    if (rb == std::string::npos || dot == std::string::npos) return 0;
    skip = std::stoul(field.substr(lb + 1, rb - lb - 1));
    start = text.find("\"" + field.substr(0, lb) + "\"");
    if (start == std::string_view::npos) return 0;
    key = field.substr(dot + 1);
  } else if (auto dot = field.rfind('.'); dot != std::string::npos) {
    key = field.substr(dot + 1);
  }
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = text.find(quoted, start);
  for (std::size_t i = 0; i < skip && pos != std::string_view::npos; ++i) pos = text.find(quoted, pos + 1);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

template <class Fn>
auto with_lines(std::string_view text, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (e.line() != 0 || e.field().empty()) throw;
    const std::string what = e.what();
    const std::string msg = what.substr(std::min(what.size(), e.field().size() + 2));
    throw ConfigError(e.field(), line_of_field(text, e.field()), msg);
  }
}

}  // namespace

RobotModel robot_from_json(const Json& j) {
  Fields f(j, "");
  RobotModel model;
  model.gravity_mag = f.number("gravity_mag", model.gravity_mag);
  model.base_tilt = f.number("base_tilt", model.base_tilt);
  f.require("links");
  const Json* links = f.object("links");
  if (!links->is_array()) throw ConfigError("links", 0, "expected an array of links");
  for (std::size_t i = 0; i < links->size(); ++i) {
    Fields lf((*links)[i], "links[" + std::to_string(i) + "]");
    LinkParams l;
    l.mass = lf.number("mass");
    l.length = lf.number("length");
    l.com_distance = lf.number("com_distance");
    l.inertia_com = lf.number("inertia_com", 0.0);
    l.fric_dynamic = lf.number("fric_dynamic", 0.0);
    l.fric_static = lf.number("fric_static", 0.0);
    lf.done();
    model.links.push_back(l);
  }
  f.done();
  validate(model);
  return model;
}

Json robot_to_json(const RobotModel& model) {
  Json links = Json::array();
  for (const auto& l : model.links) {
    links.push_back({{"mass", l.mass},
                     {"length", l.length},
                     {"com_distance", l.com_distance},
                     {"inertia_com", l.inertia_com},
                     {"fric_dynamic", l.fric_dynamic},
                     {"fric_static", l.fric_static}});
  }
  return {{"gravity_mag", model.gravity_mag}, {"base_tilt", model.base_tilt}, {"links", links}};
}

std::string robot_hash(const RobotModel& model) {
  std::ostringstream os;
  os << "g=" << format_double(model.gravity_mag) << ";tilt=" << format_double(model.base_tilt);
  for (const auto& l : model.links) {
    os << ";link=" << format_double(l.mass) << ':' << format_double(l.length) << ':'
       << format_double(l.com_distance) << ':' << format_double(l.inertia_com) << ':'
       << format_double(l.fric_dynamic) << ':' << format_double(l.fric_static);
  }
  return hash_hex(fnv1a(os.str()));
}

RobotModel build_planar_model(std::string_view config_text) {
  return with_lines(config_text, [&] {
    const Json j = parse_config_text(config_text);
    if (j.is_object() && j.contains("robot")) return robot_from_json(j.at("robot"));
    return robot_from_json(j);
  });
}

BasisLayout layout_from_json(const Json& j, const std::string& where) {
  Fields f(j, where);
  f.require("range_min");
  f.require("range_max");
  f.require("cells_per_dim");
  const auto lo = f.numbers("range_min", {});
  const auto hi = f.numbers("range_max", {});
  std::vector<int> cells;
  for (double c : f.numbers("cells_per_dim", {})) {
    if (c != std::floor(c)) throw ConfigError(f.path("cells_per_dim"), 0, "expected integers");
    cells.push_back(static_cast<int>(c));
  }
  const long tilings = f.integer("tilings", 1);
  const FieldShape shape = parse_field_shape(f.text("field_shape", "rectangular"));
  const Combine combine = parse_combine(f.text("combine", "product"));
  BasisLayout layout = BasisLayout::uniform(lo, hi, static_cast<int>(tilings), cells, shape, combine);
  if (const Json* off = f.object("offsets")) {
    if (!off->is_array()) throw ConfigError(f.path("offsets"), 0, "expected an array of rows");
    layout.offsets.clear();
    for (const auto& row : *off) {
      if (!row.is_array()) throw ConfigError(f.path("offsets"), 0, "expected an array of rows");
      std::vector<double> r;
      for (const auto& v : row) {
        if (!v.is_number()) throw ConfigError(f.path("offsets"), 0, "expected numbers");
        r.push_back(v.get<double>());
      }
      layout.offsets.push_back(std::move(r));
    }
  }
  f.done();
  try {
    validate(layout);
  } catch (const ConfigError& e) {
    throw ConfigError(f.path(e.field()), 0, std::string(e.what()).substr(e.field().size() + 2));
  }
  return layout;
}

Json layout_to_json(const BasisLayout& layout) {
  return {{"range_min", layout.range_min},
          {"range_max", layout.range_max},
          {"cells_per_dim", layout.cells_per_dim},
          {"tilings", layout.tilings},
          {"field_shape", to_string(layout.field_shape)},
          {"combine", to_string(layout.combine)},
          {"offsets", layout.offsets}};
}

GolgiParams golgi_from_json(const Json& j) {
  Fields f(j, "golgi");
  GolgiParams p;
  const std::string mode = f.text("mode", "threshold");
  if (mode == "threshold") {
    p.mode = GolgiMode::threshold;
  } else if (mode == "gain") {
    p.mode = GolgiMode::gain;
  } else {
    throw ConfigError("golgi.mode", 0, "expected \"threshold\" or \"gain\"");
  }
  p.k_th = f.number("K_th", p.k_th);
  p.k_g = f.number("K_g", p.k_g);
  p.g_gr = f.number("G_Gr", p.g_gr);
  p.h_u = f.number("H_U", p.h_u);
  p.h_l = f.number("H_L", p.h_l);
  p.h_go = f.number("H_Go", p.h_go);
  p.theta = f.number("theta", p.theta);
  p.sigma = f.numbers("sigma", p.sigma);
  const long q_low = f.integer("q_low", static_cast<long>(p.q_low));
  if (q_low < 0) throw ConfigError("golgi.q_low", 0, "must be >= 0");
  p.q_low = static_cast<std::size_t>(q_low);
  p.sparsity_target = f.number("sparsity_target", p.sparsity_target);
  f.done();
  validate(p);
  return p;
}

Json golgi_to_json(const GolgiParams& p) {
  return {{"mode", p.mode == GolgiMode::gain ? "gain" : "threshold"},
          {"K_th", p.k_th},
          {"K_g", p.k_g},
          {"G_Gr", p.g_gr},
          {"H_U", p.h_u},
          {"H_L", p.h_l},
          {"H_Go", p.h_go},
          {"theta", p.theta},
          {"sigma", p.sigma},
          {"q_low", p.q_low},
          {"sparsity_target", p.sparsity_target}};
}

TrainingConfig training_from_json(const Json& j) {
  Fields f(j, "training");
  TrainingConfig cfg;
  cfg.rate = f.number("rate", cfg.rate);
  cfg.epochs = static_cast<int>(f.integer("epochs", cfg.epochs));
  const long seed = f.integer("seed", static_cast<long>(cfg.seed));
  if (seed < 0) throw ConfigError("training.seed", 0, "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const long count = f.integer("sample_count", 0);
  if (count < 0) throw ConfigError("training.sample_count", 0, "must be >= 0");
  cfg.sample_count = static_cast<std::size_t>(count);
  const std::string sup = f.text("supervision", "per_term");
  if (sup == "per_term") {
    cfg.supervision = Supervision::per_term;
  } else if (sup == "per_joint") {
    cfg.supervision = Supervision::per_joint;
  } else {
    throw ConfigError("training.supervision", 0, "expected \"per_term\" or \"per_joint\"");
  }
  cfg.epsilon = f.number("epsilon", cfg.epsilon);
  f.done();
  validate(cfg);
  return cfg;
}

Json training_to_json(const TrainingConfig& cfg) {
  return {{"rate", cfg.rate},
          {"epochs", cfg.epochs},
          {"seed", cfg.seed},
          {"sample_count", cfg.sample_count},
          {"supervision", cfg.supervision == Supervision::per_term ? "per_term" : "per_joint"},
          {"epsilon", cfg.epsilon}};
}

DatasetSpec dataset_spec_from_json(const Json& j) {
  Fields f(j, "dataset");
  DatasetSpec s;
  const long count = f.integer("count", static_cast<long>(s.count));
  if (count < 0) throw ConfigError("dataset.count", 0, "must be >= 0");
  s.count = static_cast<std::size_t>(count);
  const long seed = f.integer("seed", static_cast<long>(s.seed));
  if (seed < 0) throw ConfigError("dataset.seed", 0, "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  s.holdout = f.number("holdout", s.holdout);
  s.q_min = f.numbers("q_min", {});
  s.q_max = f.numbers("q_max", {});
  s.v_max = f.number("v_max", s.v_max);
  s.a_max = f.number("a_max", s.a_max);
  s.f_max = f.number("f_max", s.f_max);
  s.m_max = f.number("m_max", s.m_max);
  s.tilt_spread = f.number("tilt_spread", s.tilt_spread);
  f.done();
  return s;
}

Json dataset_spec_to_json(const DatasetSpec& s) {
  Json j = {{"count", s.count},       {"seed", s.seed},   {"holdout", s.holdout},
            {"v_max", s.v_max},       {"a_max", s.a_max}, {"f_max", s.f_max},
            {"m_max", s.m_max},       {"tilt_spread", s.tilt_spread}};
  if (!s.q_min.empty()) j["q_min"] = s.q_min;
  if (!s.q_max.empty()) j["q_max"] = s.q_max;
  return j;
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  LinkParams link;
  link.mass = 1.0;
  link.length = 1.0;
  link.com_distance = 0.5;
  link.inertia_com = 1.0 / 12.0;
  link.fric_dynamic = 0.5;
  link.fric_static = 0.3;
  cfg.robot.links = {link, link};
  const double h = std::numbers::pi / 2;
  cfg.position = BasisLayout::uniform({-h, -h}, {h, h}, 32, {10, 10});
  cfg.speed = BasisLayout::uniform({-cfg.dataset.v_max}, {cfg.dataset.v_max}, 16, {100});
  cfg.golgi.sparsity_target = 0.01;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.robot);
  validate(cfg.position);
  validate(cfg.speed);
  validate(cfg.golgi);
  validate(cfg.training);
  validate(cfg.dataset, cfg.robot.dof());
  if (cfg.position.dims() != cfg.robot.dof()) {
    throw ConfigError("position_layout.cells_per_dim", 0, "position code needs one dimension per joint");
  }
  if (cfg.speed.dims() != 1) throw ConfigError("speed_layout.cells_per_dim", 0, "speed code is 1-D");
}

ExperimentConfig experiment_from_text(std::string_view text, const std::string& base_dir) {
  return with_lines(text, [&] {
    const Json j = parse_config_text(text);
    Fields f(j, "");
    ExperimentConfig cfg = default_experiment();
    f.require("robot");
    const Json* robot = f.object("robot");
    if (robot->is_string()) {
      std::filesystem::path p(robot->get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      cfg.robot = build_planar_model(read_file(p.string()));
    } else {
      cfg.robot = robot_from_json(*robot);
    }
    if (const Json* pl = f.object("position_layout")) cfg.position = layout_from_json(*pl, "position_layout");
    if (const Json* sl = f.object("speed_layout")) cfg.speed = layout_from_json(*sl, "speed_layout");
    if (const Json* g = f.object("golgi")) cfg.golgi = golgi_from_json(*g);
    if (const Json* t = f.object("training")) cfg.training = training_from_json(*t);
    if (const Json* d = f.object("dataset")) cfg.dataset = dataset_spec_from_json(*d);
    cfg.out_dir = f.text("out_dir", cfg.out_dir);
    const long cal = f.integer("calibration_samples", static_cast<long>(cfg.calibration_samples));
    if (cal < 1) throw ConfigError("calibration_samples", 0, "must be >= 1");
    cfg.calibration_samples = static_cast<std::size_t>(cal);
    f.done();
    validate(cfg);
    return cfg;
  });
}

ExperimentConfig load_experiment(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return experiment_from_text(read_file(path), dir.empty() ? "." : dir);
}

Json experiment_to_json(const ExperimentConfig& cfg) {
  return {{"robot", robot_to_json(cfg.robot)},
          {"position_layout", layout_to_json(cfg.position)},
          {"speed_layout", layout_to_json(cfg.speed)},
          {"golgi", golgi_to_json(cfg.golgi)},
          {"training", training_to_json(cfg.training)},
          {"dataset", dataset_spec_to_json(cfg.dataset)},
          {"out_dir", cfg.out_dir},
          {"calibration_samples", cfg.calibration_samples}};
}

std::string layout_hash(const BasisLayout& position, const BasisLayout& speed) {
  return hash_hex(fnv1a("position{" + position.canonical() + "}speed{" + speed.canonical() + "}"));
}

}  // namespace cerebellum
