#include "cerebellum/weights.hpp"

#include <istream>
#include <ostream>

#include "cerebellum/config.hpp"
#include "cerebellum/errors.hpp"

namespace cerebellum {

namespace {

std::string stellate_kind(StellateKind k) { return k == StellateKind::dynamic ? "dynamic" : "static"; }

template <class T>
void load_vector(const Json& j, const char* key, std::vector<T>& into) {
  const auto v = j.at(key).get<std::vector<T>>();
  if (v.size() != into.size()) {
    throw InputError(std::string("weight store: '") + key + "' holds " + std::to_string(v.size()) +
                     " values, expected " + std::to_string(into.size()));
  }
  into = v;
}

}  // namespace

void save_weights(std::ostream& os, const Network& net, const RobotModel& model) {
  Json zones = Json::array();
  std::size_t trainable = 0;
  for (const Microzone& mz : net.zones) {
    Json cepus = Json::array();
    for (const CePU& c : mz.cepus) {
      cepus.push_back({{"family", to_string(c.family)}, {"index", c.index}, {"encoder", c.encoder}, {"w_pc", c.w_pc}});
    }
    Json baskets = Json::array();
    for (const BasketCell& b : mz.baskets) {
      baskets.push_back({{"target_speed", b.target_speed},
                         {"sample_stride", b.sample_stride},
                         {"cells", b.cells},
                         {"w_bc", b.w_bc}});
    }
    Json stellates = Json::array();
    for (const StellateCell& s : mz.stellates) {
      stellates.push_back({{"kind", stellate_kind(s.kind)}, {"cells", s.cells}, {"w_sc", s.w_sc}, {"w_sp", s.w_sp}});
    }
    trainable += mz.trainable_weight_count();
    zones.push_back({{"joint", mz.joint}, {"cepus", cepus}, {"baskets", baskets}, {"stellates", stellates}});
  }
  const std::size_t per_zone = net.zones.empty() ? 0 : net.zones.front().cepus.size();
  Json j = {{"format", "cerebellum-weights"},
            {"version", kWeightStoreVersion},
            {"robot_hash", robot_hash(model)},
            {"layout_hash", layout_hash(net.position, net.speed)},
            {"census",
             {{"dof", net.dof()},
              {"cepus_per_zone", per_zone},
              {"baskets_per_zone", static_cast<std::size_t>(net.dof())},
              {"stellates_per_zone", 2},
              {"trainable_weights", trainable}}},
            {"position_layout", layout_to_json(net.position)},
            {"speed_layout", layout_to_json(net.speed)},
            {"golgi", golgi_to_json(net.golgi)},
            {"zones", zones}};
  os << j.dump(1) << '\n';
}

Network load_weights(std::istream& is, const RobotModel& model, const std::string& expected_layout_hash) {
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw InputError(std::string("weight store is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "cerebellum-weights") throw InputError("not a weight store");
    if (j.at("version") != kWeightStoreVersion) {
      throw InputError("unsupported weight store version " + j.at("version").dump());
    }
    const std::string stored_robot = j.at("robot_hash");
    const std::string stored_layout = j.at("layout_hash");
    if (stored_robot != robot_hash(model)) {
      throw ConsistencyError("weight store robot hash " + stored_robot + " does not match config " + robot_hash(model));
    }
    if (stored_layout != expected_layout_hash) {
      throw ConsistencyError("weight store layout hash " + stored_layout + " does not match config " +
                             expected_layout_hash);
    }
    const BasisLayout position = layout_from_json(j.at("position_layout"), "position_layout");
    const BasisLayout speed = layout_from_json(j.at("speed_layout"), "speed_layout");
    if (layout_hash(position, speed) != stored_layout) {
      throw ConsistencyError("weight store layouts do not hash to the recorded layout hash");
    }
    const GolgiParams golgi = golgi_from_json(j.at("golgi"));
    Network net = build_microzones(model, position, speed, golgi);
    const Json& zones = j.at("zones");
    if (zones.size() != net.zones.size()) throw InputError("weight store microzone count differs from the robot");
    for (std::size_t z = 0; z < net.zones.size(); ++z) {
      Microzone& mz = net.zones[z];
      const Json& jz = zones[z];
      const Json& cepus = jz.at("cepus");
      const Json& baskets = jz.at("baskets");
      const Json& stellates = jz.at("stellates");
      if (cepus.size() != mz.cepus.size() || baskets.size() != mz.baskets.size() ||
          stellates.size() != mz.stellates.size()) {
        throw InputError("weight store census differs from the network built for this robot");
      }
      for (std::size_t c = 0; c < mz.cepus.size(); ++c) {
        if (cepus[c].at("family") != to_string(mz.cepus[c].family)) throw InputError("weight store CePU order differs");
        load_vector(cepus[c], "w_pc", mz.cepus[c].w_pc);
      }
      for (std::size_t b = 0; b < mz.baskets.size(); ++b) {
        load_vector(baskets[b], "cells", mz.baskets[b].cells);
        load_vector(baskets[b], "w_bc", mz.baskets[b].w_bc);
      }
      for (std::size_t s = 0; s < mz.stellates.size(); ++s) {
        load_vector(stellates[s], "cells", mz.stellates[s].cells);
        load_vector(stellates[s], "w_sc", mz.stellates[s].w_sc);
        mz.stellates[s].w_sp = stellates[s].at("w_sp").get<double>();
      }
    }
    return net;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed weight store: ") + e.what());
  }
}

}  // namespace cerebellum
