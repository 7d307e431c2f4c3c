#pragma once

// Versioned JSON weight store: hashes, census, layouts and every weight vector.

#include <iosfwd>
#include <string>

#include "cerebellum/dynamics.hpp"
#include "cerebellum/network.hpp"

namespace cerebellum {

inline constexpr int kWeightStoreVersion = 1;

void save_weights(std::ostream& os, const Network& net, const RobotModel& model);

/// Throws ConsistencyError when the stored robot or layout hash differs from
/// the expected one, InputError when the file is malformed.
Network load_weights(std::istream& is, const RobotModel& model, const std::string& expected_layout_hash);

}  // namespace cerebellum
