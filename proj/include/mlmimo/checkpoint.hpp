#pragma once

#include <filesystem>
#include <string>

#include "mlmimo/neuralnet.hpp"

namespace mlmimo {

inline constexpr int kCheckpointFormatVersion = 1;

// JSON document: a header (format_version, n, M, lowest_level, K, xi_size,
// head, hidden, init_policy, activation, seed) followed by row-major arrays
// named "block<k>.<field>". Doubles are written in shortest round-trip form,
// so save/load is bit-exact.
std::string checkpoint_to_string(const DetectorNetwork& net);
DetectorNetwork checkpoint_from_string(const std::string& text);
void save_checkpoint(const DetectorNetwork& net, const std::filesystem::path& path);
DetectorNetwork load_checkpoint(const std::filesystem::path& path);

// Same container with head = "regression" and arrays "layer<k>.W", "layer<k>.b".
void save_regressor_checkpoint(const Regressor& net, const std::filesystem::path& path);
Regressor load_regressor_checkpoint(const std::filesystem::path& path);

// Throws DimensionMismatch when a loaded network cannot run on (model, c).
void require_compatible(const DetectorNetwork& net, const ChannelModel& model, const Constellation& c);

}  // namespace mlmimo
