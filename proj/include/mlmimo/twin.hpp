#pragma once

#include <filesystem>

#include "mlmimo/classic.hpp"
#include "mlmimo/neuralnet.hpp"

namespace mlmimo {

// Uniform over [min level, max level] per component.
RowVector random_init_point(RngStream& rng, const Constellation& c, int n);

// y·G⁻¹ clamped to [min level, max level], not sliced.
RowVector zf_init_point(const RowVector& y, const ChannelModel& model, const Constellation& c);

// ẑ0 for one received vector under `policy`.
RowVector initial_point(InitPolicy policy, const RowVector& y, const ChannelModel& model, const Constellation& c,
                        RngStream& rng);
// Row-wise version for a batch.
Matrix initial_points(InitPolicy policy, const Matrix& y, const ChannelModel& model, const Constellation& c,
                      RngStream& rng);

// Candidate with the smaller ‖y − ẑ·G‖²; ties go to candidate_b.
IntRowVector select_closer(const RowVector& y, const ChannelModel& model, const IntRowVector& candidate_a,
                           const IntRowVector& candidate_b);

// net_a starts from a random point, net_b from the ZF point; the closer
// sliced candidate wins.
DetectionResult twin_detect(const RowVector& y, const ChannelModel& model, const Constellation& c,
                            const DetectorNetwork& net_a, const DetectorNetwork& net_b, RngStream& rng);

// Batch form; rows of y are independent trials.
IntMatrix twin_detect_batch(const Matrix& y, const ChannelModel& model, const Constellation& c,
                            const DetectorNetwork& net_a, const DetectorNetwork& net_b, RngStream& rng);

struct TwinManifest {
  std::filesystem::path net_a;  // relative paths resolve against the manifest's directory
  InitPolicy init_a = InitPolicy::random;
  std::filesystem::path net_b;
  InitPolicy init_b = InitPolicy::zf;
};

void save_twin_manifest(const TwinManifest& manifest, const std::filesystem::path& path);
TwinManifest load_twin_manifest(const std::filesystem::path& path);

struct TwinNetworks {
  DetectorNetwork net_a;
  DetectorNetwork net_b;
};

// Loads both checkpoints named by a manifest.
TwinNetworks load_twin(const std::filesystem::path& manifest_path);

}  // namespace mlmimo
