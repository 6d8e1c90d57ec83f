#include "mlmimo/twin.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mlmimo/checkpoint.hpp"

namespace mlmimo {

RowVector random_init_point(RngStream& rng, const Constellation& c, int n) {
  RowVector z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.uniform(c.min_level(), c.max_level());
  return z;
}

RowVector zf_init_point(const RowVector& y, const ChannelModel& model, const Constellation& c) {
  if (y.size() != model.n()) throw DimensionMismatch("zf_init_point: received vector length mismatch");
  return clamp_to_hull(y * model.g_inv(), c);
}

RowVector initial_point(InitPolicy policy, const RowVector& y, const ChannelModel& model, const Constellation& c,
                        RngStream& rng) {
  switch (policy) {
    case InitPolicy::zero: return RowVector::Zero(model.n());
    case InitPolicy::random: return random_init_point(rng, c, model.n());
    case InitPolicy::zf: return zf_init_point(y, model, c);
  }
  return RowVector::Zero(model.n());
}

Matrix initial_points(InitPolicy policy, const Matrix& y, const ChannelModel& model, const Constellation& c,
                      RngStream& rng) {
  if (y.cols() != model.n()) throw DimensionMismatch("initial_points: batch width mismatch");
  Matrix z0(y.rows(), model.n());
  switch (policy) {
    case InitPolicy::zero:
      z0.setZero();
      break;
    case InitPolicy::random:
      for (Eigen::Index i = 0; i < z0.size(); ++i) z0.data()[i] = rng.uniform(c.min_level(), c.max_level());
      break;
    case InitPolicy::zf:
      z0 = (y * model.g_inv()).cwiseMax(static_cast<double>(c.min_level())).cwiseMin(static_cast<double>(c.max_level()));
      break;
  }
  return z0;
}

IntRowVector select_closer(const RowVector& y, const ChannelModel& model, const IntRowVector& candidate_a,
                           const IntRowVector& candidate_b) {
  const double da = squared_distance(y, candidate_a, model);
  const double db = squared_distance(y, candidate_b, model);
  return da < db ? candidate_a : candidate_b;
}

DetectionResult twin_detect(const RowVector& y, const ChannelModel& model, const Constellation& c,
                            const DetectorNetwork& net_a, const DetectorNetwork& net_b, RngStream& rng) {
  const RowVector za0 = random_init_point(rng, c, model.n());
  const RowVector zb0 = zf_init_point(y, model, c);
  const IntRowVector a = decide(net_a, Matrix(y), model, Matrix(za0)).row(0);
  const IntRowVector b = decide(net_b, Matrix(y), model, Matrix(zb0)).row(0);
  const IntRowVector pick = select_closer(y, model, a, b);
  return {pick, pick.cast<double>()};
}

IntMatrix twin_detect_batch(const Matrix& y, const ChannelModel& model, const Constellation& c,
                            const DetectorNetwork& net_a, const DetectorNetwork& net_b, RngStream& rng) {
  const Matrix za0 = initial_points(InitPolicy::random, y, model, c, rng);
  const Matrix zb0 = initial_points(InitPolicy::zf, y, model, c, rng);
  const IntMatrix a = decide(net_a, y, model, za0);
  const IntMatrix b = decide(net_b, y, model, zb0);
  IntMatrix out(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) out.row(r) = select_closer(y.row(r), model, a.row(r), b.row(r));
  return out;
}

void save_twin_manifest(const TwinManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["net_a"] = {{"checkpoint", manifest.net_a.generic_string()}, {"init_policy", to_string(manifest.init_a)}};
  doc["net_b"] = {{"checkpoint", manifest.net_b.generic_string()}, {"init_policy", to_string(manifest.init_b)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
}

TwinManifest load_twin_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open twin manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    const auto doc = nlohmann::json::parse(ss.str());
    if (doc.at("format_version").get<int>() != 1) throw FormatVersionMismatch("unsupported twin manifest version");
    TwinManifest m;
    m.net_a = doc.at("net_a").at("checkpoint").get<std::string>();
    m.init_a = parse_init_policy(doc.at("net_a").at("init_policy").get<std::string>());
    m.net_b = doc.at("net_b").at("checkpoint").get<std::string>();
    m.init_b = parse_init_policy(doc.at("net_b").at("init_policy").get<std::string>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint("bad twin manifest " + path.string() + ": " + e.what());
  }
}

TwinNetworks load_twin(const std::filesystem::path& manifest_path) {
  const TwinManifest m = load_twin_manifest(manifest_path);
  if (m.init_a != InitPolicy::random || m.init_b != InitPolicy::zf)
    throw InvalidConfig("twin manifest must pair a random-init net_a with a zf-init net_b");
  const auto base = manifest_path.parent_path();
  auto resolve = [&base](const std::filesystem::path& p) { return p.is_absolute() ? p : base / p; };
  TwinNetworks t{load_checkpoint(resolve(m.net_a)), load_checkpoint(resolve(m.net_b))};
  t.net_a.init = m.init_a;
  t.net_b.init = m.init_b;
  return t;
}

}  // namespace mlmimo
