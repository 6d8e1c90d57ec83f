#include "mlmimo/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mlmimo {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"shape", {m.rows(), m.cols()}}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

json vector_to_json(const RowVector& v) {
  return json{{"shape", {v.size()}}, {"data", std::vector<double>(v.data(), v.data() + v.size())}};
}

const json& require_key(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw CorruptCheckpoint("checkpoint is missing '" + key + "'");
  return *it;
}

Matrix matrix_from_json(const json& doc, const std::string& key) {
  const json& a = require_key(doc, key);
  try {
    const auto shape = a.at("shape").get<std::vector<long>>();
    const auto data = a.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] * shape[1] != static_cast<long>(data.size()))
      throw CorruptCheckpoint("array '" + key + "' has inconsistent shape");
    Matrix m(shape[0], shape[1]);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  } catch (const json::exception& e) {
    throw CorruptCheckpoint("array '" + key + "': " + e.what());
  }
}

RowVector vector_from_json(const json& doc, const std::string& key) {
  const json& a = require_key(doc, key);
  try {
    const auto shape = a.at("shape").get<std::vector<long>>();
    const auto data = a.at("data").get<std::vector<double>>();
    if (shape.size() != 1 || shape[0] != static_cast<long>(data.size()))
      throw CorruptCheckpoint("array '" + key + "' has inconsistent shape");
    return Eigen::Map<const RowVector>(data.data(), static_cast<Eigen::Index>(data.size()));
  } catch (const json::exception& e) {
    throw CorruptCheckpoint("array '" + key + "': " + e.what());
  }
}

json parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorruptCheckpoint(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CorruptCheckpoint("checkpoint root must be an object");
  const int version = require_key(doc, "format_version").get<int>();
  if (version != kCheckpointFormatVersion)
    throw FormatVersionMismatch("checkpoint format_version " + std::to_string(version) + " is not supported (expected " +
                                std::to_string(kCheckpointFormatVersion) + ")");
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string checkpoint_to_string(const DetectorNetwork& net) {
  net.validate();
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["n"] = net.n();
  doc["M"] = net.constellation.size();
  doc["lowest_level"] = net.constellation.min_level();
  doc["K"] = net.iterations();
  doc["xi_size"] = net.xi_size();
  doc["head"] = to_string(net.shape.head);
  doc["hidden"] = to_string(net.shape.hidden);
  doc["init_policy"] = to_string(net.init);
  doc["activation"] = {{"shifts", net.activation.shifts()},
                       {"offset", net.activation.offset()},
                       {"level_scale", net.activation.level_scale()}};
  doc["seed"] = net.seed;
  for (std::size_t k = 0; k < net.blocks.size(); ++k) {
    const IterationBlock& b = net.blocks[k];
    const std::string p = "block" + std::to_string(k) + ".";
    doc[p + "W1_a"] = matrix_to_json(b.w1_a);
    doc[p + "W1_b"] = matrix_to_json(b.w1_b);
    doc[p + "W1_c"] = matrix_to_json(b.w1_c);
    doc[p + "W1_d"] = matrix_to_json(b.w1_d);
    doc[p + "bias1"] = vector_to_json(b.bias1);
    doc[p + "W2"] = matrix_to_json(b.w2);
    doc[p + "bias2"] = vector_to_json(b.bias2);
    doc[p + "W3"] = matrix_to_json(b.w3);
    doc[p + "bias3"] = vector_to_json(b.bias3);
  }
  return doc.dump(1) + "\n";
}

DetectorNetwork checkpoint_from_string(const std::string& text) {
  const json doc = parse_document(text);
  DetectorNetwork net;
  try {
    const std::string head = require_key(doc, "head").get<std::string>();
    if (head == "regression") throw CorruptCheckpoint("checkpoint holds a regressor, not a detector network");
    net.shape.n = require_key(doc, "n").get<int>();
    net.shape.iterations = require_key(doc, "K").get<int>();
    net.shape.xi_size = require_key(doc, "xi_size").get<int>();
    net.shape.head = parse_output_head(head);
    net.shape.hidden = parse_hidden_activation(require_key(doc, "hidden").get<std::string>());
    net.init = parse_init_policy(require_key(doc, "init_policy").get<std::string>());
    net.constellation = Constellation(require_key(doc, "lowest_level").get<int>(), require_key(doc, "M").get<int>());
    const json& act = require_key(doc, "activation");
    net.activation = MultilevelSigmoid(act.at("shifts").get<std::vector<double>>(), act.at("offset").get<double>(),
                                       act.at("level_scale").get<double>());
    net.seed = require_key(doc, "seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint header: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint header: ") + e.what());
  }
  if (net.shape.iterations < 1 || net.shape.iterations > 100000) throw CorruptCheckpoint("bad iteration count");
  for (int k = 0; k < net.shape.iterations; ++k) {
    const std::string p = "block" + std::to_string(k) + ".";
    IterationBlock b;
    b.w1_a = matrix_from_json(doc, p + "W1_a");
    b.w1_b = matrix_from_json(doc, p + "W1_b");
    b.w1_c = matrix_from_json(doc, p + "W1_c");
    b.w1_d = matrix_from_json(doc, p + "W1_d");
    b.bias1 = vector_from_json(doc, p + "bias1");
    b.w2 = matrix_from_json(doc, p + "W2");
    b.bias2 = vector_from_json(doc, p + "bias2");
    b.w3 = matrix_from_json(doc, p + "W3");
    b.bias3 = vector_from_json(doc, p + "bias3");
    net.blocks.push_back(std::move(b));
  }
  try {
    net.validate();
  } catch (const Error& e) {
    throw CorruptCheckpoint(std::string("checkpoint arrays inconsistent with header: ") + e.what());
  }
  return net;
}

void save_checkpoint(const DetectorNetwork& net, const std::filesystem::path& path) {
  write_file(path, checkpoint_to_string(net));
}

DetectorNetwork load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_string(read_file(path)); }

void save_regressor_checkpoint(const Regressor& net, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["head"] = "regression";
  doc["n_inputs"] = net.input_size();
  doc["layers"] = net.layers.size();
  doc["seed"] = net.seed;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    doc["layer" + std::to_string(l) + ".W"] = matrix_to_json(net.layers[l].w);
    doc["layer" + std::to_string(l) + ".b"] = vector_to_json(net.layers[l].b);
  }
  write_file(path, doc.dump(1) + "\n");
}

Regressor load_regressor_checkpoint(const std::filesystem::path& path) {
  const json doc = parse_document(read_file(path));
  Regressor net;
  try {
    if (require_key(doc, "head").get<std::string>() != "regression")
      throw CorruptCheckpoint("checkpoint does not hold a regressor");
    const auto layers = require_key(doc, "layers").get<std::size_t>();
    net.seed = require_key(doc, "seed").get<std::uint64_t>();
    for (std::size_t l = 0; l < layers; ++l)
      net.layers.push_back({matrix_from_json(doc, "layer" + std::to_string(l) + ".W"),
                            vector_from_json(doc, "layer" + std::to_string(l) + ".b")});
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(std::string("bad regressor checkpoint: ") + e.what());
  }
  if (net.layers.empty()) throw CorruptCheckpoint("regressor has no layers");
  return net;
}

void require_compatible(const DetectorNetwork& net, const ChannelModel& model, const Constellation& c) {
  if (net.n() != model.n())
    throw DimensionMismatch("checkpoint n=" + std::to_string(net.n()) + " does not match channel n=" +
                            std::to_string(model.n()));
  if (!(net.constellation == c))
    throw DimensionMismatch("checkpoint constellation (M=" + std::to_string(net.constellation.size()) +
                            ") does not match the evaluation constellation (M=" + std::to_string(c.size()) + ")");
}

}  // namespace mlmimo
