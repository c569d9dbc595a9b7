#include "isched/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "isched/error.hpp"
#include "json.hpp"

namespace isched {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

std::string hexfloat(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError("bad tensor value '" + s + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

Checkpoint to_checkpoint(const std::string& kind, const NetConfig& config, const std::vector<nn::ConstTensorRef>& refs,
                         std::uint64_t seed, const std::map<std::string, std::string>& notes) {
  Checkpoint c;
  c.kind = kind;
  c.seed = seed;
  c.config = config;
  c.notes = notes;
  for (const auto& r : refs) c.tensors.emplace_back(r.name, *r.value);
  return c;
}

void fill(const Checkpoint& c, const std::string& kind, std::vector<nn::TensorRef> refs) {
  if (c.kind != kind) throw ParseError("checkpoint holds a '" + c.kind + "' network, expected '" + kind + "'");
  if (c.tensors.size() != refs.size()) throw ParseError("checkpoint tensor count does not match the network");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& [name, value] = c.tensors[i];
    if (name != refs[i].name) throw ParseError("checkpoint tensor '" + name + "' where '" + refs[i].name + "' expected");
    if (value.rows() != refs[i].value->rows() || value.cols() != refs[i].value->cols()) {
      throw ParseError("checkpoint tensor '" + name + "' has the wrong shape");
    }
    *refs[i].value = value;
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Json root = Json::object();
  root["format"] = "isched-checkpoint";
  root["version"] = kFormatVersion;
  root["kind"] = ckpt.kind;
  root["seed"] = ckpt.seed;
  root["config"] = {{"hidden", ckpt.config.hidden}, {"layers", ckpt.config.layers}, {"head_hidden", ckpt.config.head_hidden}};
  Json notes = Json::object();
  for (const auto& [k, v] : ckpt.notes) notes[k] = v;
  root["notes"] = notes;
  Json shapes = Json::array();
  Json tensors = Json::array();
  for (const auto& [name, m] : ckpt.tensors) {
    shapes.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    Json data = Json::array();
    for (Eigen::Index i = 0; i < m.size(); ++i) data.push_back(hexfloat(m.data()[i]));
    tensors.push_back({{"name", name}, {"data", data}});
  }
  root["shapes"] = shapes;
  root["tensors"] = tensors;
  return root.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    if (root.at("format") != "isched-checkpoint") throw ParseError("not a checkpoint file");
    if (root.at("version").get<int>() != kFormatVersion) throw ParseError("unsupported checkpoint version");
    Checkpoint c;
    c.kind = root.at("kind").get<std::string>();
    c.seed = root.at("seed").get<std::uint64_t>();
    c.config.hidden = root.at("config").at("hidden").get<int>();
    c.config.layers = root.at("config").at("layers").get<int>();
    c.config.head_hidden = root.at("config").at("head_hidden").get<int>();
    for (const auto& [k, v] : root.at("notes").items()) c.notes[k] = v.get<std::string>();
    const Json& shapes = root.at("shapes");
    const Json& tensors = root.at("tensors");
    if (shapes.size() != tensors.size()) throw ParseError("checkpoint manifest and tensor list differ in length");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const std::string name = shapes[i].at("name").get<std::string>();
      const auto rows = shapes[i].at("rows").get<Eigen::Index>();
      const auto cols = shapes[i].at("cols").get<Eigen::Index>();
      const Json& data = tensors[i].at("data");
      if (tensors[i].at("name") != name || static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ParseError("checkpoint tensor '" + name + "' does not match its manifest entry");
      }
      nn::Matrix m(rows, cols);
      for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = parse_hexfloat(data[static_cast<std::size_t>(j)].get<std::string>());
      c.tensors.emplace_back(name, std::move(m));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_qnet(const std::string& path, const QNetworkParams& params, std::uint64_t seed,
               const std::map<std::string, std::string>& notes) {
  write_file(path, serialize_checkpoint(to_checkpoint("qnet", params.config, params.tensors(), seed, notes)));
}

QNetworkParams load_qnet(const std::string& path) {
  Checkpoint c = parse_checkpoint(read_file(path));
  QNetworkParams p = QNetworkParams::init(c.config, 0);
  fill(c, "qnet", p.tensors());
  return p;
}

void save_selector(const std::string& path, const SelectorParams& params, std::uint64_t seed,
                   const std::map<std::string, std::string>& notes) {
  write_file(path, serialize_checkpoint(to_checkpoint("selector", params.config, params.tensors(), seed, notes)));
}

SelectorParams load_selector(const std::string& path) {
  Checkpoint c = parse_checkpoint(read_file(path));
  SelectorParams p = SelectorParams::init(c.config, 0);
  fill(c, "selector", p.tensors());
  return p;
}

}  // namespace isched
