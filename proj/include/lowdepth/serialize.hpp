#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowdepth/circuit.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"

namespace lowdepth {

using json = nlohmann::json;

/// Gate JSON: {"qubits": [...], "kind": "dense"|"clifford"|"named", "data": ...}.
/// Dense data is the row-major matrix as [re, im] pairs; Clifford data holds
/// the signed Pauli labels of the X and Z images; named data is {name, angle}.
inline json gate_to_json(const Gate& g) {
  json j;
  j["qubits"] = g.qubits;
  j["kind"] = g.kind();
  if (const auto* d = std::get_if<DenseUnitary>(&g.payload)) {
    json data = json::array();
    for (Eigen::Index r = 0; r < d->matrix.rows(); ++r)
      for (Eigen::Index c = 0; c < d->matrix.cols(); ++c) data.push_back({d->matrix(r, c).real(), d->matrix(r, c).imag()});
    j["data"] = std::move(data);
  } else if (const auto* c = std::get_if<CliffordElement>(&g.payload)) {
    json xs = json::array(), zs = json::array();
    for (int q = 0; q < c->num_qubits(); ++q) {
      xs.push_back(c->x_image(q).label());
      zs.push_back(c->z_image(q).label());
    }
    j["data"] = {{"x_images", xs}, {"z_images", zs}};
  } else {
    const auto& n = std::get<NamedGate>(g.payload);
    j["data"] = {{"name", gate_name_str(n.name)}, {"angle", n.angle}};
  }
  return j;
}

inline Gate gate_from_json(const json& j) {
  try {
    auto qubits = j.at("qubits").get<std::vector<int>>();
    const auto kind = j.at("kind").get<std::string>();
    const auto& data = j.at("data");
    if (kind == "dense") {
      const auto d = static_cast<Eigen::Index>(pow2(static_cast<int>(qubits.size())));
      detail::require(data.size() == static_cast<std::size_t>(d * d), "dense gate: wrong matrix size");
      Matrix u(d, d);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
          const auto& e = data.at(static_cast<std::size_t>(r * d + c));
          u(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
      return Gate::dense(std::move(qubits), std::move(u));
    }
    if (kind == "clifford") {
      std::vector<PauliString> xs, zs;
      for (const auto& s : data.at("x_images")) xs.push_back(PauliString::from_label(s.get<std::string>()));
      for (const auto& s : data.at("z_images")) zs.push_back(PauliString::from_label(s.get<std::string>()));
      return Gate::clifford(std::move(qubits), CliffordElement(std::move(xs), std::move(zs)));
    }
    if (kind == "named")
      return Gate::named(parse_gate_name(data.at("name").get<std::string>()), std::move(qubits),
                         data.value("angle", 0.0));
    throw UsageError("unknown gate kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed gate JSON: ") + e.what());
  }
}

/// Circuit JSON: {"n": n, "layers": [[gate, ...], ...]}.
inline json circuit_to_json(const Circuit& c) {
  json layers = json::array();
  for (const auto& l : c.layers()) {
    json layer = json::array();
    for (const auto& g : l) layer.push_back(gate_to_json(g));
    layers.push_back(std::move(layer));
  }
  return {{"n", c.n()}, {"layers", std::move(layers)}};
}

inline Circuit circuit_from_json(const json& j) {
  try {
    Circuit c(j.at("n").get<int>());
    for (const auto& layer : j.at("layers")) {
      Layer l;
      for (const auto& g : layer) l.push_back(gate_from_json(g));
      c.add_layer(std::move(l));
    }
    return c;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed circuit JSON: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError("cannot parse " + what + ": " + e.what());
  }
}

inline Circuit load_circuit(const std::string& path) { return circuit_from_json(parse_json_text(read_text_file(path), path)); }

inline void save_circuit(const std::string& path, const Circuit& c) { write_text_file(path, circuit_to_json(c).dump() + "\n"); }

}  // namespace lowdepth
