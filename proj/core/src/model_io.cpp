/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "bilinsde/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bilinsde/error.hpp"

namespace bilinsde {

namespace {

constexpr const char* kFormat = "bilinsde-model/1";

template <typename T>
T require(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw StructuralError(std::string("model document lacks field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string model_to_text(const BilinearModel& model) {
  const int n = model.dim();
  const int d = model.noise_dim();
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["name"] = model.name();
  doc["dim"] = n;
  doc["noise_dim"] = d;
  doc["nu"] = model.nu();
  auto a = nlohmann::ordered_json::array();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.push_back(model.A()(i, j));
  doc["A"] = std::move(a);
  auto b = nlohmann::ordered_json::array();
  for (const auto& e : model.B().entries()) b.push_back({e.i, e.j, e.k, e.value});
  doc["B"] = std::move(b);
  auto sigma = nlohmann::ordered_json::array();
  for (int c = 0; c < d; ++c) {
    auto col = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) col.push_back(model.sigma()(i, c));
    sigma.push_back(std::move(col));
  }
  doc["sigma"] = std::move(sigma);
  return doc.dump(2) + "\n";
}

ModelPtr model_from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (doc.contains("format") && doc["format"] != kFormat)
    throw DataError("unsupported model format " + doc["format"].dump());

  const int n = require<int>(doc, "dim");
  const int d = require<int>(doc, "noise_dim");
  const double nu = require<double>(doc, "nu");
  if (n < 1 || d < 1) throw StructuralError("dim and noise_dim must be positive");

  const auto a_flat = require<std::vector<double>>(doc, "A");
  if (a_flat.size() != static_cast<std::size_t>(n) * n)
    throw StructuralError("A must hold dim*dim entries");
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = a_flat[static_cast<std::size_t>(i) * n + j];

  std::vector<TensorEntry> entries;
  for (const auto& row : require<nlohmann::json>(doc, "B")) {
    if (!row.is_array() || row.size() != 4) throw StructuralError("B entries must be [i, j, k, value]");
    entries.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(), row[3].get<double>()});
  }
  auto b = BilinearTensor::from_entries(n, std::move(entries));

  const auto cols = require<std::vector<std::vector<double>>>(doc, "sigma");
  if (cols.size() != static_cast<std::size_t>(d)) throw StructuralError("sigma must list noise_dim columns");
  Matrix sigma(n, d);
  for (int c = 0; c < d; ++c) {
    if (cols[c].size() != static_cast<std::size_t>(n)) throw StructuralError("sigma columns must have dim entries");
    for (int i = 0; i < n; ++i) sigma(i, c) = cols[c][i];
  }
  const std::string name = doc.value("name", std::string("custom"));
  return std::make_shared<const BilinearModel>(nu, std::move(a), std::move(b), std::move(sigma), name);
}

void save_model(const BilinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  out << model_to_text(model);
}

ModelPtr load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_text(buf.str());
}

}  // namespace bilinsde
