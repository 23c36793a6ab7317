/*
 Copyright 2026 trajtopo contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "trajtopo/serialization.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace trajtopo {

namespace {

constexpr char kMatrixMagic[4] = {'T', 'W', 'F', 'M'};

void check_stream(const std::ios& s, const std::string& path, const char* action) {
  if (!s) throw std::runtime_error(std::string(action) + " failed: " + path);
}

}  // namespace

void write_matrix(const std::string& path, const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) throw std::invalid_argument("matrix must be square");
  std::ofstream out(path, std::ios::binary);
  check_stream(out, path, "open for write");
  out.write(kMatrixMagic, 4);
  const std::uint32_t side = static_cast<std::uint32_t>(d.rows());
  out.write(reinterpret_cast<const char*>(&side), sizeof(side));
  for (std::uint32_t i = 0; i < side; ++i)
    for (std::uint32_t j = 0; j < side; ++j) {
      const double v = d(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  check_stream(out, path, "write");
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_stream(in, path, "open for read");
  char magic[4];
  in.read(magic, 4);
  check_stream(in, path, "read");
  if (std::memcmp(magic, kMatrixMagic, 4) != 0)
    throw std::runtime_error("bad magic in matrix file: " + path);
  std::uint32_t side = 0;
  in.read(reinterpret_cast<char*>(&side), sizeof(side));
  check_stream(in, path, "read");
  Eigen::MatrixXd d(side, side);
  for (std::uint32_t i = 0; i < side; ++i)
    for (std::uint32_t j = 0; j < side; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      d(i, j) = v;
    }
  check_stream(in, path, "read");
  return d;
}

void write_filtration_matrix(const std::string& path, const FiltrationMatrix& m) {
  write_matrix(path, m.d);
}

FiltrationMatrix read_filtration_matrix(const std::string& path) {
  FiltrationMatrix m;
  m.d = read_matrix(path);
  return m;
}

void write_diagram_json(const std::string& path, const PersistenceDiagram& diag) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : diag.features) {
    nlohmann::json item;
    item["dim"] = f.dim;
    item["birth"] = f.birth;
    if (std::isinf(f.death))
      item["death"] = nullptr;
    else
      item["death"] = f.death;
    arr.push_back(item);
  }
  std::ofstream out(path);
  check_stream(out, path, "open for write");
  out << arr.dump(2) << "\n";
  check_stream(out, path, "write");
}

PersistenceDiagram read_diagram_json(const std::string& path) {
  std::ifstream in(path);
  check_stream(in, path, "open for read");
  nlohmann::json arr = nlohmann::json::parse(in);
  PersistenceDiagram diag;
  for (const auto& item : arr) {
    PersistenceFeature f;
    f.dim = item.at("dim").get<int>();
    f.birth = item.at("birth").get<double>();
    f.death = item.at("death").is_null() ? std::numeric_limits<double>::infinity()
                                         : item.at("death").get<double>();
    diag.features.push_back(f);
  }
  return diag;
}

void write_labels_json(const std::string& path, const ClusterLabels& labels) {
  nlohmann::json j;
  j["k"] = labels.k;
  j["labels"] = labels.labels;
  std::ofstream out(path);
  check_stream(out, path, "open for write");
  out << j.dump(2) << "\n";
  check_stream(out, path, "write");
}

ClusterLabels read_labels_json(const std::string& path) {
  std::ifstream in(path);
  check_stream(in, path, "open for read");
  nlohmann::json j = nlohmann::json::parse(in);
  ClusterLabels labels;
  labels.k = j.at("k").get<int>();
  labels.labels = j.at("labels").get<std::vector<int>>();
  return labels;
}

}  // namespace trajtopo
