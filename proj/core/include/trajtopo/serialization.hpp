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

#ifndef TRAJTOPO_SERIALIZATION_HPP
#define TRAJTOPO_SERIALIZATION_HPP

#include <string>

#include "trajtopo/clustering.hpp"
#include "trajtopo/persistence.hpp"

namespace trajtopo {

/// Binary symmetric-matrix file: magic "TWFM", u32 side length, then
/// row-major 64-bit floats.
void write_matrix(const std::string& path, const Eigen::MatrixXd& d);
Eigen::MatrixXd read_matrix(const std::string& path);

/// Same binary layout as write_matrix. The index map is not part of the
/// format (it is implied by the dataset shape); read leaves it empty.
void write_filtration_matrix(const std::string& path, const FiltrationMatrix& m);
FiltrationMatrix read_filtration_matrix(const std::string& path);

/// JSON array of {dim, birth, death}, death = null for +inf. The in-memory
/// threshold is not part of the format; read_diagram_json leaves it at 0.
void write_diagram_json(const std::string& path, const PersistenceDiagram& diag);
PersistenceDiagram read_diagram_json(const std::string& path);

/// JSON object {"k": int, "labels": [int, ...]}.
void write_labels_json(const std::string& path, const ClusterLabels& labels);
ClusterLabels read_labels_json(const std::string& path);

}  // namespace trajtopo

#endif  // TRAJTOPO_SERIALIZATION_HPP
