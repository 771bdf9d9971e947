#pragma once

#include <nlohmann/json.hpp>

#include "multiexec/model.hpp"

namespace multiexec::detail {

ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& p);

/// Reads a d x d matrix given either as nested rows or as a flat row-major
/// array of d*d numbers (a bare number is accepted when d == 1).
MatrixXd read_matrix(const nlohmann::json& j, int d, const char* field);
VectorXd read_vector(const nlohmann::json& j, int d, const char* field);
nlohmann::json matrix_to_json(const MatrixXd& m);
nlohmann::json vector_to_json(const VectorXd& v);

}  // namespace multiexec::detail
