#pragma once

#include "shmpc/linalg.hpp"

#include <json.hpp>

#include <string>

namespace shmpc {

using Json = nlohmann::json;

/// Matrices serialize row-major as a list of rows.
Json to_json(const Mat& M);
Json to_json(const Vec& v);
Mat mat_from_json(const Json& j, Eigen::Index cols_if_empty = 0);
Vec vec_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace shmpc
