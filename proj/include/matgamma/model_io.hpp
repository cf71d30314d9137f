#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "matgamma/models.hpp"
#include "matgamma/quadform.hpp"

namespace matgamma {

// Model files: {"family": "T1"|"T1.5"|"T2"|"T3", "n":, "k":, ...} with
// matrices as row-major nested arrays.  Round trips are lossless at full
// double precision.
nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

// T1-based quadratic-form model: the T1 payload plus an optional "shift"
// (n x k mean offset M).
nlohmann::json qf_model_to_json(const QFModel& model);
QFModel qf_model_from_json(const nlohmann::json& j);

void save_model_file(const ModelSpec& spec, const std::string& path);
ModelSpec load_model_file(const std::string& path);
QFModel load_qf_model_file(const std::string& path);

// Matrix <-> JSON / CSV helpers shared by the CLI.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const Matrix& m, std::ostream& os);

}  // namespace matgamma
