#include "matgamma/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace matgamma {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix JSON must be a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols)
      throw std::invalid_argument("matrix JSON has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["family"] = family_name(family_of(spec));
  j["n"] = model_n(spec);
  j["k"] = model_k(spec);
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, T1Spec>) {
          json grid = json::array();
          for (int i = 0; i < s.k(); ++i) {
            json row = json::array();
            for (int jj = 0; jj < s.k(); ++jj)
              row.push_back(matrix_to_json(s.A(i, jj)));
            grid.push_back(std::move(row));
          }
          j["A"] = std::move(grid);
          j["b"] = matrix_to_json(s.frame());
        } else if constexpr (std::is_same_v<T, T15Spec>) {
          json blocks = json::array();
          for (int jj = 0; jj < s.k(); ++jj)
            blocks.push_back(matrix_to_json(s.A(jj)));
          j["A"] = std::move(blocks);
          j["b"] = matrix_to_json(s.frame());
        } else if constexpr (std::is_same_v<T, T2Spec>) {
          j["a"] = matrix_to_json(s.left_frame());
          j["b"] = matrix_to_json(s.frame());
          j["gamma"] = matrix_to_json(s.gamma());
        } else {
          j["phi"] = matrix_to_json(s.phi());
          j["psi"] = matrix_to_json(s.psi());
          if (s.mean().cwiseAbs().maxCoeff() > 0.0)
            j["m"] = matrix_to_json(s.mean());
        }
      },
      spec);
  return j;
}

ModelSpec model_from_json(const json& j) {
  const FamilyTag tag = family_from_name(j.at("family").get<std::string>());
  const int n = j.at("n"), k = j.at("k");
  switch (tag) {
    case FamilyTag::T1: {
      std::vector<std::vector<Matrix>> grid;
      for (const auto& row : j.at("A")) {
        grid.emplace_back();
        for (const auto& cell : row) grid.back().push_back(matrix_from_json(cell));
      }
      return T1Spec(n, k, std::move(grid), matrix_from_json(j.at("b")));
    }
    case FamilyTag::T15: {
      std::vector<Matrix> blocks;
      for (const auto& cell : j.at("A")) blocks.push_back(matrix_from_json(cell));
      return T15Spec(n, k, std::move(blocks), matrix_from_json(j.at("b")));
    }
    case FamilyTag::T2:
      return T2Spec(n, k, matrix_from_json(j.at("a")),
                    matrix_from_json(j.at("b")), matrix_from_json(j.at("gamma")));
    case FamilyTag::T3:
      return T3Spec(matrix_from_json(j.at("phi")), matrix_from_json(j.at("psi")),
                    j.contains("m") ? matrix_from_json(j.at("m")) : Matrix());
  }
  throw std::invalid_argument("model_from_json: bad family");
}

json qf_model_to_json(const QFModel& model) {
  json j = model_to_json(ModelSpec(model.spec()));
  if (!model.central()) j["shift"] = matrix_to_json(model.shift());
  return j;
}

QFModel qf_model_from_json(const json& j) {
  ModelSpec spec = model_from_json(j);
  T1Spec* t1 = std::get_if<T1Spec>(&spec);
  if (!t1)
    throw std::invalid_argument(
        "quadratic-form models require a T1 payload (convert first)");
  Matrix shift;
  if (j.contains("shift")) shift = matrix_from_json(j.at("shift"));
  return QFModel(std::move(*t1), std::move(shift));
}

void save_model_file(const ModelSpec& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write model file " + path);
  os << model_to_json(spec).dump(2) << '\n';
}

namespace {
json parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open model file " + path);
  json j;
  is >> j;
  return j;
}
}  // namespace

ModelSpec load_model_file(const std::string& path) {
  return model_from_json(parse_file(path));
}

QFModel load_qf_model_file(const std::string& path) {
  return qf_model_from_json(parse_file(path));
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("matrix file " + path + " is empty");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::runtime_error("matrix file " + path + " has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix_csv(const Matrix& m, std::ostream& os) {
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace matgamma
