#include <fstream>
#include <sstream>

#include "json_params.hpp"

namespace multiexec {
namespace detail {

using nlohmann::json;

namespace {

double read_number(const json& j, const char* field) {
  if (!j.is_number()) throw ConfigError(std::string(field) + ": expected a number");
  return j.get<double>();
}

}  // namespace

MatrixXd read_matrix(const json& j, int d, const char* field) {
  MatrixXd m(d, d);
  if (j.is_number() && d == 1) {
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array()) throw ConfigError(std::string(field) + ": expected an array");
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<int>(j.size()) != d) throw ConfigError(std::string(field) + ": expected d rows");
    for (int r = 0; r < d; ++r) {
      const json& row = j[r];
      if (!row.is_array() || static_cast<int>(row.size()) != d)
        throw ConfigError(std::string(field) + ": expected d columns per row");
      for (int c = 0; c < d; ++c) m(r, c) = read_number(row[c], field);
    }
    return m;
  }
  if (static_cast<int>(j.size()) != d * d)
    throw ConfigError(std::string(field) + ": expected d*d row-major entries");
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = read_number(j[r * d + c], field);
  return m;
}

VectorXd read_vector(const json& j, int d, const char* field) {
  VectorXd v(d);
  if (j.is_number() && d == 1) {
    v(0) = j.get<double>();
    return v;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(std::string(field) + ": expected an array of d numbers");
  for (int i = 0; i < d; ++i) v(i) = read_number(j[i], field);
  return v;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ModelParams params_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const char* key : {"d", "lambda", "gamma", "rho", "sigma", "T"})
    if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  if (!j["d"].is_number_integer()) throw ConfigError("d: expected an integer");
  ModelParams p;
  p.d = j["d"].get<int>();
  if (p.d < 1) throw ConfigError("d: must be a positive integer");
  p.horizon = read_number(j["T"], "T");
  p.lambda = read_matrix(j["lambda"], p.d, "lambda");
  p.gamma = read_vector(j["gamma"], p.d, "gamma");

  auto pieces = [&](const json& arr, const char* field) {
    if (!arr.is_array() || arr.empty())
      throw ConfigError(std::string(field) + ": expected a non-empty array of {t_start, value}");
    for (const auto& e : arr)
      if (!e.is_object() || !e.contains("t_start") || !e.contains("value"))
        throw ConfigError(std::string(field) + ": each piece needs t_start and value");
    return arr;
  };

  std::vector<VectorSchedule::Piece> rho;
  for (const auto& e : pieces(j["rho"], "rho")) {
    const json& v = e["value"];
    VectorXd diag;
    if (v.is_array() && !v.empty() && v.front().is_array()) {
      MatrixXd m = read_matrix(v, p.d, "rho");
      MatrixXd off = m;
      off.diagonal().setZero();
      if (off.cwiseAbs().maxCoeff() > 0.0) throw ConfigError("rho: only diagonal resilience is supported");
      diag = m.diagonal();
    } else {
      diag = read_vector(v, p.d, "rho");
    }
    rho.push_back({read_number(e["t_start"], "rho.t_start"), diag});
  }
  p.rho = VectorSchedule(std::move(rho));

  std::vector<MatrixSchedule::Piece> sigma;
  for (const auto& e : pieces(j["sigma"], "sigma"))
    sigma.push_back({read_number(e["t_start"], "sigma.t_start"), read_matrix(e["value"], p.d, "sigma")});
  p.sigma = MatrixSchedule(std::move(sigma));
  return p;
}

json params_to_json(const ModelParams& p) {
  json j;
  j["d"] = p.d;
  j["lambda"] = matrix_to_json(p.lambda);
  j["gamma"] = vector_to_json(p.gamma);
  json rho = json::array();
  for (const auto& piece : p.rho.pieces())
    rho.push_back({{"t_start", piece.t_start}, {"value", vector_to_json(piece.value)}});
  j["rho"] = std::move(rho);
  json sigma = json::array();
  for (const auto& piece : p.sigma.pieces())
    sigma.push_back({{"t_start", piece.t_start}, {"value", matrix_to_json(piece.value)}});
  j["sigma"] = std::move(sigma);
  j["T"] = p.horizon;
  return j;
}

}  // namespace detail

ModelParams parse_params(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return detail::params_from_json(j);
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str());
}

std::string dump_params(const ModelParams& params) { return detail::params_to_json(params).dump(2); }

}  // namespace multiexec
