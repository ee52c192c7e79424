#include "envar/serialize.hpp"

#include <string>
#include <vector>

namespace envar {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error("expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw Error("unknown field '" + key + "'");
  }
  for (const char* k : keys) {
    if (!j.contains(k)) throw Error(std::string("missing field '") + k + "'");
  }
}

std::vector<double> numbers(const json& j, const char* key) {
  const json& arr = j.at(key);
  if (!arr.is_array()) throw Error(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& x : arr) {
    if (!x.is_number()) throw Error(std::string("field '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Dims dims_of(const json& j) {
  const json& arr = j.at("factor_dims");
  if (!arr.is_array() || arr.empty()) throw Error("field 'factor_dims' must be a non-empty array");
  Dims dims;
  for (const json& x : arr) {
    if (!x.is_number_integer() || x.get<std::int64_t>() <= 0) {
      throw Error("field 'factor_dims' must hold positive integers");
    }
    dims.push_back(x.get<std::size_t>());
  }
  return dims;
}

}  // namespace

json state_to_json(const StateVector& psi) {
  std::vector<double> re, im;
  re.reserve(psi.dim());
  im.reserve(psi.dim());
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    re.push_back(psi[i].real());
    im.push_back(psi[i].imag());
  }
  return json{{"factor_dims", psi.factor_dims()}, {"re", re}, {"im", im}};
}

StateVector state_from_json(const json& j) {
  require_keys(j, {"factor_dims", "re", "im"});
  const Dims dims = dims_of(j);
  const auto re = numbers(j, "re");
  const auto im = numbers(j, "im");
  if (re.size() != im.size()) throw DimensionMismatch("'re' and 'im' lengths differ");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
  return StateVector(std::move(v), dims);
}

json operator_to_json(const Operator& op) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  std::vector<double> re, im;
  re.reserve(op.dim() * op.dim());
  im.reserve(op.dim() * op.dim());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      re.push_back(op.matrix()(r, c).real());
      im.push_back(op.matrix()(r, c).imag());
    }
  }
  return json{{"factor_dims", Dims{op.dim()}}, {"re", re}, {"im", im}};
}

Operator operator_from_json(const json& j) {
  require_keys(j, {"factor_dims", "re", "im"});
  const std::size_t d = product(dims_of(j));
  const auto re = numbers(j, "re");
  const auto im = numbers(j, "im");
  if (re.size() != d * d || im.size() != d * d) {
    throw DimensionMismatch("operator on dimension " + std::to_string(d) + " needs " +
                            std::to_string(d * d) + " entries");
  }
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto k = static_cast<std::size_t>(r * n + c);
      m(r, c) = Complex(re[k], im[k]);
    }
  }
  return Operator(std::move(m));
}

}  // namespace envar
