#pragma once

// JSON form of states and operators:
//   {"factor_dims": [d0, d1, ...], "re": [...], "im": [...]}
// Amplitudes are flattened row-major over factor order. An operator on a
// space of dimension d carries factor_dims [d] and d*d row-major entries.

#include <nlohmann/json.hpp>

#include "envar/linalg.hpp"

namespace envar {

nlohmann::json state_to_json(const StateVector& psi);
/// Throws Error on malformed input, DimensionMismatch on inconsistent sizes.
StateVector state_from_json(const nlohmann::json& j);

nlohmann::json operator_to_json(const Operator& op);
Operator operator_from_json(const nlohmann::json& j);

inline void to_json(nlohmann::json& j, const StateVector& psi) { j = state_to_json(psi); }
inline void to_json(nlohmann::json& j, const Operator& op) { j = operator_to_json(op); }

}  // namespace envar
