#pragma once

#include <string>

#include <json.hpp>

#include "defcal/runtime.hpp"

namespace defcal {

nlohmann::json to_json(const Value& w);
nlohmann::json to_json(const Store& s);
nlohmann::json to_json(const Frame& f);
nlohmann::json to_json(const Configuration& cn);

// Deterministic rendering of the state proper (allocation metadata
// excluded); equal configurations serialize identically.
std::string canonical_serialization(const Configuration& cn);

std::string sha256_hex(std::string_view data);

inline std::string digest(const Configuration& cn) {
  return sha256_hex(canonical_serialization(cn));
}

}  // namespace defcal
