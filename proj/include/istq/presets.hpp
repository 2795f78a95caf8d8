#pragma once

// Reference parameter sets for the three circuit designs (single junction,
// 9-junction arrays, adapted 5-junction arrays), all at phi_Xb = 0.

#include <stdexcept>
#include <string>

#include "istq/circuit.hpp"

namespace istq::presets {

// Single coupling junction per branch, k = 1.
inline CircuitParams single_junction() {
  CircuitParams p;
  p.variant = Variant::SingleJunction;
  p.E_Jq = 10.0;
  p.E_Jsigma = 20.0;
  p.d = 0.08;
  p.C = 114.0;
  p.C_q = 70.0;
  p.L = 4.5;
  p.k = 1;
  return p;
}

// Coupling junction arrays, k = 9.
inline CircuitParams junction_array() {
  CircuitParams p;
  p.variant = Variant::Array;
  p.E_Jq = 10.0;
  p.E_Jsigma = 160.0;
  p.d = 0.02;
  p.C = 102.0;
  p.C_q = 60.0;
  p.L = 5.0;
  p.k = 9;
  return p;
}

// Arrays behind an added series inductance L_a, k = 5.
inline CircuitParams adapted() {
  CircuitParams p;
  p.variant = Variant::Adapted;
  p.E_Jq = 5.0;
  p.E_Jsigma = 155.0;
  p.d = 0.02;
  p.C = 65.0;
  p.C_q = 50.0;
  p.L = 4.5;
  p.L_a = 3.0;
  p.k = 5;
  return p;
}

/// Preset by table number 1, 2 or 3.
inline CircuitParams table(int n) {
  switch (n) {
    case 1: return single_junction();
    case 2: return junction_array();
    case 3: return adapted();
  }
  throw std::invalid_argument("presets::table: expected 1, 2 or 3, got " + std::to_string(n));
}

inline CircuitParams by_name(const std::string& name) {
  if (name == "table1" || name == "single") return single_junction();
  if (name == "table2" || name == "array") return junction_array();
  if (name == "table3" || name == "adapted") return adapted();
  throw std::invalid_argument("unknown preset '" + name + "' (expected table1, table2 or table3)");
}

}  // namespace istq::presets
