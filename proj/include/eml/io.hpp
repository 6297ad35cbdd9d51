#pragma once

// Interchange formats for expressions: JSON and Graphviz DOT.

#include <string>

#include <json.hpp>

#include "eml/complex.hpp"
#include "eml/expr.hpp"

namespace eml {

/// {"op":"eml","args":[...]} / {"t":"1"} / {"var":"x"}
nlohmann::json to_json(const Expr& e);
Expr expr_from_json(const nlohmann::json& j);

/// Deterministic DOT digraph: node ids follow a preorder walk, so identical
/// trees give byte-identical output. For eml nodes the left child is the
/// exp argument and the right child the ln argument (edge labels say so).
std::string to_dot(const Expr& e, const std::string& graph_name = "expr");

/// Shortest round-trip rendering, e.g. "2.718281828459045+0i".
std::string format_complex(Complex z);

}  // namespace eml
