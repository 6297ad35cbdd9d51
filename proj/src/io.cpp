#include "eml/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "eml/errors.hpp"

namespace eml {

nlohmann::json to_json(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Terminal: return {{"t", e.symbol()}};
    case NodeKind::Variable: return {{"var", e.symbol()}};
    case NodeKind::Apply: {
      nlohmann::json args = nlohmann::json::array();
      for (const auto& a : e.args()) args.push_back(to_json(a));
      return {{"op", e.symbol()}, {"args", std::move(args)}};
    }
  }
  return nullptr;
}

Expr expr_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("expression JSON must be an object");
  if (j.contains("t")) return Expr::terminal(j.at("t").get<std::string>());
  if (j.contains("var")) return Expr::variable(j.at("var").get<std::string>());
  if (j.contains("op")) {
    std::vector<Expr> args;
    for (const auto& a : j.at("args")) args.push_back(expr_from_json(a));
    return Expr::apply(j.at("op").get<std::string>(), std::move(args));
  }
  throw Error("expression JSON needs one of \"t\", \"var\", \"op\"");
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string to_dot(const Expr& e, const std::string& graph_name) {
  std::ostringstream os;
  os << "digraph " << graph_name << " {\n";
  os << "  ordering=out;\n";
  os << "  node [shape=circle, fontname=\"Helvetica\"];\n";
  int next_id = 0;
  // Preorder numbering with an explicit stack to keep deep trees safe.
  struct Item {
    const Expr* node;
    int parent;
    int slot;
  };
  std::vector<Item> stack{{&e, -1, 0}};
  std::ostringstream edges;
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const int id = next_id++;
    const Expr& n = *it.node;
    const char* shape = n.is_apply() ? "" : ", shape=box";
    os << "  n" << id << " [label=\"" << escape(n.symbol()) << "\"" << shape << "];\n";
    if (it.parent >= 0) {
      edges << "  n" << it.parent << " -> n" << id;
      if (it.slot >= 0) edges << " [label=\"" << (it.slot == 0 ? "exp" : "ln") << "\"]";
      edges << ";\n";
    }
    const bool is_eml = n.is_apply() && n.symbol() == "eml";
    for (std::size_t i = n.args().size(); i-- > 0;) {
      stack.push_back({&n.arg(i), id, is_eml ? static_cast<int>(i) : -1});
    }
  }
  os << edges.str();
  os << "}\n";
  return os.str();
}

namespace {

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_complex(Complex z) {
  std::string im = shortest(z.imag() == 0.0 ? 0.0 : z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return shortest(z.real()) + im + "i";
}

}  // namespace eml
