#include "qclab/io.hpp"

#include <fstream>
#include <sstream>

namespace qclab {

namespace {

template <class T>
T require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field \"") + key + "\": " + e.what());
  }
}

void check_width(int bits) {
  if (bits < 0 || bits > kMaxBits) throw ParseError("width " + std::to_string(bits) + " out of range");
}

}  // namespace

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_rational(j.dump());
  throw ParseError("expected a rational, got " + j.dump());
}

std::vector<int> parse_bitstring(std::string_view text) {
  std::vector<int> out;
  for (char c : text) {
    if (c != '0' && c != '1') throw ParseError("bit string may hold only 0 and 1: \"" + std::string(text) + "\"");
    out.push_back(c - '0');
  }
  return out;
}

Input parse_input(std::string_view text, int bits) {
  if (static_cast<int>(text.size()) != bits) {
    throw ParseError("input \"" + std::string(text) + "\" should have " + std::to_string(bits) + " bits");
  }
  Input x = 0;
  for (int b : parse_bitstring(text)) x = (x << 1) | static_cast<Input>(b);
  return x;
}

std::string input_string(Input x, int bits) {
  std::string s(static_cast<std::size_t>(bits), '0');
  for (int j = 0; j < bits; ++j) s[static_cast<std::size_t>(j)] = static_cast<char>('0' + bit_of(x, j, bits));
  return s;
}

PartialFn function_from_json(const Json& j) {
  const int m = require<int>(j, "m");
  check_width(m);
  const Json& v = j.contains("values") ? j.at("values") : Json();
  if (v.is_string()) return PartialFn::from_string(m, v.get<std::string>());
  if (!v.is_array()) throw ParseError("function \"values\" must be a string or an array");
  std::string table;
  for (const auto& e : v) {
    if (e.is_null()) {
      table.push_back('*');
    } else if (e.is_number_integer() && (e.get<int>() == 0 || e.get<int>() == 1)) {
      table.push_back(static_cast<char>('0' + e.get<int>()));
    } else if (e.is_string() && e.get<std::string>().size() == 1) {
      table += e.get<std::string>();
    } else {
      throw ParseError("function value must be 0, 1 or null: " + e.dump());
    }
  }
  return PartialFn::from_string(m, table);
}

Json to_json(const PartialFn& g) { return Json{{"m", g.bits()}, {"values", g.to_string()}}; }

InputDistribution<Rational> distribution_from_json(const Json& j) {
  const int bits = require<int>(j, "bits");
  check_width(bits);
  if (j.contains("point")) {
    return InputDistribution<Rational>::point(bits, parse_input(require<std::string>(j, "point"), bits));
  }
  if (j.contains("uniform_on")) {
    std::vector<Input> support;
    for (const auto& s : require<std::vector<std::string>>(j, "uniform_on")) support.push_back(parse_input(s, bits));
    return InputDistribution<Rational>::uniform_on(bits, support);
  }
  if (j.contains("uniform") && require<bool>(j, "uniform")) return InputDistribution<Rational>::uniform(bits);
  if (!j.contains("mass") || !j.at("mass").is_array()) throw ParseError("distribution needs \"mass\", \"point\", \"uniform_on\" or \"uniform\"");
  const Json& mass = j.at("mass");
  if (mass.size() != (std::size_t{1} << bits)) throw ParseError("distribution \"mass\" has the wrong length");
  Vector<Rational> v(static_cast<Eigen::Index>(mass.size()));
  for (std::size_t i = 0; i < mass.size(); ++i) v[static_cast<Eigen::Index>(i)] = rational_from_json(mass[i]);
  try {
    return InputDistribution<Rational>(bits, std::move(v));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

template <class Scalar>
Json to_json(const InputDistribution<Scalar>& mu) {
  Json mass = Json::array();
  for (Input x = 0; x < mu.size(); ++x) mass.push_back(scalar_json(mu[x]));
  return Json{{"bits", mu.bits()}, {"mass", std::move(mass)}};
}

template Json to_json(const InputDistribution<Rational>&);
template Json to_json(const InputDistribution<double>&);

DecisionTree tree_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("tree node must be an object");
  if (j.contains("leaf")) {
    const Json& l = j.at("leaf");
    if (l.is_null()) return DecisionTree::leaf();
    if (l.is_number_integer()) return DecisionTree::leaf(l.get<int>());
    throw ParseError("leaf label must be an integer or null");
  }
  const int var = require<int>(j, "query");
  if (var < 0 || var >= kMaxBits) throw ParseError("query variable " + std::to_string(var) + " out of range");
  if (!j.contains("c0") || !j.contains("c1")) throw ParseError("query node needs \"c0\" and \"c1\"");
  try {
    return DecisionTree::query(var, tree_from_json(j.at("c0")), tree_from_json(j.at("c1")));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

namespace {

Json tree_node_json(const DecisionTree& t, int v) {
  const auto& n = t.node(v);
  if (n.is_leaf()) return Json{{"leaf", n.label ? Json(*n.label) : Json(nullptr)}};
  return Json{{"query", n.var}, {"c0", tree_node_json(t, n.child[0])}, {"c1", tree_node_json(t, n.child[1])}};
}

}  // namespace

Json to_json(const DecisionTree& tree) { return tree_node_json(tree, DecisionTree::root()); }

Relation relation_from_json(const Json& j) {
  const int n = require<int>(j, "n");
  check_width(n);
  if (j.contains("values")) return Relation::from_function(function_from_json(Json{{"m", n}, {"values", j.at("values")}}));
  const auto outputs = require<std::vector<std::vector<std::string>>>(j, "outputs");
  std::vector<std::set<std::string>> sets;
  for (const auto& o : outputs) sets.emplace_back(o.begin(), o.end());
  try {
    return Relation(n, std::move(sets));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

Json to_json(const Relation& f) {
  Json outputs = Json::array();
  for (Input z = 0; z < f.size(); ++z) outputs.push_back(Json(std::vector<std::string>(f.outputs(z).begin(), f.outputs(z).end())));
  return Json{{"n", f.bits()}, {"outputs", std::move(outputs)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace qclab
