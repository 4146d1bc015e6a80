#pragma once

// JSON forms of every input and report type.
//
//   function      {"m": 2, "values": "0111"}        one of 0, 1, * per input
//   distribution  {"bits": 2, "mass": ["1/4", ...]}  or "point": "01",
//                 or "uniform_on": ["00", "11"], or "uniform": true
//   tree          {"query": 0, "c0": T, "c1": T} or {"leaf": 0 | 1 | null}
//   relation      {"n": 2, "outputs": [["0"], ["1", "2"], ...]}
//                 or {"n": 2, "values": "0110"}
//
// Masses are exact rationals written as "a/b" strings; numbers are accepted
// and read through their decimal text.

#include "qclab/boolfn.hpp"
#include "qclab/compose.hpp"
#include "qclab/dtree.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qclab {

using Json = nlohmann::json;

Rational rational_from_json(const Json& j);

inline Json scalar_json(const Rational& q) { return to_string(q); }
inline Json scalar_json(double x) { return x; }

PartialFn function_from_json(const Json& j);
Json to_json(const PartialFn& g);

InputDistribution<Rational> distribution_from_json(const Json& j);
template <class Scalar>
Json to_json(const InputDistribution<Scalar>& mu);

DecisionTree tree_from_json(const Json& j);
Json to_json(const DecisionTree& tree);

Relation relation_from_json(const Json& j);
Json to_json(const Relation& f);

/// "0110" -> {0, 1, 1, 0}.
std::vector<int> parse_bitstring(std::string_view text);
/// Input index of a bit string, first character most significant.
Input parse_input(std::string_view text, int bits);
std::string input_string(Input x, int bits);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Two-space indented dump with sorted keys and a trailing newline.
std::string canonical_dump(const Json& j);

}  // namespace qclab
