#pragma once

// Command-line front end. Every report is a sorted-key JSON object holding
// the resolved configuration, the tool version and the command's results.

#include <iosfwd>
#include <string>
#include <vector>

namespace qclab::cli {

inline constexpr int kOk = 0;
inline constexpr int kPrecondition = 2;  // also unknown commands and malformed arguments
inline constexpr int kVerificationFailed = 3;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qclab::cli
