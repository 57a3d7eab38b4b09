#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lqca::cli {

/// Runs one command line (args exclude the program name) and returns the
/// process exit code: 0 ok, 2 config, 3 transport, 4 integrity, 1 otherwise.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace lqca::cli
