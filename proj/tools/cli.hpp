#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace schottky::cli {

// Exit codes: 0 verified, 1 verification failure, 2 budget or precision
// failure, 3 malformed input or unknown subcommand.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace schottky::cli
