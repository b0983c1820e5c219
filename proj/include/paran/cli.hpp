#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace paran::cli {

// Runs one command line (args[0] is the program name). Returns the exit
// status: 0 ok, 1 usage, 2 I/O, 3 provider, 4 validation.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace paran::cli
