#pragma once

#include <ostream>

namespace emulsion {

// Entry point of the `emulsion` tool; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace emulsion
