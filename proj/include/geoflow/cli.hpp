#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoflow {

/// Runs the command line front end; returns the process exit status.
int run_cli(int argc, char** argv);
/// Same with explicit arguments (argv[0] excluded) and streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoflow
