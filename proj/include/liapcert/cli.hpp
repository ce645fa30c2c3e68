#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liapcert::cli {

/// Runs the command-line front end. Subcommands: roots, scan, certify,
/// simulate, pde, weak. Returns the process exit code:
///   0 success, 1 invalid input/config, 2 certification failure,
///   3 numerical failure.
/// Reports are written to `out` unless --output redirects them to a file;
/// diagnostics go to `err`. Identical arguments produce byte-identical
/// reports.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// Scientific notation with 17 significant digits: parses back bit-exact.
std::string format_float(double x);

} // namespace liapcert::cli
