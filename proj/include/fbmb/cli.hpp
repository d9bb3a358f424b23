#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbmb::cli {

/// Entry point used by the fbmb binary and by tests. Returns the process
/// exit code: 0 on success, 1 on hard failure, 2 when a requested bound is
/// only available with a VOID admissibility flag.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbmb::cli
