#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foctl {

/// Runs one foctl invocation (arguments without the program name) and returns
/// the process exit code: 0 on success, 1 on runtime errors, 2 on usage or
/// configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a hash, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace foctl
