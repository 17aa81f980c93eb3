#pragma once

namespace svarkit::cli {

/// Entry point of the command-line tool. Returns 0 on success, 1 on a
/// computation error, 2 on a usage error.
int run(int argc, const char* const* argv);

}  // namespace svarkit::cli
