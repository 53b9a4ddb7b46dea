#pragma once

namespace calu::cli {

/// Entry point of the `calu` tool: factor | sweep | model | simulate |
/// convert. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace calu::cli
