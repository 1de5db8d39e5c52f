#pragma once

namespace circtz::cli {

/// Entry point behind the `circtz` binary. Returns 0 on success, 1 on data errors, 2 on usage errors.
int run(int argc, const char* const* argv);

}  // namespace circtz::cli
