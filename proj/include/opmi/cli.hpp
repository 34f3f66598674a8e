#pragma once

// Command-line front end. Each subcommand writes <out_dir>/<subcommand>.csv
// and an SVG rendered from that CSV after reading it back.

#include <iosfwd>
#include <string>
#include <vector>

namespace opmi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Environment variable naming the default output directory ("out" otherwise).
inline constexpr const char* kOutDirEnv = "OPMI_OUT_DIR";

// args excludes the program name. Diagnostics go to `err` as one line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opmi
