#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdecv/models.hpp"

namespace cvsde {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitPrecondition = 3, kExitNumerical = 4 };

/// Flat "key = value" settings with '#' comments. Keys are the long flag
/// names without the leading dashes ("eps", "trunc-A", ...).
using Settings = std::map<std::string, std::string>;

/// Parses the config file grammar; throws sdecv::ConfigError on malformed lines.
Settings parse_config(std::istream& is);
Settings read_config_file(const std::string& path);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns one of the ExitCode values.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const sdecv::ModelRegistry& registry = sdecv::default_registry());

}  // namespace cvsde
