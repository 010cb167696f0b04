// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "experiment_spec.hpp"

namespace covprice::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

// Entry point shared by the executable and tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// A bundled spec name or a path to a YAML file.
ExperimentSpec resolve_spec(const std::string& name_or_path);

}  // namespace covprice::cli
