// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment specs compiled into the tool, addressable by name.

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace covprice::cli {

std::vector<std::string> bundled_spec_names();
std::optional<std::string> bundled_spec(const std::string& name);

}  // namespace covprice::cli
