// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace covprice {

// Bad or inconsistent configuration (dimension mismatch, violated bounds).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter outside the domain of a formula, e.g. beta >= 0 for a price.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed, missing or non-finite data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covprice
