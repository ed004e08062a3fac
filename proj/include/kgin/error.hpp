// Copyright (c) 2026 the kgin authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kgin {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; message carries "path:line:" where applicable.
struct ParseError : Error {
  using Error::Error;
};

// Violated precondition or API misuse (shape mismatch, double backward, ...).
struct ContractError : Error {
  using Error::Error;
};

// Cross-structure inconsistency (item id outside entity range, ...).
struct DataError : Error {
  using Error::Error;
};

// Mathematically degenerate input (zero-norm embedding, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// Unknown id passed to a query-style API.
struct LookupError : Error {
  using Error::Error;
};

// Sampling cannot make progress (user interacted with every item, ...).
struct SamplingError : Error {
  using Error::Error;
};

// Non-finite values encountered where finite math is required.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace kgin
