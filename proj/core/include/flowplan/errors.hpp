// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace flowplan {

// Base class for all toolchain errors. The CLI maps the concrete type to a
// process exit code (see tools/flowplan.cpp).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: schema violations, unknown keys, bad values. Exit code 2.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A reference to a vertex/edge/device that does not exist. Exit code 2.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

// An instance is too large for an exhaustive routine. Exit code 2.
class SizeError : public Error {
 public:
  using Error::Error;
};

// No assignment satisfies the capacity thresholds. Exit code 3.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Resource budget exceeded (ports, channels, streams). Exit code 3.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A cyclic design cannot absorb the inserted pipeline latency, or the
// simulator reached a state where no event can make progress. Exit code 5.
class DeadlockError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowplan
