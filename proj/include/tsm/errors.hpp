// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_ERRORS_HPP_
#define TSM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tsm {

// Malformed or inconsistent input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The mechanism cannot run on this market.
class IncompatibleMechanism : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

// An exact computation would exceed its configured size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsm

#endif  // TSM_ERRORS_HPP_
