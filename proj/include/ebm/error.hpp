// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ebm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a brute-force computation would visit more states than allowed.
class EnumerationRefused : public Error {
 public:
  EnumerationRefused(std::uint64_t count, std::uint64_t cap)
      : Error("enumeration refused: " + std::to_string(count) +
              " states exceeds cap " + std::to_string(cap)),
        count_(count),
        cap_(cap) {}
  std::uint64_t count() const { return count_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A proposal assigned zero density to a state it must be able to reach.
class InvalidProposal : public Error {
 public:
  using Error::Error;
};

// Noise density vanishes where the data has mass.
class ConsistencyViolation : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebm
