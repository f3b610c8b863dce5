// Copyright 2026 The qmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qmux {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: InputError -> 1, DomainInfeasible -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or malformed input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A well-formed request with no solution in the modeled domain.
class DomainInfeasible : public Error {
 public:
  using Error::Error;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ChannelExcluded : public InputError {
 public:
  explicit ChannelExcluded(int label)
      : InputError("channel " + std::to_string(label) + " is not usable"),
        label_(label) {}
  int label() const noexcept { return label_; }

 private:
  int label_;
};

class EmptyGraph : public DomainInfeasible {
 public:
  using DomainInfeasible::DomainInfeasible;
};

class IllConditioned : public InputError {
 public:
  using InputError::InputError;
};

class CapacityError : public InputError {
 public:
  using InputError::InputError;
};

class InsufficientStatistics : public DomainInfeasible {
 public:
  using DomainInfeasible::DomainInfeasible;
};

class PlanInvalid : public DomainInfeasible {
 public:
  using DomainInfeasible::DomainInfeasible;
};

class NoSecurePower : public DomainInfeasible {
 public:
  using DomainInfeasible::DomainInfeasible;
};

/// No fully connected plan was found. `witness` is the largest user count the
/// solver could fully connect on the same graph; `proven` is true when the
/// search was exhaustive.
class Infeasible : public DomainInfeasible {
 public:
  Infeasible(const std::string& what, int witness, bool proven)
      : DomainInfeasible(what), witness_(witness), proven_(proven) {}
  int witness() const noexcept { return witness_; }
  bool proven() const noexcept { return proven_; }

 private:
  int witness_;
  bool proven_;
};

}  // namespace qmux
