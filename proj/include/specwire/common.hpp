// Copyright 2026 The specwire Authors
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

#ifndef SPECWIRE_COMMON_HPP
#define SPECWIRE_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace specwire {

using Complex = std::complex<double>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a documented precondition (bad level, occupied cavity,
/// population outside the expected subspace, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Composite space would exceed the desk-scale amplitude budget.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Numeric calibration failed to reach its target within the iteration budget,
/// or an adiabaticity check failed.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// The adaptive stepper could not continue (step-size underflow).
class StiffnessError : public Error {
 public:
  double time_us;
  StiffnessError(const std::string& what, double t) : Error(what), time_us(t) {}
};

/// Malformed input file, unknown config key, or version mismatch.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed (e.g. a non-Hermitian assembly).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace specwire

#endif  // SPECWIRE_COMMON_HPP
