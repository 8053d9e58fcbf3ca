/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bilinsde {

// Base of every error thrown by the library. `error_class()` is a stable,
// machine-readable dotted tag ("model.structure", "integration.blowup", ...)
// that the command-line front-end maps onto exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string error_class, const std::string& what)
      : std::runtime_error(what), error_class_(std::move(error_class)) {}

  const std::string& error_class() const noexcept { return error_class_; }

private:
  std::string error_class_;
};

// Inconsistent dimensions between model pieces.
class StructuralError : public Error {
public:
  explicit StructuralError(const std::string& what) : Error("model.structure", what) {}
};

// Non-finite or otherwise unusable numeric data.
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error("model.data", what) {}
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
  explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

// A polynomial vector field would exceed the configured degree cap.
class CapacityError : public Error {
public:
  explicit CapacityError(const std::string& what) : Error("brackets.capacity", what) {}
};

// The state left the finite region or crossed the blow-up bound.
class IntegrationError : public Error {
public:
  IntegrationError(std::int64_t step, const std::string& what)
      : Error("integration.blowup", what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

private:
  std::int64_t step_;
};

// A linear solve or factorisation failed.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error("numeric.solve", what) {}
};

// The Malliavin matrix is not invertible and no regularisation was requested.
class SingularityError : public Error {
public:
  SingularityError(double lambda_min, double lambda_max, const std::string& what)
      : Error("malliavin.singular", what), lambda_min_(lambda_min), lambda_max_(lambda_max) {}

  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }

private:
  double lambda_min_;
  double lambda_max_;
};

// An observable was asked for a derivative it does not provide.
class ObservableError : public Error {
public:
  explicit ObservableError(const std::string& what) : Error("ergodics.observable", what) {}
};

}  // namespace bilinsde
