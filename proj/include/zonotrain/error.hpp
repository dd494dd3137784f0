/*
 * Copyright 2026 The zonotrain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ZONOTRAIN_ERROR_HPP
#define ZONOTRAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace zonotrain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions or generator counts do not line up.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Malformed model, IDX or config input.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Training produced a non-finite value.
class NumericError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

} // namespace detail
} // namespace zonotrain

#endif
