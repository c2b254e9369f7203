/*
   Copyright 2026 The bhreduce Authors

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

#include <stdexcept>
#include <string>

namespace bhr {

/// Invalid offspring/lifetime specification or violated model hypothesis.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation requested on a model it does not support (e.g. exact recursion
/// with a continuous lifetime law).
class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented range of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A request exceeded a truncation order or state-space guard.
class TruncationError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Statistical comparison attempted on an empty sample.
class EmptySample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bhr
