// Copyright 2026 The platedpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace lpr {

enum class ErrorKind {
    decode,        // malformed image stream
    format,        // unsupported content (e.g. channel count)
    bounds,        // region outside its host image
    precondition,  // caller violated an operation precondition
    parameter,     // ill-posed numeric parameters (e.g. non-concave deformation)
    lookup,        // missing record in an annotation/detections file
    keying,        // mismatched ids between prediction and ground-truth sets
    io,            // file read/write failure
    font,          // missing glyph or bad font asset
    missing_class, // training data lacks a required class
    divergence,    // training produced a non-finite objective
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace lpr
