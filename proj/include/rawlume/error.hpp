// Copyright (c) 2026 The rawlume Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace rawlume {

/// Every contract violation in the library is reported with this type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
    std::ostringstream oss;
    (oss << ... << std::forward<Args>(args));
    throw Error(oss.str());
}

template <typename... Args>
void require(bool condition, Args&&... args) {
    if (!condition) {
        fail(std::forward<Args>(args)...);
    }
}

} // namespace detail
} // namespace rawlume
