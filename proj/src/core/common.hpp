// Copyright 2026 The UNN Authors
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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unn {

enum class ErrorKind {
    Domain,
    Parse,
    Io,
    Version,
    Divergence,
    Internal,
};

/// Every failure raised by the core carries a kind so the C layer can map it
/// onto a status code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::Domain, what);
}

// Warnings go through a process-wide sink (stderr by default).
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

// Worker count used by parallel loops; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, count). Each index is processed exactly once, so
// callers writing to slot i get results independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// 64-bit FNV-1a, used for cache keys.
class Fnv1a {
public:
    void bytes(const void* data, std::size_t size);
    template <class T>
    void value(const T& v) { bytes(&v, sizeof(T)); }
    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 14695981039346656037ull;
};

// Shortest round-trip decimal form of a double.
std::string format_double(double v);
// Parses a full token as a double; returns false on any leftover characters.
bool parse_double(std::string_view token, double& out);

}  // namespace unn
