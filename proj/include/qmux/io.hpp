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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace qmux::io {

/// Writes through a sibling temp file and renames it over `path`. Throws
/// InputError on failure; the destination is untouched then.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill,
                  bool binary = false);

void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Throws InputError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

std::string hex64(std::uint64_t v);

}  // namespace qmux::io
