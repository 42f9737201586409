/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Internal helpers shared by the on-disk formats.

#ifndef TEMPEQ_SRC_IO_UTIL_H_
#define TEMPEQ_SRC_IO_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempeq::io {

// Shortest text that parses back to the same double.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Little-endian IEEE-754 bytes.
std::string doubles_to_bytes(std::span<const double> values);
std::vector<double> bytes_to_doubles(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
// Throws SchemaError on malformed input.
std::string base64_decode(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file in the same directory, then renames.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tempeq::io

#endif  // TEMPEQ_SRC_IO_UTIL_H_
