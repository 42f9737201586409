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

// On-disk cohort: manifest.json (format tag, generator config, base64
// matrices, per-patient trajectories), visits.jsonl and splits.json.

#ifndef TEMPEQ_DATASET_IO_H_
#define TEMPEQ_DATASET_IO_H_

#include <filesystem>
#include <string_view>

#include "tempeq/synthdata.h"

namespace tempeq {

inline constexpr std::string_view kDatasetFormat = "tempeq-dataset/1";

// A non-empty `echo_json` (JSON object) is stored under the manifest key
// "echo".
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                  std::string_view echo_json = {});

// Throws IoError for missing files, VersionError for an unknown format tag
// and SchemaError for malformed or truncated content.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace tempeq

#endif  // TEMPEQ_DATASET_IO_H_
