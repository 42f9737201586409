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

#include "tempeq/dataset_io.h"

#include <sstream>
#include <string>

#include "io_util.h"
#include "json.hpp"
#include "tempeq/config.h"
#include "tempeq/error.h"

namespace tempeq {

using nlohmann::json;

namespace {

json matrix_to_json(const Tensor2& t) {
  return {{"rows", t.rows()},
          {"cols", t.cols()},
          {"f64le_base64", io::base64_encode(io::doubles_to_bytes(t.flat()))}};
}

Tensor2 matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto values = io::bytes_to_doubles(io::base64_decode(j.at("f64le_base64").get<std::string>()));
  if (values.size() != rows * cols) throw SchemaError("matrix payload does not match its shape");
  return Tensor2(rows, cols, std::move(values));
}

json parse_object(const std::string& text, const std::string& where) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SchemaError(where + ": not a JSON object");
  return j;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                  std::string_view echo_json) {
  json patients = json::array();
  for (const auto& p : dataset.patients)
    patients.push_back({{"patient_id", p.patient_id},
                        {"identity", p.identity},
                        {"severity", p.severity},
                        {"rate", p.rate},
                        {"conversion_month", p.conversion_month}});
  json manifest;
  manifest["format"] = kDatasetFormat;
  manifest["config"] = to_json(dataset.config);
  manifest["mixing"] = matrix_to_json(dataset.mixing);
  manifest["lift"] = matrix_to_json(dataset.lift);
  manifest["patients"] = patients;
  manifest["visit_count"] = dataset.visits.size();
  if (!echo_json.empty()) {
    json echo = json::parse(echo_json, nullptr, false);
    if (echo.is_discarded() || !echo.is_object())
      throw ConfigError("dataset echo must be a JSON object");
    manifest["echo"] = echo;
  }

  std::string visits;
  for (const auto& v : dataset.visits) {
    json within = json::object();
    for (const auto& [w, flag] : v.converted_within) within[std::to_string(w)] = flag;
    json row = {{"patient_id", v.patient_id},
                {"t", v.month},
                {"x", v.x},
                {"converted_within", within},
                {"is_converted_already", v.is_converted_already},
                {"severity", v.severity}};
    visits += row.dump();
    visits += '\n';
  }

  const json splits = {{"train", dataset.splits.train},
                       {"val", dataset.splits.val},
                       {"test", dataset.splits.test}};

  io::write_file(dir / "visits.jsonl", visits);
  io::write_file(dir / "splits.json", splits.dump(2) + "\n");
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const json m = parse_object(io::read_file(manifest_path), manifest_path.string());
  if (!m.contains("format") || m.at("format") != kDatasetFormat)
    throw VersionError(manifest_path.string() + ": unsupported dataset format " +
                       (m.contains("format") ? m.at("format").dump() : std::string("<none>")));

  Dataset d;
  std::size_t visit_count = 0;
  try {
    d.config = generator_config_from_json(m.at("config"));
    d.mixing = matrix_from_json(m.at("mixing"));
    d.lift = matrix_from_json(m.at("lift"));
    for (const auto& p : m.at("patients")) {
      PatientTrajectory t;
      t.patient_id = p.at("patient_id").get<std::int64_t>();
      t.identity = p.at("identity").get<std::vector<double>>();
      t.severity = p.at("severity").get<std::vector<double>>();
      t.rate = p.at("rate").get<double>();
      t.conversion_month = p.at("conversion_month").get<int>();
      d.patients.push_back(std::move(t));
    }
    visit_count = m.at("visit_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  }

  const auto visits_path = dir / "visits.jsonl";
  std::istringstream in(io::read_file(visits_path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = visits_path.string() + ":" + std::to_string(lineno);
    const json v = parse_object(line, where);
    try {
      Visit visit;
      visit.patient_id = v.at("patient_id").get<std::int64_t>();
      visit.month = v.at("t").get<int>();
      visit.x = v.at("x").get<std::vector<double>>();
      for (const auto& [w, flag] : v.at("converted_within").items())
        visit.converted_within[std::stoi(w)] = flag.get<bool>();
      visit.is_converted_already = v.at("is_converted_already").get<bool>();
      visit.severity = v.at("severity").get<double>();
      if (visit.x.size() != d.config.obs_dim)
        throw SchemaError(where + ": x has " + std::to_string(visit.x.size()) +
                          " entries, expected " + std::to_string(d.config.obs_dim));
      d.visits.push_back(std::move(visit));
    } catch (const json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  const std::size_t per_patient = static_cast<std::size_t>(d.config.horizon_months) + 1;
  if (d.visits.size() != visit_count || visit_count != d.patients.size() * per_patient)
    throw SchemaError(visits_path.string() + ": expected " + std::to_string(visit_count) +
                      " visits, found " + std::to_string(d.visits.size()) + " (truncated?)");
  for (std::size_t i = 0; i < d.visits.size(); ++i) {
    const auto& v = d.visits[i];
    if (v.patient_id != d.patients[i / per_patient].patient_id ||
        v.month != static_cast<int>(i % per_patient))
      throw SchemaError(visits_path.string() + ": visits are not ordered by patient and month");
  }

  const auto splits_path = dir / "splits.json";
  const json s = parse_object(io::read_file(splits_path), splits_path.string());
  try {
    d.splits.train = s.at("train").get<std::vector<std::int64_t>>();
    d.splits.val = s.at("val").get<std::vector<std::int64_t>>();
    d.splits.test = s.at("test").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw SchemaError(splits_path.string() + ": " + e.what());
  }
  if (d.splits.train.size() + d.splits.val.size() + d.splits.test.size() != d.patients.size())
    throw SchemaError(splits_path.string() + ": splits do not cover every patient");
  return d;
}

}  // namespace tempeq
