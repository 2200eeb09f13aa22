// Copyright 2026 The DPPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats. Matrices are CSV, one row per line, values printed with 17
// significant digits so a write/read round trip is exact.

#ifndef DPPF_IO_HPP_
#define DPPF_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dppf/linalg.hpp"
#include "dppf/loss.hpp"
#include "dppf/mechanism.hpp"
#include "dppf/solver.hpp"
#include "dppf/spectrum.hpp"
#include "dppf/structured.hpp"

namespace dppf {

std::string format_double(double v);

std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& text);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// One value per line (a single CSV column) or one comma-separated row.
Vector read_vector_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json vector_to_json(const Vector& v);
nlohmann::json to_json(const LossReport& r);
nlohmann::json to_json(const FixedPointResult& r);
nlohmann::json to_json(const SpectrumReport& r);
nlohmann::json to_json(const PrivacyParams& p, std::uint64_t seed);

// Rows t, release, true_prefix, noise_component with t starting at 1.
std::string mechanism_to_csv(const MechanismRun& run);

// Directory with band.csv, a.csv, b.csv, meta.json and, when the mask is not
// the standard one, mask.csv.
void save_structured(const std::filesystem::path& dir, const StructuredW& sw);
StructuredW load_structured(const std::filesystem::path& dir);

}  // namespace dppf

#endif  // DPPF_IO_HPP_
