/*
 * SPDX-License-Identifier: Apache-2.0
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
#pragma once

#include "heterotest/csxms.hpp"
#include "heterotest/psystem.hpp"
#include "heterotest/sxm.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace heterotest {

/// Reads and parses a JSON file; Io / Parse errors.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Model files. Unknown keys are rejected with a Parse error naming the path.
Sxm parse_sxm(const nlohmann::json& j);
nlohmann::json sxm_to_json(const Sxm& model);

Csxm parse_csxm(const nlohmann::json& j);
nlohmann::json csxm_to_json(const Csxm& c);

CsxmSystem parse_system(const nlohmann::json& j);
nlohmann::json system_to_json(const CsxmSystem& sys);

PSystem parse_psystem(const nlohmann::json& j);
nlohmann::json psystem_to_json(const PSystem& ps);

enum class ModelKind { Sxm, System, PSystem, Heterotic };

ModelKind detect_model_kind(const nlohmann::json& j);

}  // namespace heterotest
