/*
 * Copyright (c) 2026 The cellfree authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cellfree/harness.hpp"

namespace cellfree {

/// Parses a physical quantity such as "200mW", "23 dBm", "20MHz" or "9dB".
/// A bare number is taken in the base unit of the kind (W, Hz, dB).
enum class Quantity { kPower, kFrequency, kDecibel };
double parse_quantity(std::string_view text, Quantity kind, const std::string& field);

/// Reads a YAML experiment description. Keys not listed in README.md are
/// rejected; every error names the offending dotted key path.
ExperimentConfig parse_config_string(const std::string& yaml,
                                     const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::vector<std::string>& overrides = {});

/// Applies "a.b.c=value" overrides on top of an existing config.
ExperimentConfig apply_overrides(const ExperimentConfig& base,
                                 const std::vector<std::string>& overrides);

/// Resolved config as YAML; parse_config_string() of the result reproduces it.
std::string config_to_yaml(const ExperimentConfig& config);

/// Parses a comma-separated receiver list such as "MMSE,LSFD".
std::vector<Receiver> parse_receiver_list(std::string_view list);

}  // namespace cellfree
