// Copyright 2026 The Mechsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mechsim/oracle.hpp"

namespace mechsim {

// Exit codes shared by every command: success, verification failure,
// configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

std::shared_ptr<Env> env_from_config(const nlohmann::json& cfg);
std::unique_ptr<Mechanism> mechanism_from_config(const nlohmann::json& cfg);

// Commands write their outputs under `out_dir` (atomically) and return an
// exit code. `scenario` is the parsed scenario file.
int cmd_simulate(const nlohmann::json& scenario, std::uint64_t seed,
                 const std::filesystem::path& out_dir);

int cmd_verify(const std::string& suite, const std::optional<nlohmann::json>& scenario,
               std::uint64_t seed, const std::filesystem::path& out_dir);

int cmd_captrade(const std::string& subcommand, const nlohmann::json& scenario,
                 std::uint64_t seed, const std::filesystem::path& out_dir,
                 std::optional<int> episodes_override);

int cmd_oracle_eval(const nlohmann::json& scenario, const std::filesystem::path& out_dir);

int cmd_markov_vcg(const nlohmann::json& scenario, std::uint64_t seed,
                   const std::filesystem::path& out_dir);

}  // namespace mechsim
