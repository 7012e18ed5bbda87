/*
 * This file is part of sentinel.
 *
 * Copyright 2026 The sentinel authors
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

// Text formats for programs and scenarios. See docs/scenario-format.md.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sentinel/generator.hpp"
#include "sentinel/program.hpp"
#include "sentinel/simulator.hpp"

namespace sentinel {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct EpisodeStep {
  std::string handler;
  std::optional<AttackSpec> attack;
};

/// `packets` forged packets pushed while the CPU is outside SMM.
struct ForgeStep {
  std::size_t packets = 0;
};

using ScenarioStep = std::variant<EpisodeStep, ForgeStep>;

/// `generate` directive: program and episodes drawn from the seed.
struct GenerateRequest {
  GeneratorParams params;
  std::size_t episodes = 4;
  double attack_rate = 0.5;
};

struct TimingOverrides {
  std::optional<std::uint64_t> packet_delay_ns;
  std::optional<std::uint64_t> budget_us;
  std::optional<std::uint64_t> monitor_per_message_ns;
};

struct Scenario {
  std::string name;
  FirmwareProgram program;
  std::vector<ScenarioStep> steps;
  std::optional<std::size_t> fifo_capacity;
  TimingOverrides timing;
  std::optional<GenerateRequest> generate;
};

FirmwareProgram parse_program(std::istream& is, const std::string& source = "<program>");
FirmwareProgram load_program(const std::filesystem::path& path);

/// `base_dir` resolves relative `include` paths.
Scenario parse_scenario(std::istream& is, const std::filesystem::path& base_dir,
                        const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Replaces a `generate` request by a concrete program and episode list.
/// The result is a pure function of (request, seed).
void materialize(Scenario& scenario, std::uint64_t seed);

void write_program(std::ostream& os, const FirmwareProgram& program);

}  // namespace sentinel
