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
// sentinel: batch front-end for the SMM behavior monitor.
//
//   sentinel run <scenario> [--lockstep] [--fifo-capacity N] [--packet-delay-ns N]
//                [--budget-us N] [--json] [--out PATH]
//   sentinel analyze <program> [--classes] [--emit-mappings DIR]
//
// Exit status: 0 no detection, 2 at least one detection, 1 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sentinel/pipeline.hpp"
#include "sentinel/report.hpp"
#include "sentinel/scenario.hpp"

namespace {

constexpr int kExitError = 1;

std::uint64_t seed_from_env() {
  const char* raw = std::getenv("SENTINEL_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used, 0);
    if (used == std::string(raw).size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(fmt::format("SENTINEL_SEED '{}' is not an integer", raw));
}

template <typename Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) return fn(std::cout);
  std::ofstream out(path);
  if (!out) {
    std::cerr << "sentinel: cannot write " << path << '\n';
    return kExitError;
  }
  return fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-processor behavior monitor for SMM firmware"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  bool lockstep = false;
  bool json = false;
  std::optional<std::size_t> fifo_capacity;
  std::optional<std::uint64_t> packet_delay_ns;
  std::optional<std::uint64_t> budget_us;

  auto* run = app.add_subcommand("run", "Instrument, simulate and monitor a scenario");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_flag("--lockstep", lockstep, "Single-threaded deterministic mode");
  run->add_option("--fifo-capacity", fifo_capacity, "FIFO capacity in packets")
      ->check(CLI::PositiveNumber);
  run->add_option("--packet-delay-ns", packet_delay_ns, "Per-packet push latency")
      ->check(CLI::PositiveNumber);
  run->add_option("--budget-us", budget_us, "SMI latency budget")->check(CLI::PositiveNumber);
  run->add_flag("--json", json, "Emit the machine-readable report");
  run->add_option("--out", out_path, "Write the report to PATH instead of stdout");

  std::string program_path;
  std::string mappings_dir;
  bool classes = false;
  auto* analyze = app.add_subcommand("analyze", "Compute mappings and equivalence classes");
  analyze->add_option("program", program_path, "Program file")->required();
  analyze->add_flag("--classes", classes, "Print the equivalence-class histogram");
  analyze->add_option("--emit-mappings", mappings_dir, "Write m1.map and m2.map into DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*run) {
      auto scenario = sentinel::load_scenario(scenario_path);
      sentinel::materialize(scenario, seed_from_env());

      sentinel::RunOptions options;
      options.lockstep = lockstep;
      options.fifo_capacity = fifo_capacity;
      options.timing.packet_delay_ns = packet_delay_ns;
      options.timing.budget_us = budget_us;
      const auto report = sentinel::run_scenario(scenario, options);

      const int rc = with_output(out_path, [&](std::ostream& os) {
        if (json) {
          os << sentinel::to_json(report).dump(2) << '\n';
        } else {
          sentinel::write_text_report(os, report);
        }
        return 0;
      });
      return rc != 0 ? rc : report.exit_status();
    }

    const auto program = sentinel::load_program(program_path);
    const auto analysis = sentinel::analyze(program);
    if (!mappings_dir.empty()) {
      const std::filesystem::path dir(mappings_dir);
      std::filesystem::create_directories(dir);
      std::ofstream m1(dir / "m1.map");
      std::ofstream m2(dir / "m2.map");
      sentinel::write_m1(m1, analysis.mappings);
      sentinel::write_m2(m2, analysis.mappings);
      if (!m1 || !m2) {
        std::cerr << "sentinel: cannot write mappings into " << mappings_dir << '\n';
        return kExitError;
      }
    }
    if (classes) {
      sentinel::write_class_histogram(std::cout, analysis.classes);
    } else if (mappings_dir.empty()) {
      sentinel::write_m1(std::cout, analysis.mappings);
      sentinel::write_m2(std::cout, analysis.mappings);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel: " << e.what() << '\n';
    return kExitError;
  }
}
