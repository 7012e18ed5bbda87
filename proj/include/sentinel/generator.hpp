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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sentinel/program.hpp"
#include "sentinel/simulator.hpp"

namespace sentinel {

struct GeneratorParams {
  std::size_t functions = 20;
  std::size_t signatures = 5;
  std::size_t handlers = 2;
  std::size_t max_body = 6;
  /// Probability that a generated call instruction is indirect.
  double indirect_ratio = 0.35;
  /// Upper bound on activations reachable from any single function, which
  /// bounds the size of one SMI.
  std::size_t max_activations = 128;
};

/// Random, valid, terminating program: function i only calls functions
/// with a larger index, and every pointer slot initially targets a function
/// of the type its call site expects.
FirmwareProgram generate_program(std::mt19937_64& rng, const GeneratorParams& params);

/// A random attack on `handler` that fires when the handler runs: the
/// corrupted return address or call site is reachable from the handler.
/// Function-pointer overwrites pick a target of a different type, or an
/// address outside the code region when no such function is callable.
AttackSpec generate_attack(std::mt19937_64& rng, const FirmwareProgram& program,
                           const std::string& handler);

/// Signatures for `count` distinct random function types.
std::vector<TypeSignature> generate_signatures(std::mt19937_64& rng, std::size_t count);

}  // namespace sentinel
