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
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracle/reference_interpreter.hpp"
#include "sentinel/generator.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/simulator.hpp"

using namespace sentinel;
using namespace sentinel::test;

namespace {

Simulator simulator_for(const FirmwareProgram& p) { return Simulator(instrument(p, assign_csids(p))); }

// Counts activations and indirect calls by walking the source program.
struct Counts {
  std::size_t activations = 0;
  std::size_t indirect = 0;
};

void count_from(const FirmwareProgram& p, const std::string& name, Counts& c) {
  const auto* f = p.find(name);
  ++c.activations;
  for (const auto& ins : f->body) {
    if (const auto* call = std::get_if<instr::DirectCall>(&ins)) {
      count_from(p, call->callee, c);
    } else if (const auto* s = std::get_if<instr::IndirectCallSite>(&ins)) {
      ++c.indirect;
      const auto target = p.slot_address(s->slot);
      for (const auto& g : p.functions) {
        if (p.base_address + g.offset == target) count_from(p, g.name, c);
      }
    }
  }
}

bool is_balanced(const std::vector<Message>& messages) {
  std::vector<std::uint64_t> stack;
  for (const auto& m : messages) {
    if (const auto* e = std::get_if<msg::SsEntry>(&m)) stack.push_back(e->return_address);
    if (const auto* x = std::get_if<msg::SsExit>(&m)) {
      if (stack.empty() || stack.back() != x->return_address) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("boot pushes base and registers") {
  auto p = chain_program();
  p.base_address = 0;
  const auto sim = simulator_for(p);
  auto [prod, cons] = make_restricted_fifo();
  const auto boot = sim.run_boot(prod);
  REQUIRE(boot.size() == 2);
  CHECK(boot[0] == Message{msg::BootBase{0}});
  CHECK(boot[1] == Message{msg::BootRegisters{0x30000, 0x5000}});
  CHECK(prod.size() == 4);
}

TEST_CASE("nested calls send a balanced trace followed by one register report") {
  const auto sim = simulator_for(chain_program());
  const auto ep = sim.run_smi("H", std::nullopt);
  const std::vector<Message> expected = {
      msg::SsEntry{0x10008},  msg::SsEntry{0x10108}, msg::SsEntry{0x10208},
      msg::SsExit{0x10208},   msg::SsExit{0x10108},  msg::SsExit{0x10008},
      msg::RegisterReport{0x30000, 0x5000},
  };
  CHECK(ep.messages == expected);
  CHECK(ep.packets.size() == 4 * 3 + 4);
}

TEST_CASE("one indirect call at depth one gives 8 + 2 + 4 packets") {
  const auto sim = simulator_for(one_icall_program());
  const auto ep = sim.run_smi("H", std::nullopt);
  CHECK(ep.activations == 2);
  CHECK(ep.indirect_calls == 1);
  CHECK(ep.packets.size() == 14);
  CHECK(ep.messages[1] == Message{msg::IndirectCall{1, 0x200}});
}

TEST_CASE("property: packets = 4F + 2I + 4 on generated programs") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 40; ++round) {
    const auto p = generate_program(rng, {});
    const auto sim = simulator_for(p);
    for (const auto& h : p.handlers) {
      Counts c;
      count_from(p, h, c);
      const auto ep = sim.run_smi(h, std::nullopt);
      CHECK(ep.activations == c.activations);
      CHECK(ep.indirect_calls == c.indirect);
      CHECK(ep.packets.size() == 4 * c.activations + 2 * c.indirect + 4);
      CHECK(is_balanced(ep.messages));
      CHECK(std::holds_alternative<msg::RegisterReport>(ep.messages.back()));
    }
  }
}

TEST_CASE("attacks corrupt the matching message") {
  const auto p = one_icall_program();
  const auto sim = simulator_for(p);

  SUBCASE("SMBASE overwrite shows up in the final report") {
    const auto ep = sim.run_smi("H", AttackSpec{attack::OverwriteSmbase{0x30000 + 0x1000}});
    CHECK(std::get<msg::RegisterReport>(ep.messages.back()).smbase == 0x31000);
    CHECK(ep.attack_fired);
  }
  SUBCASE("insecure call carries the attacker address") {
    const auto ep = sim.run_smi(
        "H", AttackSpec{attack::InsecureIndirectCall{{"H", 0}, std::uint64_t{0xdead0000}}});
    CHECK(ep.messages[1] == Message{msg::IndirectCall{1, 0xdead0000}});
    // The attacker's code is not instrumented: only H's entry and exit.
    CHECK(ep.activations == 1);
  }
  SUBCASE("function pointer overwrite redirects the call") {
    const auto ep = sim.run_smi(
        "H", AttackSpec{attack::OverwriteFunctionPointer{{"H", 0}, std::string("other")}});
    CHECK(ep.messages[1] == Message{msg::IndirectCall{1, 0x300}});
    CHECK(ep.activations == 2);
  }
  SUBCASE("return address overwrite hits the first return of the function") {
    const auto ep =
        sim.run_smi("H", AttackSpec{attack::OverwriteReturnAddress{"target", 0x41414141}});
    CHECK(ep.messages[3] == Message{msg::SsExit{0x41414141}});
    CHECK(ep.attack_fired);
  }
}

TEST_CASE("attacks do not leak into later episodes") {
  const auto p = one_icall_program();
  const auto sim = simulator_for(p);
  const auto clean = sim.run_smi("H", std::nullopt);
  for (const auto& a :
       {AttackSpec{attack::OverwriteSmbase{1}},
        AttackSpec{attack::OverwriteFunctionPointer{{"H", 0}, std::string("other")}},
        AttackSpec{attack::InsecureIndirectCall{{"H", 0}, std::uint64_t{0x1}}},
        AttackSpec{attack::OverwriteReturnAddress{"H", 0x5}}}) {
    sim.run_smi("H", a);
    CHECK(sim.run_smi("H", std::nullopt).messages == clean.messages);
  }
}

TEST_CASE("simulation is deterministic") {
  std::mt19937_64 rng(12);
  const auto p = generate_program(rng, {});
  const auto a = generate_attack(rng, p, p.handlers[0]);
  const auto sim = simulator_for(p);
  CHECK(sim.run_smi(p.handlers[0], a).packets == sim.run_smi(p.handlers[0], a).packets);
}

TEST_CASE("simulation errors") {
  const auto sim = simulator_for(one_icall_program());
  CHECK_THROWS_AS(sim.run_smi("target", std::nullopt), SimulationError);
  CHECK_THROWS_AS(sim.run_smi("nope", std::nullopt), SimulationError);
  CHECK_THROWS_AS(
      sim.run_smi("H", AttackSpec{attack::InsecureIndirectCall{{"H", 3}, std::uint64_t{1}}}),
      SimulationError);

  FirmwareProgram rec;
  rec.functions = {fn("r", 0x10, "void()", {call("r")})};
  rec.handlers = {"r"};
  const Simulator deep(instrument(rec, assign_csids(rec)), SimulatorConfig{64});
  CHECK_THROWS_AS(deep.run_smi("r", std::nullopt), SimulationError);
}

TEST_CASE("forged messages outside SMM never reach the monitor") {
  auto [prod, cons] = make_restricted_fifo();
  CHECK(push_outside_smm(prod, msg::SsEntry{0x1}) == PushResult::Filtered);
  CHECK(push_outside_smm(prod, msg::RegisterReport{0, 0}) == PushResult::Filtered);
  CHECK(cons.empty());
  CHECK(cons.dropped_non_smm() == 6);
}

TEST_CASE("1000 forged packets then a benign SMI: no events") {
  const auto p = one_icall_program();
  const auto sim = simulator_for(p);
  auto [prod, cons] = make_restricted_fifo();
  Monitor mon(build_mappings(p, assign_csids(p)));
  sim.run_boot(prod);
  for (int i = 0; i < 500; ++i) push_outside_smm(prod, msg::SsExit{std::uint64_t(i)});
  sim.run_smi("H", std::nullopt, prod);
  CHECK(mon.run(cons).empty());
  CHECK(cons.dropped_non_smm() == 1000);
}
