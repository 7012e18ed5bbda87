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
#include "sentinel/generator.hpp"
#include "sentinel/perf.hpp"
#include "sentinel/simulator.hpp"

using namespace sentinel;
using namespace sentinel::test;

namespace {

std::vector<Packet> stream(std::size_t ss_msgs, std::size_t ic_msgs, std::size_t sc_msgs) {
  std::vector<Packet> out;
  for (std::size_t i = 0; i < ss_msgs; ++i) {
    encode_message_into(i % 2 == 0 ? Message{msg::SsEntry{i}} : Message{msg::SsExit{i}}, out);
  }
  for (std::size_t i = 0; i < ic_msgs; ++i) encode_message_into(msg::IndirectCall{1, i}, out);
  for (std::size_t i = 0; i < sc_msgs; ++i) encode_message_into(msg::RegisterReport{0, 0}, out);
  return out;
}

}  // namespace

TEST_CASE("i82801gx-shaped episode") {
  const TimingModel model;
  const auto a = account(stream(4, 1, 1), model);
  CHECK(a.ss_packets == 8);
  CHECK(a.ic_packets == 2);
  CHECK(a.sc_packets == 4);
  CHECK(a.total_packets == 14);
  CHECK(a.comm_overhead_ns == 1792);
  CHECK(a.within_budget);
}

TEST_CASE("empty handler has the Agesa shape") {
  FirmwareProgram p;
  p.initial_smbase = 0x30000;
  p.functions = {fn("h", 0x10, "void()")};
  p.handlers = {"h"};
  const Simulator sim(instrument(p, assign_csids(p)));
  const auto a = account(sim.run_smi("h", std::nullopt), TimingModel{});
  CHECK(a.ss_packets == 4);
  CHECK(a.ic_packets == 0);
  CHECK(a.sc_packets == 4);
  CHECK(a.total_packets == 8);
}

TEST_CASE("SetVariable-shaped episode stays within budget") {
  const TimingModel model;
  const auto a = account(stream(192, 2, 1), model);
  CHECK(a.total_packets == 392);
  CHECK(a.comm_overhead_ns == 50176);
  CHECK(a.within_budget);
  CHECK(a.message_count == 195);
  CHECK(a.monitor_processing_ns == 195 * 1100);
  CHECK(a.monitor_processing_ns >= 4 * a.comm_overhead_ns);
  CHECK(a.monitor_processing_ns < 1'000'000);
}

TEST_CASE("detection latency") {
  const TimingModel model;
  CHECK(estimate_detection_latency(EpisodeAccounting{}, model) == 0);
  EpisodeAccounting many;
  many.message_count = 196;
  CHECK(estimate_detection_latency(many, model) == 215600);
  CHECK(estimate_detection_latency(many, model) < 1'000'000);
}

TEST_CASE("budget flag") {
  TimingModel tight;
  tight.smi_budget_us = 1;
  CHECK_FALSE(account(stream(8, 0, 1), tight).within_budget);  // 20 packets * 128 ns
  CHECK(account(stream(0, 0, 1), tight).within_budget);        // 4 packets = 512 ns
}

TEST_CASE("boot packets are not counted") {
  auto s = stream(2, 0, 1);
  encode_message_into(msg::BootBase{0}, s);
  CHECK(account(s, TimingModel{}).total_packets == 8);
}

TEST_CASE("misaligned streams are rejected") {
  auto s = stream(2, 0, 0);
  s.pop_back();
  CHECK_THROWS_AS(account(s, TimingModel{}), ProtocolError);
  CHECK_THROWS_AS((TimingModel{0, 1, 1}.validate()), std::invalid_argument);
}

TEST_CASE("property: additivity, linearity and monotonicity") {
  std::mt19937_64 rng(99);
  const TimingModel model;
  TimingModel doubled = model;
  doubled.packet_push_delay_ns *= 2;
  for (int round = 0; round < 200; ++round) {
    const auto ss = rng() % 300, ic = rng() % 10, sc = rng() % 3;
    const auto ss2 = rng() % 300, ic2 = rng() % 10, sc2 = rng() % 3;
    const auto a = account(stream(ss, ic, sc), model);
    const auto b = account(stream(ss2, ic2, sc2), model);

    auto joined = stream(ss, ic, sc);
    const auto tail = stream(ss2, ic2, sc2);
    joined.insert(joined.end(), tail.begin(), tail.end());
    CHECK(combine(a, b, model) == account(joined, model));

    CHECK(account(stream(ss, ic, sc), doubled).comm_overhead_ns == 2 * a.comm_overhead_ns);

    const auto sub = account(stream(ss / 2, ic / 2, sc / 2), model);
    CHECK(sub.comm_overhead_ns <= a.comm_overhead_ns);
  }
}
