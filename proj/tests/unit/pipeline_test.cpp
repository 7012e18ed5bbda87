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

#include <set>

#include "sentinel/pipeline.hpp"
#include "sentinel/report.hpp"

using namespace sentinel;

namespace {

const std::filesystem::path kFixtures = SENTINEL_FIXTURES;

std::multiset<EventKind> kinds(const RunReport& r) {
  std::multiset<EventKind> out;
  for (const auto& e : r.events) out.insert(e.kind);
  return out;
}

}  // namespace

TEST_CASE("benign scenario, lockstep and threaded") {
  const auto s = load_scenario(kFixtures / "benign.scn");
  for (bool lockstep : {true, false}) {
    const auto r = run_scenario(s, {.lockstep = lockstep});
    CHECK(r.events.empty());
    CHECK(r.exit_status() == 0);
    REQUIRE(r.episodes.size() == 2);
    CHECK(r.episodes[1].accounting.total_packets == 8);
  }
}

TEST_CASE("four attack episodes, one event each") {
  const auto s = load_scenario(kFixtures / "attacks.scn");
  for (bool lockstep : {true, false}) {
    const auto r = run_scenario(s, {.lockstep = lockstep});
    REQUIRE(r.events.size() == 4);
    CHECK(r.exit_status() == 2);
    CHECK(r.events[0].kind == EventKind::ReturnAddrMismatch);
    CHECK(r.events[1].kind == EventKind::TypeMismatch);
    CHECK(r.events[2].kind == EventKind::SmbaseChanged);
    CHECK(r.events[3].kind == EventKind::UnknownTarget);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.event_episode[i] == i);
  }
}

TEST_CASE("forged packets are dropped") {
  const auto r = run_scenario(load_scenario(kFixtures / "forged.scn"), {.lockstep = true});
  CHECK(r.events.empty());
  CHECK(r.dropped_non_smm == 1000);
}

TEST_CASE("a tiny fifo overflows and the monitor reports it") {
  RunOptions opt{.lockstep = true, .fifo_capacity = 6};
  const auto r = run_scenario(load_scenario(kFixtures / "benign.scn"), opt);
  CHECK(r.fifo_overflowed);
  CHECK(kinds(r).count(EventKind::FifoOverflow) == 1);
  CHECK(r.exit_status() == 2);
}

TEST_CASE("option overrides win over scenario settings") {
  auto s = load_scenario(kFixtures / "benign.scn");
  s.timing.packet_delay_ns = 100;
  RunOptions opt;
  opt.timing.packet_delay_ns = 300;
  const auto r = run_scenario(s, opt);
  CHECK(r.model.packet_push_delay_ns == 300);
  CHECK(r.totals.comm_overhead_ns == r.totals.total_packets * 300);
}

TEST_CASE("JSON report is deterministic in lockstep mode") {
  const auto s = load_scenario(kFixtures / "attacks.scn");
  const auto a = to_json(run_scenario(s, {.lockstep = true})).dump();
  const auto b = to_json(run_scenario(s, {.lockstep = true})).dump();
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j["exit_status"] == 2);
  CHECK(j["events"][1]["kind"] == "TypeMismatch");
  CHECK(j["events"][1]["expected_type"] == "i32(i8)");
  CHECK(j["events"][1]["observed_type"] == "i32()");
}

TEST_CASE("text report lists events and the packet table") {
  const auto r = run_scenario(load_scenario(kFixtures / "attacks.scn"), {.lockstep = true});
  std::ostringstream os;
  write_text_report(os, r);
  const auto text = os.str();
  CHECK(text.find("detections 4") != std::string::npos);
  CHECK(text.find("SmbaseChanged observed=0x31000 expected=0x30000") != std::string::npos);
  CHECK(text.find("total") != std::string::npos);
}

TEST_CASE("analysis of the mapping fixture") {
  const auto a = analyze(load_program(kFixtures / "icall_mapping.prog"));
  std::ostringstream m1;
  write_m1(m1, a.mappings);
  CHECK(m1.str() == "csid 1 i32()\ncsid 1561 i8(i32)\ncsid 4852 i32(i8)\n");
  CHECK(a.classes == std::map<std::size_t, std::size_t>{{1, 3}, {2, 1}});
}
