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

#include <deque>
#include <random>
#include <thread>
#include <type_traits>

#include "sentinel/fifo.hpp"

using namespace sentinel;

namespace {

Packet pk(std::uint64_t w) { return {w, false}; }

// Exclusivity is structural: each end has only its own operation.
template <typename T>
concept CanPop = requires(T t) { t.pop(); };
template <typename T>
concept CanPush = requires(T t) { t.push(Packet{}, true); };

static_assert(CanPush<FifoProducer> && !CanPop<FifoProducer>);
static_assert(CanPop<FifoConsumer> && !CanPush<FifoConsumer>);
static_assert(!std::is_copy_constructible_v<FifoProducer>);
static_assert(!std::is_copy_constructible_v<FifoConsumer>);

}  // namespace

TEST_CASE("fresh fifo is empty") {
  auto [prod, cons] = make_restricted_fifo(4);
  CHECK_FALSE(cons.pop().has_value());
  CHECK(cons.empty());
  CHECK_FALSE(cons.overflowed());
}

TEST_CASE("pop order equals push order") {
  auto [prod, cons] = make_restricted_fifo(4);
  CHECK(prod.push(pk(1), true) == PushResult::Accepted);
  CHECK(prod.push(pk(2), true) == PushResult::Accepted);
  CHECK(cons.pop() == pk(1));
  CHECK(cons.pop() == pk(2));
  CHECK_FALSE(cons.pop());
}

TEST_CASE("capacity one: no wrap on overflow") {
  auto [prod, cons] = make_restricted_fifo(1);
  CHECK(prod.push(pk(0xA), true) == PushResult::Accepted);
  CHECK(prod.push(pk(0xB), true) == PushResult::Overflow);
  CHECK(prod.overflowed());
  CHECK(cons.pop() == pk(0xA));
  CHECK_FALSE(cons.pop());
  // The flag stays latched even after space frees up.
  CHECK(prod.push(pk(0xC), true) == PushResult::Accepted);
  CHECK(cons.overflowed());
}

TEST_CASE("packets pushed outside SMM are dropped and counted") {
  auto [prod, cons] = make_restricted_fifo(8);
  CHECK(prod.push(pk(0x66), false) == PushResult::Filtered);
  CHECK_FALSE(cons.pop());
  CHECK(cons.dropped_non_smm() == 1);
  CHECK_FALSE(cons.overflowed());
}

TEST_CASE("after overflow at capacity c exactly c packets pop") {
  for (std::size_t c : {1U, 3U, 17U, 64U}) {
    auto [prod, cons] = make_restricted_fifo(c);
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < c * 3; ++i) accepted += prod.push(pk(i), true) == PushResult::Accepted;
    CHECK(accepted == c);
    std::size_t popped = 0;
    while (auto p = cons.pop()) {
      CHECK(p->word == popped);
      ++popped;
    }
    CHECK(popped == c);
  }
}

TEST_CASE("overflow notice is delivered once") {
  auto [prod, cons] = make_restricted_fifo(1);
  CHECK_FALSE(cons.take_overflow_notice());
  prod.push(pk(1), true);
  prod.push(pk(2), true);
  CHECK(cons.take_overflow_notice());
  CHECK_FALSE(cons.take_overflow_notice());
}

TEST_CASE("zero capacity is rejected") {
  CHECK_THROWS_AS(make_restricted_fifo(0), std::invalid_argument);
}

TEST_CASE("property: random interleaving matches a list model") {
  std::mt19937_64 rng(2024);
  for (std::size_t capacity : {1U, 2U, 7U, 64U}) {
    auto [prod, cons] = make_restricted_fifo(capacity);
    std::deque<Packet> model;
    std::uint64_t dropped = 0;
    bool overflowed = false;
    for (int op = 0; op < 10000; ++op) {
      if (rng() % 2 == 0) {
        const Packet p{rng(), rng() % 2 == 0};
        const bool smm = rng() % 4 != 0;
        const auto r = prod.push(p, smm);
        if (!smm) {
          REQUIRE(r == PushResult::Filtered);
          ++dropped;
        } else if (model.size() == capacity) {
          REQUIRE(r == PushResult::Overflow);
          overflowed = true;
        } else {
          REQUIRE(r == PushResult::Accepted);
          model.push_back(p);
        }
      } else {
        const auto got = cons.pop();
        if (model.empty()) {
          REQUIRE_FALSE(got);
        } else {
          REQUIRE(got);
          REQUIRE(*got == model.front());
          model.pop_front();
        }
      }
      REQUIRE(cons.overflowed() == overflowed);
    }
    CHECK(cons.dropped_non_smm() == dropped);
  }
}

TEST_CASE("cross-thread transfer preserves every accepted packet in order") {
  auto [prod, cons] = make_restricted_fifo(64);
  constexpr std::uint64_t kCount = 200000;
  std::thread producer([&prod = prod] {
    for (std::uint64_t i = 0; i < kCount;) {
      if (prod.push({i, false}, true) == PushResult::Accepted) {
        ++i;
      } else {
        std::this_thread::yield();
      }
    }
    prod.close();
  });
  std::uint64_t expected = 0;
  bool ordered = true;
  while (!cons.drained()) {
    if (auto p = cons.pop()) {
      ordered = ordered && p->word == expected;
      ++expected;
    } else {
      std::this_thread::yield();
    }
  }
  producer.join();
  CHECK(ordered);
  CHECK(expected == kCount);
}
