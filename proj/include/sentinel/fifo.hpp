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

// Restricted single-producer/single-consumer packet channel.
//
// The channel is created as a pair of move-only capabilities: the producer
// end can only push, the consumer end can only pop. Pushes made while the
// producer is not in SMM are dropped and counted. A full queue rejects the
// push and latches the overflow flag; queued packets are never overwritten.
//
// The two ends may live on different threads. Each end must be used by one
// thread at a time.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "sentinel/protocol.hpp"

namespace sentinel {

inline constexpr std::size_t kDefaultFifoCapacity = 4096;

enum class PushResult { Accepted, Filtered, Overflow };

const char* to_string(PushResult r);

namespace detail {

struct FifoState {
  explicit FifoState(std::size_t cap) : slots(cap), capacity(cap) {}

  std::vector<Packet> slots;
  const std::size_t capacity;
  // Monotonic counters; size = tail - head.
  alignas(64) std::atomic<std::uint64_t> head{0};
  alignas(64) std::atomic<std::uint64_t> tail{0};
  std::atomic<std::uint64_t> dropped_non_smm{0};
  std::atomic<bool> overflowed{false};
  std::atomic<bool> closed{false};
};

}  // namespace detail

class FifoProducer;
class FifoConsumer;

/// Creates a channel. Throws std::invalid_argument if `capacity` is 0.
std::pair<FifoProducer, FifoConsumer> make_restricted_fifo(
    std::size_t capacity = kDefaultFifoCapacity);

class FifoProducer {
 public:
  FifoProducer(FifoProducer&&) noexcept = default;
  FifoProducer& operator=(FifoProducer&&) noexcept = default;
  FifoProducer(const FifoProducer&) = delete;
  FifoProducer& operator=(const FifoProducer&) = delete;
  ~FifoProducer();

  /// `smm_active` models the SMIACT# line sampled by the FIFO.
  PushResult push(const Packet& p, bool smm_active);

  /// Marks end of production; the consumer sees `drained()` once empty.
  void close();

  std::size_t capacity() const { return state_->capacity; }
  std::uint64_t dropped_non_smm() const { return state_->dropped_non_smm.load(); }
  bool overflowed() const { return state_->overflowed.load(); }
  /// Approximate when called concurrently with pops.
  std::size_t size() const;

 private:
  friend std::pair<FifoProducer, FifoConsumer> make_restricted_fifo(std::size_t);
  explicit FifoProducer(std::shared_ptr<detail::FifoState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::FifoState> state_;
};

class FifoConsumer {
 public:
  FifoConsumer(FifoConsumer&&) noexcept = default;
  FifoConsumer& operator=(FifoConsumer&&) noexcept = default;
  FifoConsumer(const FifoConsumer&) = delete;
  FifoConsumer& operator=(const FifoConsumer&) = delete;

  /// Never blocks; nullopt when empty.
  std::optional<Packet> pop();

  /// Returns true exactly once after the overflow flag was latched.
  bool take_overflow_notice();

  /// Producer closed and every accepted packet popped.
  bool drained() const;

  bool empty() const;
  std::size_t capacity() const { return state_->capacity; }
  std::uint64_t dropped_non_smm() const { return state_->dropped_non_smm.load(); }
  bool overflowed() const { return state_->overflowed.load(); }

 private:
  friend std::pair<FifoProducer, FifoConsumer> make_restricted_fifo(std::size_t);
  explicit FifoConsumer(std::shared_ptr<detail::FifoState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::FifoState> state_;
  bool overflow_reported_ = false;
};

}  // namespace sentinel
