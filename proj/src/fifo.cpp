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
#include "sentinel/fifo.hpp"

#include <stdexcept>

namespace sentinel {

const char* to_string(PushResult r) {
  switch (r) {
    case PushResult::Accepted:
      return "accepted";
    case PushResult::Filtered:
      return "filtered";
    case PushResult::Overflow:
      return "overflow";
  }
  return "?";
}

std::pair<FifoProducer, FifoConsumer> make_restricted_fifo(std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("fifo capacity must be positive");
  auto state = std::make_shared<detail::FifoState>(capacity);
  return {FifoProducer(state), FifoConsumer(state)};
}

FifoProducer::~FifoProducer() {
  if (state_) close();
}

PushResult FifoProducer::push(const Packet& p, bool smm_active) {
  auto& s = *state_;
  if (!smm_active) {
    s.dropped_non_smm.fetch_add(1, std::memory_order_relaxed);
    return PushResult::Filtered;
  }
  const auto tail = s.tail.load(std::memory_order_relaxed);
  const auto head = s.head.load(std::memory_order_acquire);
  if (tail - head >= s.capacity) {
    s.overflowed.store(true, std::memory_order_release);
    return PushResult::Overflow;
  }
  s.slots[tail % s.capacity] = p;
  s.tail.store(tail + 1, std::memory_order_release);
  return PushResult::Accepted;
}

void FifoProducer::close() {
  state_->closed.store(true, std::memory_order_release);
}

std::size_t FifoProducer::size() const {
  return static_cast<std::size_t>(state_->tail.load(std::memory_order_relaxed) -
                                  state_->head.load(std::memory_order_acquire));
}

std::optional<Packet> FifoConsumer::pop() {
  auto& s = *state_;
  const auto head = s.head.load(std::memory_order_relaxed);
  const auto tail = s.tail.load(std::memory_order_acquire);
  if (head == tail) return std::nullopt;
  const Packet p = s.slots[head % s.capacity];
  s.head.store(head + 1, std::memory_order_release);
  return p;
}

bool FifoConsumer::take_overflow_notice() {
  if (overflow_reported_ || !state_->overflowed.load(std::memory_order_acquire)) return false;
  overflow_reported_ = true;
  return true;
}

bool FifoConsumer::empty() const {
  return state_->head.load(std::memory_order_relaxed) ==
         state_->tail.load(std::memory_order_acquire);
}

bool FifoConsumer::drained() const {
  // Load `closed` first: a push that precedes close() is visible afterwards.
  const bool closed = state_->closed.load(std::memory_order_acquire);
  return closed && empty();
}

}  // namespace sentinel
