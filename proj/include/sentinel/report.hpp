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

#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sentinel/monitor.hpp"
#include "sentinel/pipeline.hpp"

namespace sentinel {

/// One line per event, e.g.
/// `event 17 episode=2 TypeMismatch csid=1561 target=0x0befca04 expected=i8(i32) observed=i32()`
std::string format_event(const DetectionEvent& e, const std::optional<std::size_t>& episode);

/// Detection lines followed by the per-episode packet table.
void write_text_report(std::ostream& os, const RunReport& report);

/// Machine-readable record; see docs/report-schema.md.
nlohmann::json to_json(const DetectionEvent& e);
nlohmann::json to_json(const EpisodeAccounting& a);
nlohmann::json to_json(const RunReport& report);

/// `size count` lines in increasing size order.
void write_class_histogram(std::ostream& os, const std::map<std::size_t, std::size_t>& classes);

}  // namespace sentinel
