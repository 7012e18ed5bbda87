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
#include "sentinel/scenario.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <random>
#include <sstream>

namespace sentinel {
namespace {

class LineParser {
 public:
  LineParser(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  bool next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      words_.clear();
      for (std::string w; ss >> w;) words_.push_back(std::move(w));
      if (!words_.empty()) return true;
    }
    return false;
  }

  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(std::size_t i) const {
    if (i >= words_.size()) fail(fmt::format("'{}' expects more arguments", words_[0]));
    return words_[i];
  }
  void arity(std::size_t lo, std::size_t hi) const {
    if (words_.size() < lo + 1 || words_.size() > hi + 1) {
      fail(lo == hi ? fmt::format("'{}' takes {} argument(s)", words_[0], lo)
                    : fmt::format("'{}' takes {} to {} arguments", words_[0], lo, hi));
    }
  }

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(source_, lineno_, why); }

  std::uint64_t number(std::size_t i) const {
    std::string_view s = word(i);
    int base = 10;
    if (s.starts_with("0x") || s.starts_with("0X")) {
      s.remove_prefix(2);
      base = 16;
    }
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      fail("bad number '" + word(i) + "'");
    }
    return v;
  }

  double real(std::size_t i) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(word(i), &used);
      if (used == word(i).size()) return v;
    } catch (const std::exception&) {
    }
    fail("bad number '" + word(i) + "'");
  }

  TypeSignature signature(std::size_t i) const {
    try {
      return TypeSignature::parse(word(i));
    } catch (const SignatureError& e) {
      fail(e.what());
    }
  }

  CodeRef code_ref(std::size_t i) const {
    const auto& w = word(i);
    if (w.starts_with("0x") || w.starts_with("0X")) return number(i);
    return w;
  }

  SiteName site(std::size_t i) const {
    const auto& w = word(i);
    const auto hash = w.find('@');
    if (hash == std::string::npos || hash == 0) fail("call site must be written <function>@<n>");
    std::size_t ordinal = 0;
    const auto tail = std::string_view(w).substr(hash + 1);
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), ordinal);
    if (tail.empty() || ec != std::errc{} || ptr != tail.data() + tail.size()) {
      fail("bad call-site ordinal in '" + w + "'");
    }
    return {w.substr(0, hash), ordinal};
  }

  std::size_t lineno() const { return lineno_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& is_;
  std::string source_;
  std::size_t lineno_ = 0;
  std::vector<std::string> words_;
};

struct ProgramBuilder {
  FirmwareProgram program;
  FunctionDef* open = nullptr;
  bool have_name = false;

  // Returns false when the line is not a program directive.
  bool consume(LineParser& lp) {
    const auto& kw = lp.words()[0];
    if (open != nullptr) {
      if (kw == "end") {
        lp.arity(0, 0);
        open = nullptr;
      } else if (kw == "call") {
        lp.arity(1, 1);
        open->body.emplace_back(instr::DirectCall{lp.word(1)});
      } else if (kw == "icall") {
        if (lp.words().size() != 3 && lp.words().size() != 5) {
          lp.fail("'icall' takes <signature> <slot> [csid <n>]");
        }
        instr::IndirectCallSite site{lp.signature(1), lp.word(2), {}, {}};
        if (lp.words().size() == 5) {
          if (lp.word(3) != "csid") lp.fail("expected 'csid' after slot name");
          const auto id = lp.number(4);
          if (id == 0 || id > 0xFFFF'FFFFULL) lp.fail("csid must be in 1..2^32-1");
          site.pinned_csid = static_cast<Csid>(id);
        }
        open->body.emplace_back(std::move(site));
      } else if (kw == "write_smbase") {
        lp.arity(1, 1);
        open->body.emplace_back(instr::WriteSmbase{lp.number(1)});
      } else if (kw == "write_cr3") {
        lp.arity(1, 1);
        open->body.emplace_back(instr::WriteCr3{lp.number(1)});
      } else if (kw == "nop") {
        lp.arity(0, 0);
        open->body.emplace_back(instr::Nop{});
      } else {
        lp.fail("unknown instruction '" + kw + "' (missing 'end'?)");
      }
      return true;
    }

    if (kw == "program") {
      lp.arity(1, 1);
      program.name = lp.word(1);
    } else if (kw == "base") {
      lp.arity(1, 1);
      program.base_address = lp.number(1);
    } else if (kw == "smbase") {
      lp.arity(1, 1);
      program.initial_smbase = lp.number(1);
    } else if (kw == "cr3") {
      lp.arity(1, 1);
      program.initial_cr3 = lp.number(1);
    } else if (kw == "function") {
      lp.arity(3, 3);
      program.functions.push_back({lp.word(1), lp.number(2), lp.signature(3), {}});
      open = &program.functions.back();
    } else if (kw == "slot") {
      lp.arity(2, 2);
      if (!program.slots.emplace(lp.word(1), lp.code_ref(2)).second) {
        lp.fail("slot '" + lp.word(1) + "' declared twice");
      }
    } else if (kw == "handler") {
      lp.arity(1, 1);
      program.handlers.push_back(lp.word(1));
    } else {
      return false;
    }
    return true;
  }

  FirmwareProgram finish(const LineParser& lp) {
    if (open != nullptr) lp.fail("function '" + open->name + "' is missing 'end'");
    try {
      validate(program);
    } catch (const ProgramError& e) {
      throw ParseError(lp.source(), 0, e.what());
    }
    return std::move(program);
  }
};

AttackSpec parse_attack(const LineParser& lp, std::size_t at, std::size_t episode) {
  const auto& kind = lp.word(at);
  const auto args = lp.words().size() - at - 1;
  auto want = [&](std::size_t n) {
    if (args != n) lp.fail(fmt::format("attack '{}' takes {} argument(s)", kind, n));
  };
  if (kind == "overwrite_return") {
    want(2);
    return {attack::OverwriteReturnAddress{lp.word(at + 1), lp.number(at + 2)}, episode};
  }
  if (kind == "overwrite_fnptr") {
    want(2);
    return {attack::OverwriteFunctionPointer{lp.site(at + 1), lp.code_ref(at + 2)}, episode};
  }
  if (kind == "overwrite_smbase") {
    want(1);
    return {attack::OverwriteSmbase{lp.number(at + 1)}, episode};
  }
  if (kind == "insecure_icall") {
    want(2);
    return {attack::InsecureIndirectCall{lp.site(at + 1), lp.code_ref(at + 2)}, episode};
  }
  lp.fail("unknown attack '" + kind + "'");
}

void check_attack_locations(const Scenario& s, const std::string& source) {
  const auto& p = s.program;
  auto site_exists = [&](const SiteName& site) {
    const auto* f = p.find(site.function);
    if (f == nullptr) return false;
    std::size_t n = 0;
    for (const auto& ins : f->body) n += std::holds_alternative<instr::IndirectCallSite>(ins);
    return site.ordinal < n;
  };
  auto ref_ok = [&](const CodeRef& r) {
    const auto* name = std::get_if<std::string>(&r);
    return name == nullptr || p.find(*name) != nullptr;
  };
  for (const auto& step : s.steps) {
    const auto* ep = std::get_if<EpisodeStep>(&step);
    if (ep == nullptr) continue;
    if (std::find(p.handlers.begin(), p.handlers.end(), ep->handler) == p.handlers.end()) {
      throw ParseError(source, 0, "episode names unknown handler '" + ep->handler + "'");
    }
    if (!ep->attack) continue;
    const bool ok = std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, attack::OverwriteReturnAddress>) {
            return p.find(k.function) != nullptr;
          } else if constexpr (std::is_same_v<T, attack::OverwriteFunctionPointer>) {
            return site_exists(k.site) && ref_ok(k.new_target);
          } else if constexpr (std::is_same_v<T, attack::InsecureIndirectCall>) {
            return site_exists(k.site) && ref_ok(k.attacker_target);
          } else {
            return true;
          }
        },
        ep->attack->kind);
    if (!ok) throw ParseError(source, 0, "attack '" + describe(*ep->attack) + "' names a missing location");
  }
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? fmt::format("{}: {}", source, what)
                                   : fmt::format("{}:{}: {}", source, line, what)),
      line_(line) {}

FirmwareProgram parse_program(std::istream& is, const std::string& source) {
  LineParser lp(is, source);
  ProgramBuilder builder;
  while (lp.next()) {
    if (!builder.consume(lp)) lp.fail("unknown directive '" + lp.words()[0] + "'");
  }
  return builder.finish(lp);
}

FirmwareProgram load_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_program(in, path.string());
}

Scenario parse_scenario(std::istream& is, const std::filesystem::path& base_dir,
                        const std::string& source) {
  LineParser lp(is, source);
  ProgramBuilder builder;
  Scenario s;
  bool included = false;

  while (lp.next()) {
    if (builder.consume(lp)) continue;
    const auto& kw = lp.words()[0];
    if (kw == "scenario") {
      lp.arity(1, 1);
      s.name = lp.word(1);
    } else if (kw == "include") {
      lp.arity(1, 1);
      if (included || !builder.program.functions.empty()) {
        lp.fail("'include' must be the only program source");
      }
      builder.program = load_program(base_dir / lp.word(1));
      included = true;
    } else if (kw == "episode") {
      if (lp.words().size() < 2) lp.fail("'episode' takes <handler> [attack <kind> ...]");
      EpisodeStep ep{lp.word(1), {}};
      if (lp.words().size() > 2) {
        if (lp.word(2) != "attack") lp.fail("expected 'attack' after handler name");
        ep.attack = parse_attack(lp, 3, s.steps.size());
      }
      s.steps.emplace_back(std::move(ep));
    } else if (kw == "forge") {
      lp.arity(1, 1);
      s.steps.emplace_back(ForgeStep{static_cast<std::size_t>(lp.number(1))});
    } else if (kw == "fifo_capacity") {
      lp.arity(1, 1);
      s.fifo_capacity = lp.number(1);
      if (*s.fifo_capacity == 0) lp.fail("fifo_capacity must be positive");
    } else if (kw == "packet_delay_ns") {
      lp.arity(1, 1);
      s.timing.packet_delay_ns = lp.number(1);
    } else if (kw == "budget_us") {
      lp.arity(1, 1);
      s.timing.budget_us = lp.number(1);
    } else if (kw == "monitor_per_message_ns") {
      lp.arity(1, 1);
      s.timing.monitor_per_message_ns = lp.number(1);
    } else if (kw == "generate") {
      if (lp.words().size() % 2 != 1) lp.fail("'generate' takes <key> <value> pairs");
      GenerateRequest req;
      for (std::size_t i = 1; i < lp.words().size(); i += 2) {
        const auto& key = lp.word(i);
        if (key == "functions") req.params.functions = lp.number(i + 1);
        else if (key == "signatures") req.params.signatures = lp.number(i + 1);
        else if (key == "handlers") req.params.handlers = lp.number(i + 1);
        else if (key == "max_body") req.params.max_body = lp.number(i + 1);
        else if (key == "episodes") req.episodes = lp.number(i + 1);
        else if (key == "attack_rate") req.attack_rate = lp.real(i + 1);
        else if (key == "indirect_ratio") req.params.indirect_ratio = lp.real(i + 1);
        else lp.fail("unknown generate key '" + key + "'");
      }
      if (req.params.functions == 0 || req.params.signatures == 0) {
        lp.fail("generate needs at least one function and one signature");
      }
      s.generate = req;
    } else {
      lp.fail("unknown directive '" + kw + "'");
    }
  }

  if (s.generate) {
    if (included || !builder.program.functions.empty() || !s.steps.empty()) {
      throw ParseError(source, 0, "'generate' cannot be combined with a program or episodes");
    }
    return s;
  }
  s.program = builder.finish(lp);
  if (s.name.empty()) s.name = s.program.name;
  check_attack_locations(s, source);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_scenario(in, path.parent_path(), path.string());
}

void materialize(Scenario& scenario, std::uint64_t seed) {
  if (!scenario.generate) return;
  const auto req = *scenario.generate;
  std::mt19937_64 rng(seed);
  scenario.program = generate_program(rng, req.params);
  if (scenario.name.empty()) scenario.name = fmt::format("generated-{}", seed);
  std::bernoulli_distribution attacked(req.attack_rate);
  for (std::size_t i = 0; i < req.episodes; ++i) {
    const auto& handlers = scenario.program.handlers;
    EpisodeStep ep{handlers[i % handlers.size()], {}};
    if (attacked(rng)) {
      ep.attack = generate_attack(rng, scenario.program, ep.handler);
      ep.attack->trigger_episode = scenario.steps.size();
    }
    scenario.steps.emplace_back(std::move(ep));
  }
  scenario.generate.reset();
}

void write_program(std::ostream& os, const FirmwareProgram& p) {
  if (!p.name.empty()) os << "program " << p.name << '\n';
  os << fmt::format("base {:#x}\nsmbase {:#x}\ncr3 {:#x}\n", p.base_address, p.initial_smbase,
                    p.initial_cr3);
  for (const auto& f : p.functions) {
    os << fmt::format("\nfunction {} {:#010x} {}\n", f.name, f.offset, f.signature.canonical());
    for (const auto& ins : f.body) {
      std::visit(
          [&](const auto& i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, instr::DirectCall>) {
              os << "  call " << i.callee << '\n';
            } else if constexpr (std::is_same_v<T, instr::IndirectCallSite>) {
              os << "  icall " << i.expected.canonical() << ' ' << i.slot;
              if (i.pinned_csid) os << " csid " << *i.pinned_csid;
              os << '\n';
            } else if constexpr (std::is_same_v<T, instr::WriteSmbase>) {
              os << fmt::format("  write_smbase {:#x}\n", i.value);
            } else if constexpr (std::is_same_v<T, instr::WriteCr3>) {
              os << fmt::format("  write_cr3 {:#x}\n", i.value);
            } else if constexpr (std::is_same_v<T, instr::Nop>) {
              os << "  nop\n";
            } else {
              throw ProgramError("cannot serialize an instrumented program");
            }
          },
          ins);
    }
    os << "end\n";
  }
  if (!p.slots.empty()) os << '\n';
  for (const auto& [slot, init] : p.slots) {
    if (const auto* name = std::get_if<std::string>(&init)) {
      os << "slot " << slot << ' ' << *name << '\n';
    } else {
      os << fmt::format("slot {} {:#x}\n", slot, std::get<std::uint64_t>(init));
    }
  }
  os << '\n';
  for (const auto& h : p.handlers) os << "handler " << h << '\n';
}

}  // namespace sentinel
