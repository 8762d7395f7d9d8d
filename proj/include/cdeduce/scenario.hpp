// cdeduce/scenario.hpp — scenario files: a line-oriented grammar for
// declaring a world and named microcosms, then driving queries, evolution,
// offline saturation, experiments, and expectations against them.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdeduce/bisim.hpp"
#include "cdeduce/evolution.hpp"
#include "cdeduce/microcosm.hpp"
#include "cdeduce/offline.hpp"
#include "cdeduce/online.hpp"
#include "cdeduce/result.hpp"
#include "cdeduce/world.hpp"

namespace cdeduce {

struct Scenario {
  struct WorldDecl {
    bool generated = false;
    std::size_t n = 0;
    double density = 0.0;
    std::uint64_t seed = 0;
    std::vector<EventId> events;
    std::vector<std::pair<EventId, EventId>> hb;
  };

  struct MicrocosmDecl {
    std::string name;
    bool of_world = true;
    std::vector<EventId> internal_chain;
    std::vector<Correspondence> external;
    int line = 0;
  };

  struct Command {
    enum class Kind {
      Query,
      Add,
      Update,
      Remove,
      SaturateOffline,
      Experiment,
      ExpectQuery,
      ExpectOffline,
      ExpectError,
      ExpectOk,
      ExpectAnalogous,
      ExpectNotAnalogous,
      ExpectExperiment,
    };
    Kind kind = Kind::Query;
    int line = 0;
    std::string m1, m2;
    EventId a, b;
    CorrRel rel = CorrRel::HappensBefore;
    Placement placement = Placement::External;
    Verdict expect_verdict = Verdict::NoVerdict;
    OfflineRel offline_rel = OfflineRel::Hb;
    Polarity offline_polarity = Polarity::Asserted;
    std::string error_kind;
    bool expect_pass = true;
    ScriptKind script_kind = ScriptKind::Forward;
    std::size_t steps = 0;
    int trials = 0;
    std::uint64_t seed = 0;
  };

  std::optional<WorldDecl> world;
  std::vector<MicrocosmDecl> microcosms;
  std::vector<Command> commands;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') break;  // comment to end of line
    out.push_back(tok);
  }
  return out;
}

inline std::optional<CorrRel> parse_rel(const std::string& t) {
  if (t == "<") return CorrRel::HappensBefore;
  if (t == "par") return CorrRel::Concurrent;
  if (t == "cr") return CorrRel::CausallyRelated;
  return std::nullopt;
}

inline Error syntax_error(int line, const std::string& msg) {
  return make_error(ErrorKind::Syntax,
                    "line " + std::to_string(line) + ": " + msg);
}

// key=value arguments of generate / experiment lines
inline bool parse_kv(const std::string& tok, const std::string& key,
                     std::string& out) {
  if (tok.rfind(key + "=", 0) != 0) return false;
  out = tok.substr(key.size() + 1);
  return true;
}

}  // namespace detail

/// Parses the scenario grammar. One statement per line; `#` starts a comment.
///
///   world { event <id> | hb <id> <id> | generate n=<int> density=<float> seed=<int> }
///   microcosm <name> of (world|none) {
///     internal <id> < <id> [< <id> ...]
///     external <id> (<|par|cr) <id>
///   }
///   query <m> <a> <b>
///   add <m> (int|ext) <a> (<|par|cr) <b>
///   update <m> <a> < <b>
///   remove <m> <a> (<|par|cr) <b>
///   saturate-offline <m>
///   experiment (forward|backward) <m1> <m2> steps=<k> trials=<t> seed=<s>
///   expect query <m> <a> <b> (<|>|par|cr|?|none)
///   expect offline <m> <a> (<|par|cr|?|not-<|not-par|not-cr|not-?) <b>
///   expect error <ErrorKind>
///   expect ok
///   expect (analogous|not-analogous) <m1> <m2>
///   expect experiment (pass|fail)
inline Result<Scenario> parse_scenario(const std::string& text) {
  using detail::syntax_error;
  Scenario s;
  enum class Block { None, World, Microcosm };
  Block block = Block::None;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;

  auto known_microcosm = [&](const std::string& name) {
    for (const auto& d : s.microcosms)
      if (d.name == name) return true;
    return false;
  };
  auto strip_colon = [](std::string t) {
    if (!t.empty() && t.back() == ':') t.pop_back();
    return t;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    auto tok = detail::tokenize(raw);
    if (tok.empty()) continue;

    if (block == Block::World) {
      if (tok[0] == "}") {
        block = Block::None;
        continue;
      }
      auto& w = *s.world;
      if (tok[0] == "event" && tok.size() == 2) {
        w.events.emplace_back(tok[1]);
      } else if (tok[0] == "hb" && tok.size() == 3) {
        w.hb.emplace_back(EventId{tok[1]}, EventId{tok[2]});
      } else if (tok[0] == "generate") {
        w.generated = true;
        std::string v;
        for (std::size_t i = 1; i < tok.size(); ++i) {
          if (detail::parse_kv(tok[i], "n", v)) w.n = std::stoul(v);
          else if (detail::parse_kv(tok[i], "density", v))
            w.density = std::stod(v);
          else if (detail::parse_kv(tok[i], "seed", v)) w.seed = std::stoull(v);
          else
            return syntax_error(line_no, "unknown generate argument " + tok[i]);
        }
        if (w.n == 0)
          return syntax_error(line_no, "generate needs n=<positive>");
      } else {
        return syntax_error(line_no, "unknown world statement " + tok[0]);
      }
      continue;
    }

    if (block == Block::Microcosm) {
      if (tok[0] == "}") {
        block = Block::None;
        continue;
      }
      auto& d = s.microcosms.back();
      if (tok[0] == "internal") {
        if (!d.internal_chain.empty())
          return syntax_error(line_no, "microcosm already has an internal chain");
        // internal e1 < e2 < e3 ...
        if (tok.size() < 4 || tok.size() % 2 != 0)
          return syntax_error(line_no, "internal needs <id> < <id> [< <id>...]");
        d.internal_chain.emplace_back(tok[1]);
        for (std::size_t i = 2; i < tok.size(); i += 2) {
          if (tok[i] != "<")
            return syntax_error(line_no, "internal chain links must be <");
          d.internal_chain.emplace_back(tok[i + 1]);
        }
      } else if (tok[0] == "external" && tok.size() == 4) {
        auto rel = detail::parse_rel(tok[2]);
        if (!rel) return syntax_error(line_no, "unknown relation " + tok[2]);
        if (tok[1] == tok[3])
          return syntax_error(line_no, "correspondence is irreflexive");
        d.external.push_back(
            Correspondence::make(EventId{tok[1]}, EventId{tok[3]}, *rel));
      } else {
        return syntax_error(line_no, "unknown microcosm statement " + tok[0]);
      }
      continue;
    }

    // Top level.
    if (tok[0] == "world") {
      if (s.world) return syntax_error(line_no, "duplicate world block");
      if (tok.size() != 2 || tok[1] != "{")
        return syntax_error(line_no, "expected: world {");
      s.world = Scenario::WorldDecl{};
      block = Block::World;
    } else if (tok[0] == "microcosm") {
      // microcosm <name> of (world|none) {
      if (tok.size() != 5 || tok[2] != "of" || tok[4] != "{")
        return syntax_error(line_no,
                            "expected: microcosm <name> of (world|none) {");
      if (known_microcosm(tok[1]))
        return syntax_error(line_no, "duplicate microcosm name " + tok[1]);
      Scenario::MicrocosmDecl d;
      d.name = tok[1];
      d.line = line_no;
      if (tok[3] == "world") {
        if (!s.world)
          return syntax_error(line_no, "microcosm of world needs a world block");
        d.of_world = true;
      } else if (tok[3] == "none") {
        d.of_world = false;
      } else {
        return syntax_error(line_no, "expected world or none, got " + tok[3]);
      }
      s.microcosms.push_back(std::move(d));
      block = Block::Microcosm;
    } else if (tok[0] == "query" && tok.size() == 4) {
      if (!known_microcosm(tok[1]))
        return syntax_error(line_no, "undeclared microcosm " + tok[1]);
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::Query;
      c.line = line_no;
      c.m1 = tok[1];
      c.a = EventId{tok[2]};
      c.b = EventId{tok[3]};
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "add" && tok.size() == 6) {
      if (!known_microcosm(tok[1]))
        return syntax_error(line_no, "undeclared microcosm " + tok[1]);
      auto rel = detail::parse_rel(tok[4]);
      if (!rel) return syntax_error(line_no, "unknown relation " + tok[4]);
      if (tok[2] != "int" && tok[2] != "ext")
        return syntax_error(line_no, "placement must be int or ext");
      if (tok[3] == tok[5])
        return syntax_error(line_no, "correspondence is irreflexive");
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::Add;
      c.line = line_no;
      c.m1 = tok[1];
      c.placement =
          tok[2] == "int" ? Placement::Internal : Placement::External;
      c.a = EventId{tok[3]};
      c.b = EventId{tok[5]};
      c.rel = *rel;
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "update" && tok.size() == 5) {
      if (!known_microcosm(tok[1]))
        return syntax_error(line_no, "undeclared microcosm " + tok[1]);
      if (tok[3] != "<")
        return syntax_error(line_no, "update payload must be <");
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::Update;
      c.line = line_no;
      c.m1 = tok[1];
      c.a = EventId{tok[2]};
      c.b = EventId{tok[4]};
      c.rel = CorrRel::HappensBefore;
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "remove" && tok.size() == 5) {
      if (!known_microcosm(tok[1]))
        return syntax_error(line_no, "undeclared microcosm " + tok[1]);
      auto rel = detail::parse_rel(tok[3]);
      if (!rel) return syntax_error(line_no, "unknown relation " + tok[3]);
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::Remove;
      c.line = line_no;
      c.m1 = tok[1];
      c.a = EventId{tok[2]};
      c.b = EventId{tok[4]};
      c.rel = *rel;
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "saturate-offline" && tok.size() == 2) {
      if (!known_microcosm(tok[1]))
        return syntax_error(line_no, "undeclared microcosm " + tok[1]);
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::SaturateOffline;
      c.line = line_no;
      c.m1 = tok[1];
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "experiment" && tok.size() >= 4) {
      Scenario::Command c;
      c.kind = Scenario::Command::Kind::Experiment;
      c.line = line_no;
      if (tok[1] == "forward") c.script_kind = ScriptKind::Forward;
      else if (tok[1] == "backward") c.script_kind = ScriptKind::Backward;
      else
        return syntax_error(line_no, "experiment kind must be forward|backward");
      c.m1 = tok[2];
      c.m2 = tok[3];
      if (!known_microcosm(c.m1))
        return syntax_error(line_no, "undeclared microcosm " + c.m1);
      if (!known_microcosm(c.m2))
        return syntax_error(line_no, "undeclared microcosm " + c.m2);
      std::string v;
      for (std::size_t i = 4; i < tok.size(); ++i) {
        if (detail::parse_kv(tok[i], "steps", v)) c.steps = std::stoul(v);
        else if (detail::parse_kv(tok[i], "trials", v)) c.trials = std::stoi(v);
        else if (detail::parse_kv(tok[i], "seed", v)) c.seed = std::stoull(v);
        else
          return syntax_error(line_no, "unknown experiment argument " + tok[i]);
      }
      if (c.steps == 0 || c.trials <= 0)
        return syntax_error(line_no, "experiment needs steps= and trials=");
      s.commands.push_back(std::move(c));
    } else if (tok[0] == "expect" && tok.size() >= 2) {
      Scenario::Command c;
      c.line = line_no;
      if (tok[1] == "query" && tok.size() == 6) {
        c.kind = Scenario::Command::Kind::ExpectQuery;
        c.m1 = strip_colon(tok[2]);
        if (!known_microcosm(c.m1))
          return syntax_error(line_no, "undeclared microcosm " + c.m1);
        c.a = EventId{tok[3]};
        c.b = EventId{tok[4]};
        const std::string& v = tok[5];
        if (v == "<") c.expect_verdict = Verdict::HappensBefore;
        else if (v == ">") c.expect_verdict = Verdict::HappensBeforeInv;
        else if (v == "par") c.expect_verdict = Verdict::Concurrent;
        else if (v == "cr") c.expect_verdict = Verdict::CausallyRelated;
        else if (v == "?") c.expect_verdict = Verdict::Unknown;
        else if (v == "none") c.expect_verdict = Verdict::NoVerdict;
        else return syntax_error(line_no, "unknown verdict token " + v);
      } else if (tok[1] == "offline" && tok.size() == 6) {
        c.kind = Scenario::Command::Kind::ExpectOffline;
        c.m1 = strip_colon(tok[2]);
        if (!known_microcosm(c.m1))
          return syntax_error(line_no, "undeclared microcosm " + c.m1);
        c.a = EventId{tok[3]};
        c.b = EventId{tok[5]};
        std::string r = tok[4];
        c.offline_polarity = Polarity::Asserted;
        if (r.rfind("not-", 0) == 0) {
          c.offline_polarity = Polarity::Refuted;
          r = r.substr(4);
        }
        if (r == "<") c.offline_rel = OfflineRel::Hb;
        else if (r == "par") c.offline_rel = OfflineRel::Par;
        else if (r == "cr") c.offline_rel = OfflineRel::Cr;
        else if (r == "?") c.offline_rel = OfflineRel::Unknown;
        else return syntax_error(line_no, "unknown offline relation " + tok[4]);
      } else if (tok[1] == "error" && tok.size() == 3) {
        c.kind = Scenario::Command::Kind::ExpectError;
        c.error_kind = tok[2];
      } else if (tok[1] == "ok" && tok.size() == 2) {
        c.kind = Scenario::Command::Kind::ExpectOk;
      } else if ((tok[1] == "analogous" || tok[1] == "not-analogous") &&
                 tok.size() == 4) {
        c.kind = tok[1] == "analogous"
                     ? Scenario::Command::Kind::ExpectAnalogous
                     : Scenario::Command::Kind::ExpectNotAnalogous;
        c.m1 = tok[2];
        c.m2 = tok[3];
        if (!known_microcosm(c.m1))
          return syntax_error(line_no, "undeclared microcosm " + c.m1);
        if (!known_microcosm(c.m2))
          return syntax_error(line_no, "undeclared microcosm " + c.m2);
      } else if (tok[1] == "experiment" && tok.size() == 3) {
        c.kind = Scenario::Command::Kind::ExpectExperiment;
        if (tok[2] == "pass") c.expect_pass = true;
        else if (tok[2] == "fail") c.expect_pass = false;
        else return syntax_error(line_no, "expect experiment pass|fail");
      } else {
        return syntax_error(line_no, "unknown expectation");
      }
      s.commands.push_back(std::move(c));
    } else {
      return syntax_error(line_no, "unknown statement " + tok[0]);
    }
  }
  if (block != Block::None)
    return syntax_error(line_no, "unterminated block at end of input");

  // Declared events of world-backed microcosms must exist in an explicit
  // world; generated worlds are checked at run time.
  if (s.world && !s.world->generated) {
    auto has_event = [&](const EventId& e) {
      for (const auto& we : s.world->events)
        if (we == e) return true;
      return false;
    };
    for (const auto& d : s.microcosms) {
      if (!d.of_world) continue;
      for (const auto& e : d.internal_chain)
        if (!has_event(e))
          return syntax_error(d.line, "microcosm " + d.name +
                                          " references undeclared event " +
                                          e.token);
      for (const auto& c : d.external)
        if (!has_event(c.left) || !has_event(c.right))
          return syntax_error(d.line, "microcosm " + d.name +
                                          " references undeclared event " +
                                          (!has_event(c.left)
                                               ? c.left.token
                                               : c.right.token));
    }
  }
  return s;
}

/// Serializes back into the grammar; parse(serialize(s)) round-trips.
inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  if (s.world) {
    out << "world {\n";
    if (s.world->generated) {
      out << "  generate n=" << s.world->n << " density=" << s.world->density
          << " seed=" << s.world->seed << "\n";
    } else {
      for (const auto& e : s.world->events) out << "  event " << e.token << "\n";
      for (const auto& [a, b] : s.world->hb)
        out << "  hb " << a.token << " " << b.token << "\n";
    }
    out << "}\n";
  }
  for (const auto& d : s.microcosms) {
    out << "microcosm " << d.name << " of " << (d.of_world ? "world" : "none")
        << " {\n";
    if (!d.internal_chain.empty()) {
      out << "  internal " << d.internal_chain[0].token;
      for (std::size_t i = 1; i < d.internal_chain.size(); ++i)
        out << " < " << d.internal_chain[i].token;
      out << "\n";
    }
    for (const auto& c : d.external)
      out << "  external " << c.left.token << " " << rel_token(c.rel) << " "
          << c.right.token << "\n";
    out << "}\n";
  }
  using K = Scenario::Command::Kind;
  for (const auto& c : s.commands) {
    switch (c.kind) {
      case K::Query:
        out << "query " << c.m1 << " " << c.a.token << " " << c.b.token << "\n";
        break;
      case K::Add:
        out << "add " << c.m1 << " " << placement_token(c.placement) << " "
            << c.a.token << " " << rel_token(c.rel) << " " << c.b.token << "\n";
        break;
      case K::Update:
        out << "update " << c.m1 << " " << c.a.token << " < " << c.b.token
            << "\n";
        break;
      case K::Remove:
        out << "remove " << c.m1 << " " << c.a.token << " "
            << rel_token(c.rel) << " " << c.b.token << "\n";
        break;
      case K::SaturateOffline:
        out << "saturate-offline " << c.m1 << "\n";
        break;
      case K::Experiment:
        out << "experiment "
            << (c.script_kind == ScriptKind::Forward ? "forward" : "backward")
            << " " << c.m1 << " " << c.m2 << " steps=" << c.steps
            << " trials=" << c.trials << " seed=" << c.seed << "\n";
        break;
      case K::ExpectQuery: {
        std::string v;
        switch (c.expect_verdict) {
          case Verdict::HappensBefore: v = "<"; break;
          case Verdict::HappensBeforeInv: v = ">"; break;
          case Verdict::Concurrent: v = "par"; break;
          case Verdict::CausallyRelated: v = "cr"; break;
          case Verdict::Unknown: v = "?"; break;
          case Verdict::NoVerdict: v = "none"; break;
        }
        out << "expect query " << c.m1 << " " << c.a.token << " " << c.b.token
            << " " << v << "\n";
        break;
      }
      case K::ExpectOffline:
        out << "expect offline " << c.m1 << " " << c.a.token << " "
            << (c.offline_polarity == Polarity::Refuted ? "not-" : "")
            << offline_rel_token(c.offline_rel) << " " << c.b.token << "\n";
        break;
      case K::ExpectError:
        out << "expect error " << c.error_kind << "\n";
        break;
      case K::ExpectOk:
        out << "expect ok\n";
        break;
      case K::ExpectAnalogous:
        out << "expect analogous " << c.m1 << " " << c.m2 << "\n";
        break;
      case K::ExpectNotAnalogous:
        out << "expect not-analogous " << c.m1 << " " << c.m2 << "\n";
        break;
      case K::ExpectExperiment:
        out << "expect experiment " << (c.expect_pass ? "pass" : "fail")
            << "\n";
        break;
    }
  }
  return out.str();
}

struct RunOptions {
  bool trace = false;
  bool json = false;
  std::uint64_t seed = 0;
  bool trust = false;  // allow world-dependent evolution on world-free stores
  OfflineOptions offline;
};

struct RunResult {
  int exit_code = 0;
  std::string output;
};

/// Executes commands in order against the named microcosms. Exit status is
/// nonzero iff an expectation fails (or the scenario cannot be set up).
/// Output is deterministic for a given scenario and seed.
inline RunResult run_scenario(const Scenario& s, const RunOptions& opts) {
  RunResult rr;
  std::ostringstream out;
  nlohmann::json jentries = nlohmann::json::array();
  bool any_expect_failed = false;

  auto emit = [&](const std::string& text, nlohmann::json j) {
    out << text << "\n";
    if (opts.json) {
      j["text"] = text;
      jentries.push_back(std::move(j));
    }
  };

  // World setup.
  WorldPtr world;
  if (s.world) {
    if (s.world->generated) {
      world = share(generate_world(s.world->n, s.world->density,
                                   s.world->seed));
    } else {
      auto w = World::make(s.world->events, s.world->hb);
      if (!w) {
        emit("world -> error " + w.error().to_string(),
             {{"cmd", "world"}, {"error", std::string(error_kind_name(
                                     w.error().kind))}});
        rr.exit_code = 2;
        rr.output = out.str();
        if (opts.json) rr.output = jentries.dump(2) + "\n";
        return rr;
      }
      world = share(std::move(w).value());
    }
  }

  // Microcosm setup.
  std::map<std::string, Microcosm> microcosms;
  for (const auto& d : s.microcosms) {
    auto m = Microcosm::make(d.internal_chain, d.external,
                             d.of_world ? world : WorldPtr{});
    if (!m) {
      emit("microcosm " + d.name + " -> error " + m.error().to_string(),
           {{"cmd", "microcosm"},
            {"name", d.name},
            {"error", std::string(error_kind_name(m.error().kind))}});
      rr.exit_code = 2;
      rr.output = opts.json ? jentries.dump(2) + "\n" : out.str();
      return rr;
    }
    microcosms.emplace(d.name, std::move(m).value());
  }

  std::optional<Error> last_error;
  bool last_ok = true;
  std::map<std::string, OfflineResult> offline_cache;
  std::optional<ExperimentReport> last_experiment;

  auto offline_for = [&](const std::string& name) -> const OfflineResult& {
    auto it = offline_cache.find(name);
    if (it == offline_cache.end()) {
      it = offline_cache
               .emplace(name, offline_saturate(microcosms.at(name),
                                               opts.offline))
               .first;
    }
    return it->second;
  };

  auto record_expect = [&](bool pass, const std::string& what,
                           nlohmann::json j) {
    j["cmd"] = "expect";
    j["pass"] = pass;
    emit("expect " + what + " -> " + (pass ? "pass" : "FAIL"), std::move(j));
    if (!pass) any_expect_failed = true;
  };

  using K = Scenario::Command::Kind;
  for (const auto& cmd : s.commands) {
    switch (cmd.kind) {
      case K::Query: {
        const auto& m = microcosms.at(cmd.m1);
        OnlineEngine engine(m);
        auto d = engine.decide_with_tree(cmd.a, cmd.b);
        std::string line = "query " + cmd.m1 + " " + cmd.a.token + " " +
                           cmd.b.token + " -> " +
                           verdict_text(d.verdict, cmd.a, cmd.b);
        nlohmann::json j{{"cmd", "query"},
                         {"microcosm", cmd.m1},
                         {"a", cmd.a.token},
                         {"b", cmd.b.token},
                         {"verdict", std::string(verdict_name(d.verdict))}};
        if (opts.trace && d.tree) j["trace"] = trace_string(*d.tree);
        emit(line, std::move(j));
        if (opts.trace && d.tree) {
          std::istringstream ts(trace_string(*d.tree));
          std::string tl;
          while (std::getline(ts, tl)) out << "  " << tl << "\n";
        }
        last_ok = true;
        last_error.reset();
        break;
      }
      case K::Add:
      case K::Update:
      case K::Remove: {
        auto& m = microcosms.at(cmd.m1);
        Correspondence corr = Correspondence::make(cmd.a, cmd.b, cmd.rel);
        std::string verb = cmd.kind == K::Add      ? "add"
                           : cmd.kind == K::Update ? "update"
                                                   : "remove";
        std::string head = verb + " " + cmd.m1 + " " +
                           (cmd.kind == K::Add
                                ? std::string(placement_token(cmd.placement)) +
                                      " "
                                : "") +
                           corr.text();
        // Evolving a world-free store skips the oracle checks; that needs an
        // explicit opt-in.
        if ((cmd.kind == K::Add || cmd.kind == K::Update) &&
            !m.world_backed() && !opts.trust) {
          last_error = make_error(
              ErrorKind::DomainError,
              "microcosm " + cmd.m1 +
                  " has no world; pass --trust to evolve it unchecked");
          last_ok = false;
          emit(head + " -> error " + last_error->to_string(),
               {{"cmd", verb},
                {"microcosm", cmd.m1},
                {"error",
                 std::string(error_kind_name(last_error->kind))}});
          break;
        }
        Result<Microcosm> evolved =
            cmd.kind == K::Add      ? add(m, corr, cmd.placement)
            : cmd.kind == K::Update ? update(m, corr)
                                    : remove(m, corr);
        nlohmann::json j{{"cmd", verb},
                         {"microcosm", cmd.m1},
                         {"correspondence", corr.text()}};
        if (evolved) {
          microcosms.at(cmd.m1) = std::move(evolved).value();
          offline_cache.erase(cmd.m1);
          j["ok"] = true;
          emit(head + " -> ok", std::move(j));
          last_ok = true;
          last_error.reset();
        } else {
          last_error = evolved.error();
          last_ok = false;
          j["ok"] = false;
          j["error"] = std::string(error_kind_name(last_error->kind));
          emit(head + " -> error " + last_error->to_string(), std::move(j));
        }
        break;
      }
      case K::SaturateOffline: {
        offline_cache.erase(cmd.m1);
        const auto& result = offline_for(cmd.m1);
        auto facts = result.facts.all();
        nlohmann::json j{{"cmd", "saturate-offline"},
                         {"microcosm", cmd.m1},
                         {"facts", nlohmann::json::array()},
                         {"complete", result.complete}};
        for (const auto& f : facts) j["facts"].push_back(f.line());
        emit("saturate-offline " + cmd.m1 + " -> " +
                 std::to_string(facts.size()) + " facts" +
                 (result.complete ? "" : " (incomplete)"),
             std::move(j));
        for (const auto& f : facts) {
          out << "  " << f.line() << "\n";
          if (opts.trace && f.provenance) {
            std::istringstream ts(trace_string(*f.provenance));
            std::string tl;
            while (std::getline(ts, tl)) out << "    " << tl << "\n";
          }
        }
        last_ok = true;
        last_error.reset();
        break;
      }
      case K::Experiment: {
        const auto& m1 = microcosms.at(cmd.m1);
        const auto& m2 = microcosms.at(cmd.m2);
        std::uint64_t seed = cmd.seed ^ opts.seed;
        std::vector<EvolutionStep> script;
        if (cmd.script_kind == ScriptKind::Forward) {
          if (!m1.world_backed()) {
            last_error = make_error(ErrorKind::DomainError,
                                    "forward experiments need a world-backed "
                                    "microcosm");
            last_ok = false;
            emit("experiment -> error " + last_error->to_string(),
                 {{"cmd", "experiment"},
                  {"error", std::string(error_kind_name(last_error->kind))}});
            break;
          }
          script = random_forward_script(m1, *m1.world(), cmd.steps, seed);
        } else {
          script = random_backward_script(m1, cmd.steps, seed);
        }
        auto report =
            run_permutation_experiment(m1, m2, script, cmd.trials, seed + 1);
        std::string kind_word =
            cmd.script_kind == ScriptKind::Forward ? "forward" : "backward";
        if (!report) {
          last_error = report.error();
          last_ok = false;
          emit("experiment " + kind_word + " " + cmd.m1 + " " + cmd.m2 +
                   " -> error " + last_error->to_string(),
               {{"cmd", "experiment"},
                {"error", std::string(error_kind_name(last_error->kind))}});
          break;
        }
        last_experiment = report.value();
        nlohmann::json j{{"cmd", "experiment"},
                         {"kind", kind_word},
                         {"m1", cmd.m1},
                         {"m2", cmd.m2},
                         {"steps", script.size()},
                         {"pass", last_experiment->passes},
                         {"fail", last_experiment->fails},
                         {"illegal", last_experiment->illegals}};
        emit("experiment " + kind_word + " " + cmd.m1 + " " + cmd.m2 +
                 " steps=" + std::to_string(script.size()) + " -> pass=" +
                 std::to_string(last_experiment->passes) + " fail=" +
                 std::to_string(last_experiment->fails) + " illegal=" +
                 std::to_string(last_experiment->illegals),
             std::move(j));
        {
          std::istringstream ls(last_experiment->to_lines());
          std::string ll;
          while (std::getline(ls, ll)) out << "  " << ll << "\n";
        }
        last_ok = true;
        last_error.reset();
        break;
      }
      case K::ExpectQuery: {
        const auto& m = microcosms.at(cmd.m1);
        OnlineEngine engine(m);
        Verdict v = engine.decide(cmd.a, cmd.b);
        bool pass = v == cmd.expect_verdict;
        record_expect(pass,
                      "query " + cmd.m1 + " " + cmd.a.token + " " +
                          cmd.b.token + " = " +
                          verdict_text(cmd.expect_verdict, cmd.a, cmd.b) +
                          (pass ? ""
                                : " (got " + verdict_text(v, cmd.a, cmd.b) +
                                      ")"),
                      {{"expect", "query"},
                       {"got", std::string(verdict_name(v))}});
        break;
      }
      case K::ExpectOffline: {
        const auto& result = offline_for(cmd.m1);
        bool pass = result.facts.has(cmd.a, cmd.b, cmd.offline_rel,
                                     cmd.offline_polarity);
        record_expect(
            pass,
            "offline " + cmd.m1 + " " + cmd.a.token + " " +
                (cmd.offline_polarity == Polarity::Refuted ? "not-" : "") +
                std::string(offline_rel_token(cmd.offline_rel)) + " " +
                cmd.b.token,
            {{"expect", "offline"}});
        break;
      }
      case K::ExpectError: {
        bool pass = !last_ok && last_error &&
                    error_kind_name(last_error->kind) == cmd.error_kind;
        record_expect(pass, "error " + cmd.error_kind,
                      {{"expect", "error"},
                       {"got", last_error ? std::string(error_kind_name(
                                                last_error->kind))
                                          : std::string("ok")}});
        break;
      }
      case K::ExpectOk: {
        record_expect(last_ok, "ok", {{"expect", "ok"}});
        break;
      }
      case K::ExpectAnalogous:
      case K::ExpectNotAnalogous: {
        auto an = analogous(microcosms.at(cmd.m1), microcosms.at(cmd.m2));
        bool want = cmd.kind == K::ExpectAnalogous;
        bool pass = an.analogous == want;
        std::string what = (want ? "analogous " : "not-analogous ") + cmd.m1 +
                           " " + cmd.m2;
        if (!pass && an.counterexample)
          what += " (pair " + an.counterexample->a.token + " " +
                  an.counterexample->b.token + ")";
        record_expect(pass, what, {{"expect", "analogous"}});
        break;
      }
      case K::ExpectExperiment: {
        bool pass = last_experiment &&
                    last_experiment->all_legal_passed() == cmd.expect_pass;
        record_expect(pass,
                      std::string("experiment ") +
                          (cmd.expect_pass ? "pass" : "fail"),
                      {{"expect", "experiment"}});
        break;
      }
    }
  }

  rr.exit_code = any_expect_failed ? 1 : 0;
  if (opts.json) {
    nlohmann::json top{{"entries", jentries},
                       {"exit", rr.exit_code}};
    rr.output = top.dump(2) + "\n";
  } else {
    rr.output = out.str();
  }
  return rr;
}

}  // namespace cdeduce
