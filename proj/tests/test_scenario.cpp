#include <catch2/catch_amalgamated.hpp>

#include "cdeduce/scenario.hpp"

using namespace cdeduce;

namespace {

RunResult run_text(const std::string& text, RunOptions opts = {}) {
  auto s = parse_scenario(text);
  INFO((s.ok() ? std::string{} : s.error().to_string()));
  REQUIRE(s.ok());
  return run_scenario(*s, opts);
}

}  // namespace

TEST_CASE("minimal world parses", "[scenario]") {
  auto s = parse_scenario("world {\n  event e1\n}\n");
  REQUIRE(s.ok());
  REQUIRE(s->world.has_value());
  CHECK(s->world->events == std::vector<EventId>{"e1"_ev});
}

TEST_CASE("malformed lines report their line number", "[scenario]") {
  auto s = parse_scenario("world {\n  hb e1\n}\n");
  REQUIRE_FALSE(s.ok());
  CHECK(s.error().kind == ErrorKind::Syntax);
  CHECK(s.error().message.find("line 2") != std::string::npos);
}

TEST_CASE("duplicate names and dangling references are rejected",
          "[scenario]") {
  CHECK_FALSE(parse_scenario("microcosm M of none {\n}\n"
                             "microcosm M of none {\n}\n")
                  .ok());
  CHECK_FALSE(parse_scenario("query M e1 e2\n").ok());
  CHECK_FALSE(parse_scenario("world {\n  event e1\n}\n"
                             "microcosm M of world {\n  external e1 par e9\n}\n")
                  .ok());
}

TEST_CASE("parse round-trips through serialize", "[scenario]") {
  const std::string text =
      "world {\n"
      "  event e1\n"
      "  event e2\n"
      "  event e3\n"
      "  hb e1 e2\n"
      "}\n"
      "microcosm M of world {\n"
      "  internal e1 < e2\n"
      "  external e1 cr e3\n"
      "}\n"
      "microcosm N of none {\n"
      "}\n"
      "query M e1 e2\n"
      "add M ext e2 par e3\n"
      "update M e1 < e3\n"
      "remove M e1 cr e3\n"
      "saturate-offline M\n"
      "experiment forward M M steps=3 trials=5 seed=9\n"
      "expect query M e1 e2 <\n"
      "expect offline M e1 not-? e3\n"
      "expect error M4Violation\n"
      "expect ok\n"
      "expect analogous M N\n"
      "expect experiment pass\n";
  auto s = parse_scenario(text);
  REQUIRE(s.ok());
  auto text2 = serialize_scenario(*s);
  auto s2 = parse_scenario(text2);
  REQUIRE(s2.ok());
  CHECK(serialize_scenario(*s2) == text2);
}

TEST_CASE("queries and expectations run against named microcosms",
          "[scenario]") {
  auto rr = run_text(
      "world {\n  event e1\n  event e2\n  event e3\n  hb e1 e2\n  hb e2 e3\n}\n"
      "microcosm M of world {\n  external e1 < e2\n  external e2 < e3\n}\n"
      "query M e1 e3\n"
      "expect query M e1 e3 <\n"
      "expect query M e3 e1 >\n");
  CHECK(rr.exit_code == 0);
  CHECK(rr.output.find("query M e1 e3 -> e1 < e3") != std::string::npos);
}

TEST_CASE("a failing expectation drives the exit status", "[scenario]") {
  auto rr = run_text(
      "world {\n  event e1\n  event e2\n  hb e1 e2\n}\n"
      "microcosm M of world {\n  external e1 < e2\n}\n"
      "expect query M e1 e2 par\n");
  CHECK(rr.exit_code == 1);
  CHECK(rr.output.find("FAIL") != std::string::npos);
}

TEST_CASE("expected errors keep the scenario green", "[scenario]") {
  auto rr = run_text(
      "world {\n  event f1\n  event e1\n  event e2\n  event f2\n"
      "  hb f1 e1\n  hb e1 e2\n  hb e2 f2\n}\n"
      "microcosm M of world {\n"
      "  external f1 < e1\n  external e2 < f2\n  external f1 cr f2\n}\n"
      "add M ext e1 < e2\n"
      "expect error M4Violation\n");
  CHECK(rr.exit_code == 0);
}

TEST_CASE("world-free evolution needs --trust", "[scenario]") {
  const std::string text =
      "microcosm M of none {\n  external e1 par e2\n}\n"
      "add M ext e2 par e3\n"
      "expect ok\n";
  auto rr = run_text(text);
  CHECK(rr.exit_code == 1);
  RunOptions trust;
  trust.trust = true;
  auto rr2 = run_text(text, trust);
  CHECK(rr2.exit_code == 0);
}

TEST_CASE("offline expectations consult the saturated facts", "[scenario]") {
  auto rr = run_text(
      "microcosm M of none {\n"
      "  external e1 par e2\n  external e2 < e3\n}\n"
      "saturate-offline M\n"
      "expect offline M e3 not-< e1\n"
      "expect offline M e3 not-? e1\n"
      "expect offline M e1 par e2\n");
  CHECK(rr.exit_code == 0);
}

TEST_CASE("scenario output is byte-stable for a fixed seed", "[scenario]") {
  const std::string text =
      "world {\n  generate n=6 density=0.4 seed=21\n}\n"
      "microcosm A of world {\n}\n"
      "add A ext e1 cr e2\n"
      "experiment forward A A steps=4 trials=6 seed=3\n"
      "expect experiment pass\n";
  auto a = run_text(text);
  auto b = run_text(text);
  CHECK(a.output == b.output);
  CHECK(a.exit_code == 0);

  RunOptions json;
  json.json = true;
  auto c = run_text(text, json);
  CHECK(c.output.find("\"entries\"") != std::string::npos);
}

TEST_CASE("generated worlds serve as scenario oracles", "[scenario]") {
  auto rr = run_text(
      "world {\n  generate n=5 density=1.0 seed=2\n}\n"
      "microcosm M of world {\n  internal e1 < e2\n}\n"
      "add M int e2 < e3\n"
      "expect ok\n"
      "query M e1 e3\n"
      "expect query M e1 e3 <\n");
  CHECK(rr.exit_code == 0);
}

TEST_CASE("traces are printed on demand", "[scenario]") {
  RunOptions opts;
  opts.trace = true;
  auto rr = run_text(
      "microcosm M of none {\n  external e1 < e2\n  external e2 < e3\n}\n"
      "query M e1 e3\n",
      opts);
  CHECK(rr.output.find("In-Tr: e1 < e3") != std::string::npos);
  CHECK(rr.output.find("Init: e1 < e2") != std::string::npos);
}
