#include <catch2/catch_amalgamated.hpp>

#include "cdeduce/world.hpp"
#include "oracle.hpp"

using namespace cdeduce;

namespace {

World chain3() {
  auto w = World::make({"e1"_ev, "e2"_ev, "e3"_ev},
                       {{"e1"_ev, "e2"_ev}, {"e2"_ev, "e3"_ev}});
  REQUIRE(w.ok());
  return std::move(w).value();
}

}  // namespace

TEST_CASE("models on a chain and an antichain", "[world]") {
  World w = chain3();
  CHECK(w.models("e1"_ev, "e3"_ev, Relation::HappensBefore));  // transitivity
  CHECK_FALSE(w.models("e1"_ev, "e3"_ev, Relation::Concurrent));
  CHECK_FALSE(w.models("e3"_ev, "e1"_ev, Relation::HappensBefore));

  auto anti = World::make({"e1"_ev, "e2"_ev}, {});
  REQUIRE(anti.ok());
  CHECK(anti->models("e1"_ev, "e2"_ev, Relation::Concurrent));
  CHECK(anti->models("e2"_ev, "e1"_ev, Relation::Concurrent));
}

TEST_CASE("models rejects reflexive and unknown queries", "[world]") {
  World w = chain3();
  CHECK_THROWS_AS(w.models("e1"_ev, "e1"_ev, Relation::HappensBefore),
                  std::invalid_argument);
  CHECK_THROWS_AS(w.models("e1"_ev, "zz"_ev, Relation::Concurrent),
                  std::invalid_argument);
}

TEST_CASE("models_star admits both the order and causally-related", "[world]") {
  auto w = World::make({"e1"_ev, "e2"_ev}, {{"e1"_ev, "e2"_ev}});
  REQUIRE(w.ok());
  CHECK(w->models_star("e1"_ev, "e2"_ev, CorrRel::HappensBefore));
  CHECK(w->models_star("e1"_ev, "e2"_ev, CorrRel::CausallyRelated));
  CHECK(w->models_star("e2"_ev, "e1"_ev, CorrRel::CausallyRelated));

  auto anti = World::make({"e1"_ev, "e2"_ev}, {});
  REQUIRE(anti.ok());
  CHECK_FALSE(anti->models_star("e1"_ev, "e2"_ev, CorrRel::CausallyRelated));
}

TEST_CASE("models_star agrees with its direct definition on random worlds",
          "[world]") {
  std::mt19937_64 rng(7001);
  for (int trial = 0; trial < 50; ++trial) {
    auto w = oracle::random_world(rng, 10);
    const auto& ev = w->events();
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = 0; j < ev.size(); ++j) {
        if (i == j) continue;
        for (CorrRel r : {CorrRel::HappensBefore, CorrRel::Concurrent,
                          CorrRel::CausallyRelated})
          CHECK(w->models_star(ev[i], ev[j], r) ==
                oracle::models_star_direct(*w, ev[i], ev[j], r));
      }
  }
}

TEST_CASE("generate_world honours the degenerate densities", "[world]") {
  World one = generate_world(1, 0.5, 11);
  CHECK(one.size() == 1);

  World full = generate_world(6, 1.0, 12);
  const auto& ev = full.events();
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (i != j)
        CHECK_FALSE(full.models(ev[i], ev[j], Relation::Concurrent));

  World empty = generate_world(5, 0.0, 13);
  const auto& ev2 = empty.events();
  for (std::size_t i = 0; i < ev2.size(); ++i)
    for (std::size_t j = i + 1; j < ev2.size(); ++j)
      CHECK(empty.models(ev2[i], ev2[j], Relation::Concurrent));
}

TEST_CASE("generated worlds satisfy the axioms", "[world]") {
  auto w = generate_world(8, 0.3, 42);
  auto check = oracle::check_world_axioms(w);
  INFO(check.detail);
  CHECK(check.ok);
}

TEST_CASE("generation is deterministic per seed", "[world]") {
  CHECK(generate_world(9, 0.4, 99).to_text() ==
        generate_world(9, 0.4, 99).to_text());
  CHECK(generate_world(9, 0.4, 99).to_text() !=
        generate_world(9, 0.4, 100).to_text());
}

TEST_CASE("serialization round-trips through the transitive reduction",
          "[world]") {
  std::mt19937_64 rng(7002);
  for (int trial = 0; trial < 20; ++trial) {
    auto w = oracle::random_world(rng, 9);
    auto text = w->to_text();
    auto back = World::from_text(text);
    REQUIRE(back.ok());
    CHECK(back->to_text() == text);
    const auto& ev = w->events();
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = 0; j < ev.size(); ++j)
        if (i != j) CHECK(back->verdict(ev[i], ev[j]) == w->verdict(ev[i], ev[j]));
  }
}

TEST_CASE("cycles are rejected", "[world]") {
  auto w = World::make({"a"_ev, "b"_ev},
                       {{"a"_ev, "b"_ev}, {"b"_ev, "a"_ev}});
  CHECK_FALSE(w.ok());
}
