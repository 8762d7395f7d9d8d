// Acceptance suite: one binary, one pass/fail line per criterion.
//
// Criteria cover world axioms, online consistency against the saturation
// oracle, derivability and trace-shrinking of online verdicts, accuracy and
// compatibility of world-backed stores, the packaged offline refutation
// scenarios, the illegal-evolution guards, forward and backward
// order-irrelevance, the bisimulation game, and a quadratic-growth smoke
// check.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdeduce/cdeduce.hpp"

#include "oracle.hpp"

using namespace cdeduce;

namespace {

struct Criterion {
  int number = 0;
  std::string title;
  bool pass = false;
  bool advisory = false;  // printed as WARN on failure, does not gate
  std::string detail;
};

std::vector<Criterion> g_results;

void report(int number, const std::string& title, bool pass,
            const std::string& detail, bool advisory = false) {
  g_results.push_back({number, title, pass, advisory, detail});
  const char* tag = pass ? "[PASS]" : (advisory ? "[WARN]" : "[FAIL]");
  std::cout << tag << " criterion " << number << ": " << title;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n" << std::flush;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string g_scenario_dir = "scenarios";

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_packaged(const std::string& name, bool& ok, std::string& why) {
  auto text = slurp(g_scenario_dir + "/" + name);
  if (!text) {
    ok = false;
    why = "cannot read " + g_scenario_dir + "/" + name;
    return {};
  }
  auto s = parse_scenario(*text);
  if (!s) {
    ok = false;
    why = s.error().to_string();
    return {};
  }
  auto rr = run_scenario(*s, {});
  if (rr.exit_code != 0) {
    ok = false;
    why = "scenario exited " + std::to_string(rr.exit_code);
  }
  return rr;
}

// --------------------------------------------------------------------------
// 1. World axioms on 1,000 generated worlds.

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> nd(1, 32);
  std::uniform_real_distribution<double> dd(0.0, 1.0);
  int failures = 0;
  std::string first;
  for (int k = 0; k < 1000; ++k) {
    World w = generate_world(nd(rng), dd(rng), rng());
    auto check = oracle::check_world_axioms(w);
    if (!check.ok) {
      ++failures;
      if (first.empty()) first = check.detail;
    }
  }
  double secs = seconds_since(t0);
  bool pass = failures == 0 && secs < 10.0;
  std::ostringstream d;
  d << "1000 worlds, " << failures << " violations, " << secs << " s";
  if (!first.empty()) d << ", first: " << first;
  report(1, "axioms and consistency of generated worlds", pass, d.str());
}

// --------------------------------------------------------------------------
// 2. Online consistency and oracle agreement.

void criterion2() {
  std::mt19937_64 rng(202);
  int mirror_bad = 0, oracle_bad = 0, small_count = 0;
  for (int k = 0; k < 500; ++k) {
    auto w = oracle::random_world(rng, 16);
    auto m = oracle::random_microcosm(w, rng, 12);
    OnlineEngine engine(m);
    const auto& mx = engine.matrix();
    for (std::size_t i = 0; i < mx.size(); ++i)
      for (std::size_t j = 0; j < mx.size(); ++j) {
        if (i == j) continue;
        Verdict v = mx.cell(i, j).verdict, vr = mx.cell(j, i).verdict;
        bool ok = v == Verdict::HappensBefore
                      ? vr == Verdict::HappensBeforeInv
                  : v == Verdict::HappensBeforeInv
                      ? vr == Verdict::HappensBefore
                      : vr == v;
        if (!ok) ++mirror_bad;
      }
    if (m.events().size() <= 8) {
      ++small_count;
      oracle::Naive naive(m);
      auto universe = m.events();
      universe.push_back("outside-probe"_ev);
      for (std::size_t i = 0; i < universe.size(); ++i)
        for (std::size_t j = 0; j < universe.size(); ++j) {
          if (i == j) continue;
          if (engine.decide(universe[i], universe[j]) !=
              naive.decide(universe[i], universe[j]))
            ++oracle_bad;
        }
    }
  }
  std::ostringstream d;
  d << "500 stores, mirror violations " << mirror_bad
    << ", oracle disagreements " << oracle_bad << " over " << small_count
    << " small stores";
  report(2, "online consistency and saturation-oracle agreement",
         mirror_bad == 0 && oracle_bad == 0 && small_count > 50, d.str());
}

// --------------------------------------------------------------------------
// 3. Positive verdicts are initially derivable; unused additions shrink away.

void criterion3() {
  std::mt19937_64 rng(303);
  int derivable_bad = 0, shrink_bad = 0, shrink_checked = 0;
  for (int k = 0; k < 250; ++k) {
    auto w = oracle::random_world(rng, 10);
    auto m = oracle::random_microcosm(w, rng, 8);
    OnlineEngine engine(m);
    auto ev = m.events();
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = 0; j < ev.size(); ++j) {
        if (i == j) continue;
        Verdict v = engine.decide(ev[i], ev[j]);
        auto lit = engine.initially_derivable(ev[i], ev[j]);
        auto rev = engine.initially_derivable(ev[j], ev[i]);
        switch (v) {
          case Verdict::HappensBefore:
            if (lit != CorrRel::HappensBefore) ++derivable_bad;
            break;
          case Verdict::HappensBeforeInv:
            if (rev != CorrRel::HappensBefore) ++derivable_bad;
            break;
          case Verdict::Concurrent:
            if (lit != CorrRel::Concurrent) ++derivable_bad;
            break;
          case Verdict::CausallyRelated:
            if (lit != CorrRel::CausallyRelated) ++derivable_bad;
            break;
          default: break;
        }
      }
    // Trace shrinking under one legal addition.
    auto pool = world_correspondences(*w);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const auto& c : pool) {
      auto added = add(m, c, Placement::External);
      if (!added) continue;
      OnlineEngine after(*added);
      auto universe = added->events();
      for (std::size_t i = 0; i < universe.size(); ++i)
        for (std::size_t j = 0; j < universe.size(); ++j) {
          if (i == j) continue;
          auto d = after.decide_with_tree(universe[i], universe[j]);
          if (!d.tree || tree_contains(*d.tree, c)) continue;
          ++shrink_checked;
          if (engine.decide(universe[i], universe[j]) != d.verdict)
            ++shrink_bad;
        }
      break;
    }
  }
  std::ostringstream d;
  d << "derivability violations " << derivable_bad
    << ", shrink violations " << shrink_bad << " over " << shrink_checked
    << " shrinkable decisions";
  report(3, "online verdicts initially derivable; unused additions shrink",
         derivable_bad == 0 && shrink_bad == 0 && shrink_checked > 1000,
         d.str());
}

// --------------------------------------------------------------------------
// 4. Accuracy against the world; compatibility between sibling stores.

void criterion4() {
  std::mt19937_64 rng(404);
  int accuracy_bad = 0, compat_bad = 0;
  for (int k = 0; k < 500; ++k) {
    auto w = oracle::random_world(rng, 10);
    auto m1 = oracle::random_microcosm(w, rng, 7);
    auto m2 = oracle::random_microcosm(w, rng, 7);
    OnlineEngine e1(m1), e2(m2);
    const auto& ev = w->events();
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = 0; j < ev.size(); ++j) {
        if (i == j) continue;
        Verdict truth = w->verdict(ev[i], ev[j]);
        Verdict v1 = e1.decide(ev[i], ev[j]);
        Verdict v2 = e2.decide(ev[i], ev[j]);
        if (v1 != Verdict::NoVerdict && !accuracy_leq(v1, truth))
          ++accuracy_bad;
        if (v2 != Verdict::NoVerdict && !accuracy_leq(v2, truth))
          ++accuracy_bad;
        if (v1 != Verdict::NoVerdict && v2 != Verdict::NoVerdict &&
            !accuracy_leq(v1, v2) && !accuracy_leq(v2, v1))
          ++compat_bad;
      }
  }
  std::ostringstream d;
  d << "500 samples, accuracy violations " << accuracy_bad
    << ", incomparable sibling verdicts " << compat_bad;
  report(4, "accuracy and sibling compatibility",
         accuracy_bad == 0 && compat_bad == 0, d.str());
}

// --------------------------------------------------------------------------
// 5. Packaged refutation scenario with the expected rule spine.

void criterion5() {
  bool ok = true;
  std::string why;
  run_packaged("fig4a.cds", ok, why);

  // Rule spine of the not-unknown fact, checked against the engine directly.
  auto m = Microcosm::make({}, {Correspondence::par("e1"_ev, "e2"_ev),
                                Correspondence::hb("e2"_ev, "e3"_ev)});
  if (!m.ok()) {
    report(5, "packaged refutation scenario", false, "store setup failed");
    return;
  }
  auto result = offline_saturate(*m);
  auto not_unknown = result.facts.tree("e3"_ev, "e1"_ev, OfflineRel::Unknown,
                                       Polarity::Refuted);
  auto not_hb =
      result.facts.tree("e3"_ev, "e1"_ev, OfflineRel::Hb, Polarity::Refuted);
  bool spine = not_unknown && not_hb && not_unknown->rule == Rule::NotR &&
               not_unknown->premises.size() == 1 &&
               not_unknown->premises[0]->rule == Rule::Cntrd &&
               tree_uses_rule(*not_unknown, Rule::InTr) &&
               tree_uses_rule(*not_unknown, Rule::InOK) &&
               tree_uses_rule(*not_unknown, Rule::Init);
  if (!spine) why += (why.empty() ? "" : "; ") + std::string("rule spine");
  report(5, "offline refutation scenario and rule spine", ok && spine, why);
}

// --------------------------------------------------------------------------
// 6. Packaged direction-recovery scenario.

void criterion6() {
  bool ok = true;
  std::string why;
  run_packaged("fig4b.cds", ok, why);

  auto m = Microcosm::make({}, {Correspondence::par("e1"_ev, "e2"_ev),
                                Correspondence::hb("e2"_ev, "e3"_ev),
                                Correspondence::cr("e3"_ev, "e1"_ev)});
  bool derived = false;
  if (m.ok()) {
    auto result = offline_saturate(*m);
    auto tree =
        result.facts.tree("e1"_ev, "e3"_ev, OfflineRel::Hb, Polarity::Asserted);
    derived = tree && tree->rule == Rule::NotHB &&
              tree_uses_rule(*tree, Rule::UpCntrd);
  }
  if (!derived) why += (why.empty() ? "" : "; ") + std::string("Not-HB proof");
  report(6, "offline direction recovery through Not-HB", ok && derived, why);
}

// --------------------------------------------------------------------------
// 7. Illegal evolution guards with witness chains.

void criterion7() {
  bool ok_a = true, ok_b = true;
  std::string why_a, why_b;
  run_packaged("fig2a.cds", ok_a, why_a);
  run_packaged("fig2b.cds", ok_b, why_b);

  const std::vector<EventId> chain{"f1"_ev, "e1"_ev, "e2"_ev, "f2"_ev};
  auto w = World::make(chain, {{"f1"_ev, "e1"_ev},
                               {"e1"_ev, "e2"_ev},
                               {"e2"_ev, "f2"_ev}});
  bool witnesses = false;
  if (w.ok()) {
    auto wp = share(std::move(w).value());
    auto base = Microcosm::make({},
                                {Correspondence::hb("f1"_ev, "e1"_ev),
                                 Correspondence::hb("e2"_ev, "f2"_ev),
                                 Correspondence::cr("f1"_ev, "f2"_ev)},
                                wp);
    auto with_cr = Microcosm::make({},
                                   {Correspondence::hb("f1"_ev, "e1"_ev),
                                    Correspondence::hb("e2"_ev, "f2"_ev),
                                    Correspondence::cr("f1"_ev, "f2"_ev),
                                    Correspondence::cr("e1"_ev, "e2"_ev)},
                                   wp);
    if (base.ok() && with_cr.ok()) {
      auto ra = add(*base, Correspondence::hb("e1"_ev, "e2"_ev),
                    Placement::External);
      auto rb = update(*with_cr, Correspondence::hb("e1"_ev, "e2"_ev));
      witnesses = !ra.ok() && !rb.ok() &&
                  ra.error().kind == ErrorKind::M4Violation &&
                  rb.error().kind == ErrorKind::M4Violation &&
                  ra.error().witness_chain == chain &&
                  rb.error().witness_chain == chain &&
                  ra.error().witness_corr &&
                  ra.error().witness_corr->same_pair("f1"_ev, "f2"_ev) &&
                  rb.error().witness_corr &&
                  rb.error().witness_corr->same_pair("f1"_ev, "f2"_ev);
    }
  }
  std::string why = why_a + (why_b.empty() ? "" : "; " + why_b);
  if (!witnesses) why += (why.empty() ? "" : "; ") + std::string("witness chains");
  report(7, "illegal addition and update rejected with witness chains",
         ok_a && ok_b && witnesses, why);
}

// --------------------------------------------------------------------------
// 8 and 9. Order irrelevance.

void criterion8() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(808);
  int instances = 0, legal = 0, failed = 0;
  for (int k = 0; k < 100; ++k) {
    auto w = share(generate_world(10, 0.3 + 0.04 * (k % 10), rng()));
    auto m0 = oracle::random_microcosm(w, rng, 3);
    auto script = random_forward_script(m0, *w, 6, rng());
    if (script.size() < 6) continue;
    ++instances;
    auto report_r = run_permutation_experiment(m0, m0, script, 20, rng());
    if (!report_r.ok()) {
      ++failed;
      continue;
    }
    legal += report_r->passes;
    failed += report_r->fails;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << instances << " instances, " << legal << " legal replays, " << failed
    << " failures, " << secs << " s";
  report(8, "forward order-irrelevance",
         instances >= 90 && failed == 0 && legal > 0 && secs < 60.0, d.str());
}

void criterion9() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(909);
  int instances = 0, legal = 0, failed = 0;
  for (int k = 0; k < 100; ++k) {
    auto w = share(generate_world(10, 0.3 + 0.04 * (k % 10), rng()));
    auto forward = random_forward_script(Microcosm::empty(w), *w, 8, rng());
    TransitionScript ts{Microcosm::empty(w), forward};
    auto built = ts.replay();
    if (!built.ok) continue;
    auto script = random_backward_script(*built.result, 6, rng());
    if (script.size() < 6) continue;
    ++instances;
    auto report_r =
        run_permutation_experiment(*built.result, *built.result, script, 20,
                                   rng());
    if (!report_r.ok()) {
      ++failed;
      continue;
    }
    legal += report_r->passes;
    failed += report_r->fails;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << instances << " instances, " << legal << " legal replays, " << failed
    << " failures, " << secs << " s";
  report(9, "backward order-irrelevance",
         instances >= 90 && failed == 0 && legal > 0 && secs < 60.0, d.str());
}

// --------------------------------------------------------------------------
// 10. Bisimulation game.

void criterion10() {
  std::mt19937_64 rng(1010);
  bool analogous_pass = true;
  for (int k = 0; k < 10; ++k) {
    auto w = share(generate_world(4, 0.5, rng()));
    auto m = oracle::random_microcosm(w, rng, 3);
    GameOptions opts;
    opts.depth = 2;
    if (!check_forward_bisimulation(m, m, *w, opts).holds_within_budget)
      analogous_pass = false;
  }

  auto w = share(generate_world(3, 1.0, 3));  // e1 < e2 < e3
  auto m1 =
      Microcosm::make({}, {Correspondence::hb("e1"_ev, "e2"_ev)}, w);
  auto m2 =
      Microcosm::make({}, {Correspondence::cr("e1"_ev, "e2"_ev)}, w);
  bool counterexample = false;
  std::string shape;
  if (m1.ok() && m2.ok()) {
    GameOptions pure;
    pure.depth = 2;
    pure.candidate_analogy = false;
    auto res = check_forward_bisimulation(*m1, *m2, *w, pure);
    counterexample = !res.holds_within_budget &&
                     res.kind == GameResult::FailureKind::UnmatchedStep &&
                     res.step && res.step->rel == CorrRel::HappensBefore &&
                     res.step->involves("e3"_ev) && res.path.size() == 1 &&
                     res.unmatched_side == 2;
    shape = res.to_string();
  }
  report(10, "bisimulation game separates order from causally-related",
         analogous_pass && counterexample, shape);
}

// --------------------------------------------------------------------------
// 11. Quadratic growth smoke check (advisory).

Microcosm sized_store(std::size_t events) {
  auto w = share(generate_world(events, 0.25, 1234 + events));
  std::mt19937_64 rng(4321 + events);
  Microcosm m = oracle::random_microcosm(w, rng, events + events / 2);
  return m;
}

double time_all_pairs(const Microcosm& m) {
  auto t0 = std::chrono::steady_clock::now();
  OnlineEngine engine(m);
  auto ev = engine.events();
  int sink = 0;
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (i != j) sink += static_cast<int>(engine.decide(ev[i], ev[j]));
  static volatile int keep;
  keep = sink;
  return seconds_since(t0);
}

void criterion11() {
  std::vector<std::size_t> sizes{8, 16, 32, 64};
  std::vector<double> times;
  for (auto n : sizes) {
    Microcosm m = sized_store(n);
    double best = 1e9;
    for (int rep = 0; rep < 5; ++rep) best = std::min(best, time_all_pairs(m));
    times.push_back(best);
  }
  std::ostringstream d;
  bool within = true;
  d << "all-pairs decide seconds:";
  for (std::size_t i = 0; i < sizes.size(); ++i)
    d << " m=" << sizes[i] << ":" << times[i];
  d << "; doubling ratios:";
  for (std::size_t i = 1; i < times.size(); ++i) {
    double ratio = times[i] / std::max(times[i - 1], 1e-9);
    d << " " << ratio;
    if (ratio > 12.0) within = false;  // 3x allowance over the quadratic 4x
  }
  report(11, "quadratic growth smoke check", within, d.str(),
         /*advisory=*/true);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--scenario-dir") g_scenario_dir = argv[i + 1];

  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();

  int hard_failures = 0;
  for (const auto& c : g_results)
    if (!c.pass && !c.advisory) ++hard_failures;
  std::cout << (hard_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL")
            << " (" << g_results.size() << " criteria, " << hard_failures
            << " hard failures)\n";
  return hard_failures == 0 ? 0 : 1;
}
