// cdeduce/bisim.hpp — accuracy ordering, microcosm analogy, the forward
// bisimulation game, and the order-irrelevance experiments.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdeduce/evolution.hpp"
#include "cdeduce/microcosm.hpp"
#include "cdeduce/online.hpp"
#include "cdeduce/world.hpp"

namespace cdeduce {

// ---------------------------------------------------------------------------
// Accuracy order over verdicts.

/// r is at most as accurate as r': unknown sits below every verdict, and
/// causally-related sits below either happens-before direction. Defined only
/// on actual verdicts — NoVerdict is outside the vocabulary.
inline bool accuracy_leq(Verdict r, Verdict r2) {
  if (r == Verdict::NoVerdict || r2 == Verdict::NoVerdict)
    throw std::invalid_argument("accuracy order is undefined on NoVerdict");
  if (r == r2) return true;
  if (r == Verdict::Unknown) return true;
  if (r == Verdict::CausallyRelated &&
      (r2 == Verdict::HappensBefore || r2 == Verdict::HappensBeforeInv))
    return true;
  return false;
}

enum class AccuracyCmp { Less, Equal, Greater, Incomparable };

inline AccuracyCmp accuracy_compare(Verdict r, Verdict r2) {
  bool le = accuracy_leq(r, r2), ge = accuracy_leq(r2, r);
  if (le && ge) return AccuracyCmp::Equal;
  if (le) return AccuracyCmp::Less;
  if (ge) return AccuracyCmp::Greater;
  return AccuracyCmp::Incomparable;
}

// ---------------------------------------------------------------------------
// Analogy.

struct AnalogyResult {
  bool analogous = true;
  struct Counterexample {
    EventId a, b;
    Verdict v1 = Verdict::NoVerdict, v2 = Verdict::NoVerdict;
  };
  std::optional<Counterexample> counterexample;  // first, in canonical order
};

/// The union of both member sets plus one fresh probe event. Pairs entirely
/// outside both microcosms are uniformly unknown, so this universe suffices
/// for analogy checking.
inline std::vector<EventId> probe_universe(const Microcosm& m1,
                                           const Microcosm& m2) {
  std::vector<EventId> u = m1.events();
  for (const auto& e : m2.events()) u.push_back(e);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::string fresh = "probe";
  int suffix = 0;
  auto taken = [&](const std::string& t) {
    return std::binary_search(u.begin(), u.end(), EventId{t});
  };
  while (taken(fresh)) fresh = "probe" + std::to_string(++suffix);
  u.emplace_back(fresh);
  std::sort(u.begin(), u.end());
  return u;
}

/// Whether the two microcosms return identical verdicts on every ordered
/// distinct pair over the universe (NoVerdict must match NoVerdict).
inline AnalogyResult analogous(const Microcosm& m1, const Microcosm& m2,
                               const std::vector<EventId>& universe) {
  OnlineEngine e1(m1), e2(m2);
  AnalogyResult out;
  for (std::size_t i = 0; i < universe.size(); ++i)
    for (std::size_t j = 0; j < universe.size(); ++j) {
      if (i == j) continue;
      Verdict v1 = e1.decide(universe[i], universe[j]);
      Verdict v2 = e2.decide(universe[i], universe[j]);
      if (v1 != v2) {
        out.analogous = false;
        out.counterexample = {universe[i], universe[j], v1, v2};
        return out;
      }
    }
  return out;
}

inline AnalogyResult analogous(const Microcosm& m1, const Microcosm& m2) {
  return analogous(m1, m2, probe_universe(m1, m2));
}

// ---------------------------------------------------------------------------
// Forward transition system and the bisimulation game.

/// Every correspondence the world models, in canonical order: both
/// happens-before orientations appear only as the true direction; each
/// ordered pair also yields its causally-related weakening.
inline std::vector<Correspondence> world_correspondences(const World& w) {
  std::vector<Correspondence> out;
  const auto& ev = w.events();
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      Verdict v = w.verdict(ev[i], ev[j]);
      if (v == Verdict::HappensBefore) {
        out.push_back(Correspondence::hb(ev[i], ev[j]));
        out.push_back(Correspondence::cr(ev[i], ev[j]));
      } else if (v == Verdict::HappensBeforeInv) {
        out.push_back(Correspondence::hb(ev[j], ev[i]));
        out.push_back(Correspondence::cr(ev[i], ev[j]));
      } else {
        out.push_back(Correspondence::par(ev[i], ev[j]));
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

/// Transition steps add correspondences externally.
inline bool forward_step_enabled(const Microcosm& m, const Correspondence& c) {
  return add(m, c, Placement::External).ok();
}

struct GameOptions {
  int depth = 2;
  // When set, matched successors must also re-satisfy analogy (the candidate
  // relation of the game); when clear the game checks step matching only.
  bool candidate_analogy = true;
};

struct GameResult {
  bool holds_within_budget = true;
  enum class FailureKind { None, UnmatchedStep, CandidateFailed };
  FailureKind kind = FailureKind::None;
  std::vector<Correspondence> path;  // matched prefix leading to the failure
  std::optional<Correspondence> step;  // unmatched or candidate-breaking step
  int unmatched_side = 0;  // 1: enabled for m1 only; 2: enabled for m2 only
  std::optional<AnalogyResult::Counterexample> analogy_ce;

  std::string to_string() const {
    if (holds_within_budget) return "holds within budget";
    std::ostringstream out;
    out << (kind == FailureKind::UnmatchedStep ? "unmatched step"
                                               : "candidate failed");
    if (step) out << " " << step->text();
    if (kind == FailureKind::UnmatchedStep)
      out << " (enabled for m" << unmatched_side << " only)";
    if (!path.empty()) {
      out << " after";
      for (const auto& c : path) out << " [" << c.text() << "]";
    }
    return out.str();
  }
};

namespace detail {

inline bool forward_game(const Microcosm& m1, const Microcosm& m2,
                         const std::vector<Correspondence>& alphabet,
                         int depth, const GameOptions& opts, GameResult& out) {
  if (depth <= 0) return true;
  for (const auto& c : alphabet) {
    auto s1 = add(m1, c, Placement::External);
    auto s2 = add(m2, c, Placement::External);
    if (s1.ok() != s2.ok()) {
      out.holds_within_budget = false;
      out.kind = GameResult::FailureKind::UnmatchedStep;
      out.step = c;
      out.unmatched_side = s1.ok() ? 1 : 2;
      return false;
    }
    if (!s1.ok()) continue;
    if (opts.candidate_analogy) {
      auto an = analogous(*s1, *s2);
      if (!an.analogous) {
        out.holds_within_budget = false;
        out.kind = GameResult::FailureKind::CandidateFailed;
        out.step = c;
        out.analogy_ce = an.counterexample;
        return false;
      }
    }
    if (!forward_game(*s1, *s2, alphabet, depth - 1, opts, out)) {
      out.path.insert(out.path.begin(), c);
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Bounded bisimulation game for the forward transition system: steps are
/// enumerated from the world's correspondences up to the given depth; a
/// counterexample reports the unmatched step and the matched prefix leading
/// to it. Exhausting the budget without a mismatch reports holds-within-budget.
inline GameResult check_forward_bisimulation(const Microcosm& m1,
                                             const Microcosm& m2,
                                             const World& w,
                                             const GameOptions& opts = {}) {
  GameResult out;
  auto alphabet = world_correspondences(w);
  detail::forward_game(m1, m2, alphabet, opts.depth, opts, out);
  return out;
}

// ---------------------------------------------------------------------------
// Transition scripts and order-irrelevance experiments.

/// A replayable evolution sequence: every step's precondition must hold at
/// its position.
struct TransitionScript {
  Microcosm start;
  std::vector<EvolutionStep> steps;

  struct Replay {
    bool ok = false;
    int failed_step = -1;  // index of the first illegal step
    std::optional<Microcosm> result;
    std::optional<Error> error;
  };

  Replay replay() const { return replay_from(start); }

  Replay replay_from(const Microcosm& m0) const {
    Replay r;
    Microcosm cur = m0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      auto next = apply_step(cur, steps[i]);
      if (!next) {
        r.failed_step = static_cast<int>(i);
        r.error = next.error();
        return r;
      }
      cur = std::move(next).value();
    }
    r.ok = true;
    r.result = std::move(cur);
    return r;
  }
};

enum class ScriptKind { Forward, Backward };

struct TrialOutcome {
  enum class Status { Pass, Fail, Illegal };
  Status status = Status::Pass;
  std::vector<std::size_t> permutation;
  int illegal_step = -1;
  std::optional<AnalogyResult::Counterexample> counterexample;
};

struct ExperimentReport {
  int passes = 0;
  int fails = 0;
  int illegals = 0;
  std::vector<TrialOutcome> trials;

  bool all_legal_passed() const { return fails == 0; }

  /// `trial <k> <pass|fail|illegal> ...` lines plus a summary line.
  std::string to_lines() const {
    std::ostringstream out;
    for (std::size_t k = 0; k < trials.size(); ++k) {
      const auto& t = trials[k];
      out << "trial " << k << " ";
      switch (t.status) {
        case TrialOutcome::Status::Pass: out << "pass"; break;
        case TrialOutcome::Status::Fail:
          out << "fail";
          if (t.counterexample)
            out << " pair " << t.counterexample->a.token << " "
                << t.counterexample->b.token << " "
                << verdict_name(t.counterexample->v1) << " "
                << verdict_name(t.counterexample->v2);
          break;
        case TrialOutcome::Status::Illegal:
          out << "illegal step " << t.illegal_step;
          break;
      }
      out << "\n";
    }
    out << "summary pass=" << passes << " fail=" << fails
        << " illegal=" << illegals << "\n";
    return out.str();
  }
};

/// Replays the base script from m0, then `trials` random permutations of it
/// from m0', asserting that every legal replay ends analogous to the base
/// result. Permutations whose preconditions fail mid-replay are reported
/// separately as illegal, not as failures.
inline Result<ExperimentReport> run_permutation_experiment(
    const Microcosm& m0, const Microcosm& m0_prime,
    const std::vector<EvolutionStep>& script, int trials,
    std::uint64_t seed) {
  TransitionScript base{m0, script};
  auto base_replay = base.replay();
  if (!base_replay.ok)
    return make_error(ErrorKind::DomainError,
                      "base script fails at step " +
                          std::to_string(base_replay.failed_step) + ": " +
                          (base_replay.error ? base_replay.error->message
                                             : std::string{}));
  const Microcosm& final_base = *base_replay.result;

  ExperimentReport report;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < trials; ++k) {
    std::vector<std::size_t> perm(script.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    TrialOutcome outcome;
    outcome.permutation = perm;
    Microcosm cur = m0_prime;
    bool illegal = false;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      auto next = apply_step(cur, script[perm[i]]);
      if (!next) {
        outcome.status = TrialOutcome::Status::Illegal;
        outcome.illegal_step = static_cast<int>(i);
        ++report.illegals;
        illegal = true;
        break;
      }
      cur = std::move(next).value();
    }
    if (!illegal) {
      auto an = analogous(final_base, cur);
      if (an.analogous) {
        outcome.status = TrialOutcome::Status::Pass;
        ++report.passes;
      } else {
        outcome.status = TrialOutcome::Status::Fail;
        outcome.counterexample = an.counterexample;
        ++report.fails;
      }
    }
    report.trials.push_back(std::move(outcome));
  }
  return report;
}

/// A random legal forward script of external additions drawn from the
/// world's correspondences. Returns fewer steps when the world runs out of
/// addable correspondences.
inline std::vector<EvolutionStep> random_forward_script(
    const Microcosm& m0, const World& w, std::size_t length,
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pool = world_correspondences(w);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<EvolutionStep> script;
  Microcosm cur = m0;
  for (const auto& c : pool) {
    if (script.size() >= length) break;
    auto next = add(cur, c, Placement::External);
    if (!next) continue;
    cur = std::move(next).value();
    script.push_back({EvolutionStep::Kind::Add, c, Placement::External});
  }
  return script;
}

/// A random legal backward script: removable correspondences are found via
/// the removal guard itself.
inline std::vector<EvolutionStep> random_backward_script(
    const Microcosm& m0, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EvolutionStep> script;
  Microcosm cur = m0;
  for (std::size_t step = 0; step < length; ++step) {
    auto stored = cur.correspondences();
    std::shuffle(stored.begin(), stored.end(), rng);
    bool advanced = false;
    for (const auto& [c, placement] : stored) {
      auto next = remove(cur, c);
      if (!next) continue;
      cur = std::move(next).value();
      script.push_back({EvolutionStep::Kind::Remove, c, placement});
      advanced = true;
      break;
    }
    if (!advanced) break;
  }
  return script;
}

}  // namespace cdeduce
