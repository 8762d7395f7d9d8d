// cdeduce/evolution.hpp — microcosm evolution: addition, update, removal,
// and their hypothetical variants, plus the post-evolution query contracts.

#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdeduce/microcosm.hpp"
#include "cdeduce/online.hpp"
#include "cdeduce/result.hpp"

namespace cdeduce {

namespace detail {

inline Error m4_error(const Violation& v, const std::string& action) {
  Error e;
  e.kind = ErrorKind::M4Violation;
  e.message = action + " violates M4";
  e.witness_corr = v.corr;
  e.witness_chain = v.chain;
  return e;
}

/// Extends the internal chain with a happens-before correspondence. The chain
/// only grows at its ends, so every addition contributes exactly one new
/// correspondence.
inline Result<std::vector<EventId>> extend_chain(
    const std::vector<EventId>& chain, const Correspondence& c) {
  std::vector<EventId> out = chain;
  auto in_chain = [&](const EventId& e) {
    return std::find(chain.begin(), chain.end(), e) != chain.end();
  };
  if (chain.empty()) {
    out = {c.left, c.right};
    return out;
  }
  if (c.left == chain.back() && !in_chain(c.right)) {
    out.push_back(c.right);
    return out;
  }
  if (c.right == chain.front() && !in_chain(c.left)) {
    out.insert(out.begin(), c.left);
    return out;
  }
  return make_error(ErrorKind::ChainViolation,
                    "internal placement of " + c.text() +
                        " does not extend the chain at an end");
}

}  // namespace detail

/// M + c. Preconditions: no initial judgement on the pair (in either
/// orientation), the result satisfies M4, internal placement keeps the chain
/// a chain, and — when the microcosm is tied to a world — the world models
/// the correspondence.
inline Result<Microcosm> add(const Microcosm& m, const Correspondence& c,
                             Placement placement) {
  if (m.world_backed()) {
    if (!m.world()->contains(c.left) || !m.world()->contains(c.right))
      return make_error(ErrorKind::NotInWorld,
                        "correspondence " + c.text() +
                            " references an event outside the world");
    if (!m.world()->models_star(c))
      return make_error(ErrorKind::NotInWorld,
                        "world does not model " + c.text());
  }
  OnlineEngine engine(m);
  if (engine.pair_initially_determined(c.left, c.right))
    return make_error(ErrorKind::AlreadyDetermined,
                      "an initial judgement already exists for {" +
                          c.left.token + ", " + c.right.token + "}");
  std::vector<EventId> internal = m.internal();
  std::vector<Correspondence> external = m.external();
  if (placement == Placement::Internal) {
    if (c.rel != CorrRel::HappensBefore)
      return make_error(ErrorKind::ChainViolation,
                        "only happens-before facts can be internal");
    auto chain = detail::extend_chain(internal, c);
    if (!chain) return chain.error();
    internal = std::move(chain).value();
  } else {
    external.push_back(c);
  }
  if (auto v = detail::check_m4(internal, external))
    return detail::m4_error(*v, "addition of " + c.text());
  return Microcosm::make_unchecked(std::move(internal), std::move(external),
                                   m.world());
}

/// M[e1 < e2]: the stored causally-related correspondence on the pair is
/// replaced by the directed happens-before, leaving the correspondence count
/// unchanged. When world-backed, the world must order the pair this way.
inline Result<Microcosm> update(const Microcosm& m, const Correspondence& c) {
  if (c.rel != CorrRel::HappensBefore)
    throw std::invalid_argument("update payload must be happens-before");
  auto stored = m.stored_cr(c.left, c.right);
  if (!stored)
    return make_error(ErrorKind::NoSuchCR,
                      "no causally-related correspondence on {" +
                          c.left.token + ", " + c.right.token + "}");
  if (m.world_backed()) {
    if (!m.world()->contains(c.left) || !m.world()->contains(c.right))
      return make_error(ErrorKind::WorldDisagrees,
                        "update references an event outside the world");
    if (!m.world()->models(c.left, c.right, Relation::HappensBefore))
      return make_error(ErrorKind::WorldDisagrees,
                        "world does not order " + c.left.token + " < " +
                            c.right.token);
  }
  std::vector<Correspondence> external = m.external();
  external.erase(std::remove(external.begin(), external.end(), *stored),
                 external.end());
  external.push_back(c);
  if (auto v = detail::check_m4(m.internal(), external))
    return detail::m4_error(*v, "update with " + c.text());
  return Microcosm::make_unchecked(m.internal(), std::move(external),
                                   m.world());
}

/// Inverse of addition: yields M' with c removed such that add(M', c)
/// reproduces M exactly. Internal removals may only drop a chain-end edge;
/// anything the restricted addition could not rebuild is NotInvertible.
inline Result<Microcosm> remove(const Microcosm& m, const Correspondence& c) {
  std::optional<Placement> placement;
  std::vector<EventId> internal = m.internal();
  std::vector<Correspondence> external = m.external();

  if (std::find(external.begin(), external.end(), c) != external.end()) {
    placement = Placement::External;
    external.erase(std::remove(external.begin(), external.end(), c),
                   external.end());
  } else if (c.rel == CorrRel::HappensBefore && internal.size() >= 2) {
    // Internal chain facts. Only the two end edges can be removed; removing
    // any other chain pair cannot be undone by a single end-extending
    // addition.
    bool head = internal[0] == c.left && internal[1] == c.right;
    bool tail = internal[internal.size() - 2] == c.left &&
                internal.back() == c.right;
    bool present = false;
    for (std::size_t p = 0; p < internal.size() && !present; ++p)
      for (std::size_t q = p + 1; q < internal.size() && !present; ++q)
        if (internal[p] == c.left && internal[q] == c.right) present = true;
    if (head) {
      placement = Placement::Internal;
      internal.erase(internal.begin());
      if (internal.size() == 1) internal.clear();
    } else if (tail) {
      placement = Placement::Internal;
      internal.pop_back();
      if (internal.size() == 1) internal.clear();
    } else if (present) {
      return make_error(ErrorKind::NotInvertible,
                        "removing " + c.text() +
                            " from the middle of the chain cannot be the "
                            "inverse of an addition");
    }
  }
  if (!placement)
    return make_error(ErrorKind::NotPresent,
                      c.text() + " is not stored in the microcosm");

  Microcosm candidate = Microcosm::make_unchecked(
      std::move(internal), std::move(external), m.world());
  if (!candidate.validate().ok())
    return make_error(ErrorKind::NotInvertible,
                      "removal of " + c.text() +
                          " leaves an invalid microcosm");
  auto roundtrip = add(candidate, c, *placement);
  if (!roundtrip)
    return make_error(ErrorKind::NotInvertible,
                      "removal of " + c.text() +
                          " is not invertible: " + roundtrip.error().message);
  if (!roundtrip->same_knowledge(m))
    return make_error(ErrorKind::NotInvertible,
                      "re-adding " + c.text() +
                          " does not reproduce the original microcosm");
  return candidate;
}

/// M +? c: structurally M + c, but c is hypothesised rather than supplied by
/// the enclosing world, so the world is not consulted. Requires the pair to
/// have no verdict at all (strictly stronger than addition's precondition);
/// the vacuous unknown that any non-member event carries against everything
/// does not block a hypothesis — there is no knowledge in it to contradict.
/// Hypothetical additions are placed externally.
inline Result<Microcosm> add_hypothetical(const Microcosm& m,
                                          const Correspondence& c) {
  if (m.member(c.left) && m.member(c.right)) {
    OnlineEngine engine(m);
    Verdict v = engine.decide(c.left, c.right);
    if (v != Verdict::NoVerdict)
      return make_error(ErrorKind::VerdictExists,
                        "pair {" + c.left.token + ", " + c.right.token +
                            "} already has verdict " +
                            std::string(verdict_name(v)));
  }
  std::vector<Correspondence> external = m.external();
  external.push_back(c);
  if (auto viol = detail::check_m4(m.internal(), external))
    return detail::m4_error(*viol, "hypothetical addition of " + c.text());
  auto hyps = m.hypotheses();
  hyps.push_back(c);
  return Microcosm::make_unchecked(m.internal(), std::move(external),
                                   m.world(), std::move(hyps));
}

/// M<e1 < e2>: structurally M[e1 < e2] with the direction hypothesised, so
/// the world is not consulted. Requires a stored causally-related
/// correspondence on the pair.
inline Result<Microcosm> update_hypothetical(const Microcosm& m,
                                             const Correspondence& c) {
  if (c.rel != CorrRel::HappensBefore)
    throw std::invalid_argument("hypothetical update must be happens-before");
  auto stored = m.stored_cr(c.left, c.right);
  if (!stored)
    return make_error(ErrorKind::NoSuchCR,
                      "no causally-related correspondence on {" +
                          c.left.token + ", " + c.right.token + "}");
  std::vector<Correspondence> external = m.external();
  external.erase(std::remove(external.begin(), external.end(), *stored),
                 external.end());
  external.push_back(c);
  if (auto viol = detail::check_m4(m.internal(), external))
    return detail::m4_error(*viol, "hypothetical update with " + c.text());
  auto hyps = m.hypotheses();
  hyps.push_back(c);
  return Microcosm::make_unchecked(m.internal(), std::move(external),
                                   m.world(), std::move(hyps));
}

inline Result<Microcosm> apply_step(const Microcosm& m,
                                    const EvolutionStep& step) {
  switch (step.kind) {
    case EvolutionStep::Kind::Add: return add(m, step.corr, step.placement);
    case EvolutionStep::Kind::Update: return update(m, step.corr);
    case EvolutionStep::Kind::Remove: return remove(m, step.corr);
  }
  return make_error(ErrorKind::DomainError, "unknown evolution step");
}

namespace detail {

/// Weak / Up-W contract: every pair with a non-unknown verdict before the
/// evolution keeps that verdict after it.
inline void assert_weakening(const OnlineEngine& before,
                             const OnlineEngine& after, const char* what) {
  const auto& ev = before.events();
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = 0; j < ev.size(); ++j) {
      if (i == j) continue;
      Verdict old_v = before.decide(ev[i], ev[j]);
      if (old_v == Verdict::Unknown || old_v == Verdict::NoVerdict) continue;
      if (after.decide(ev[i], ev[j]) != old_v)
        throw std::logic_error(std::string(what) +
                               " contract violated on pair (" + ev[i].token +
                               ", " + ev[j].token + ")");
    }
}

}  // namespace detail

/// decide over (M + c), asserting the Strng contract (a previously unknown
/// pair now carries exactly c's relation) and the Weak contract (every other
/// non-unknown verdict is preserved). Contract failures are internal errors.
inline Result<Decision> decide_after_add(const Microcosm& m,
                                         const Correspondence& c,
                                         Placement placement,
                                         const EventId& a, const EventId& b) {
  auto evolved = add(m, c, placement);
  if (!evolved) return evolved.error();
  OnlineEngine before(m);
  OnlineEngine after(*evolved);
  if (before.decide(c.left, c.right) == Verdict::Unknown) {
    Verdict now = after.decide(c.left, c.right);
    Verdict expect = c.rel == CorrRel::HappensBefore ? Verdict::HappensBefore
                     : c.rel == CorrRel::Concurrent
                         ? Verdict::Concurrent
                         : Verdict::CausallyRelated;
    if (now != expect) throw std::logic_error("Strng contract violated");
  }
  detail::assert_weakening(before, after, "Weak");
  return after.decide_with_tree(a, b);
}

/// decide over M[e1 < e2], asserting Up-S (the updated pair now yields the
/// directed happens-before) and Up-W (every other non-unknown verdict is
/// preserved).
inline Result<Decision> decide_after_update(const Microcosm& m,
                                            const Correspondence& c,
                                            const EventId& a,
                                            const EventId& b) {
  auto evolved = update(m, c);
  if (!evolved) return evolved.error();
  OnlineEngine before(m);
  OnlineEngine after(*evolved);
  if (after.decide(c.left, c.right) != Verdict::HappensBefore)
    throw std::logic_error("Up-S contract violated");
  const auto& ev = before.events();
  // Up-W: like Weak, but the updated pair itself legitimately strengthens
  // from causally-related to happens-before.
  for (std::size_t i = 0; i < ev.size(); ++i)
    for (std::size_t j = 0; j < ev.size(); ++j) {
      if (i == j) continue;
      bool is_updated_pair = (ev[i] == c.left && ev[j] == c.right) ||
                             (ev[i] == c.right && ev[j] == c.left);
      if (is_updated_pair) continue;
      Verdict old_v = before.decide(ev[i], ev[j]);
      if (old_v == Verdict::Unknown || old_v == Verdict::NoVerdict) continue;
      if (after.decide(ev[i], ev[j]) != old_v)
        throw std::logic_error("Up-W contract violated on pair (" +
                               ev[i].token + ", " + ev[j].token + ")");
    }
  return after.decide_with_tree(a, b);
}

}  // namespace cdeduce
