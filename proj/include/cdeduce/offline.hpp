// cdeduce/offline.hpp — offline decision making: refuting relations by
// hypothetical contradiction, then concluding positives from the eliminated
// possibilities.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cdeduce/evolution.hpp"
#include "cdeduce/microcosm.hpp"
#include "cdeduce/online.hpp"
#include "cdeduce/result.hpp"

namespace cdeduce {

enum class Polarity { Asserted, Refuted };
enum class OfflineRel { Hb, Par, Cr, Unknown };

inline std::string_view offline_rel_token(OfflineRel r) {
  switch (r) {
    case OfflineRel::Hb: return "<";
    case OfflineRel::Par: return "par";
    case OfflineRel::Cr: return "cr";
    case OfflineRel::Unknown: return "?";
  }
  return "?";
}

struct OfflineFact {
  EventId a;
  EventId b;  // Hb is oriented a -> b; other relations are symmetric
  OfflineRel rel = OfflineRel::Hb;
  Polarity polarity = Polarity::Asserted;
  TreePtr provenance;  // null in possibility-set mode

  std::string line() const {
    return std::string(polarity == Polarity::Asserted ? "asserted"
                                                      : "refuted") +
           " " + a.token + " " + std::string(offline_rel_token(rel)) + " " +
           b.token;
  }
};

/// Pair-indexed fact store. Symmetric relations are canonicalized; a refuted
/// happens-before keeps its orientation (a not-< b is distinct from
/// b not-< a). No pair may carry both asserted-r and refuted-r.
class FactSet {
 public:
  struct PairFacts {
    EventId a, b;  // canonical: a.token < b.token
    TreePtr hb_ab, hb_ba, par, cr, unknown;              // asserted
    TreePtr not_hb_ab, not_hb_ba, not_par, not_cr, not_unknown;  // refuted
  };

  bool insert(const EventId& x, const EventId& y, OfflineRel rel,
              Polarity pol, TreePtr tree) {
    auto& slot = slot_for(x, y, rel, pol);
    if (slot) return false;
    slot = std::move(tree);
    if (!slot) slot = empty_marker();
    return true;
  }

  bool has(const EventId& x, const EventId& y, OfflineRel rel,
           Polarity pol) const {
    auto it = pairs_.find(key(x, y));
    if (it == pairs_.end()) return false;
    return static_cast<bool>(cslot(it->second, it->second.a == x, rel, pol));
  }

  /// Derivation for the fact as queried. Asking for a refuted symmetric
  /// relation in the orientation opposite to the stored one adds the
  /// corresponding negative symmetry step (NU-Sym, NCR-Sym, NCo-Sym).
  TreePtr tree(const EventId& x, const EventId& y, OfflineRel rel,
               Polarity pol) const {
    auto it = pairs_.find(key(x, y));
    if (it == pairs_.end()) return nullptr;
    auto t = cslot(it->second, it->second.a == x, rel, pol);
    if (t == empty_marker()) return nullptr;
    if (!t || pol != Polarity::Refuted || rel == OfflineRel::Hb) return t;
    if (t->conclusion.a == x) return t;
    Rule sym = rel == OfflineRel::Unknown ? Rule::NUSym
               : rel == OfflineRel::Cr    ? Rule::NCRSym
                                          : Rule::NCoSym;
    JudgeRel jr = rel == OfflineRel::Unknown ? JudgeRel::NotUnknown
                  : rel == OfflineRel::Cr    ? JudgeRel::NotCr
                                             : JudgeRel::NotPar;
    return make_tree(sym, {x, y, jr}, {t});
  }

  std::vector<OfflineFact> all() const {
    std::vector<OfflineFact> out;
    for (const auto& [k, p] : pairs_) {
      auto push = [&](const TreePtr& t, const EventId& a, const EventId& b,
                      OfflineRel rel, Polarity pol) {
        if (t)
          out.push_back(
              {a, b, rel, pol, t == empty_marker() ? nullptr : t});
      };
      push(p.hb_ab, p.a, p.b, OfflineRel::Hb, Polarity::Asserted);
      push(p.hb_ba, p.b, p.a, OfflineRel::Hb, Polarity::Asserted);
      push(p.par, p.a, p.b, OfflineRel::Par, Polarity::Asserted);
      push(p.cr, p.a, p.b, OfflineRel::Cr, Polarity::Asserted);
      push(p.unknown, p.a, p.b, OfflineRel::Unknown, Polarity::Asserted);
      push(p.not_hb_ab, p.a, p.b, OfflineRel::Hb, Polarity::Refuted);
      push(p.not_hb_ba, p.b, p.a, OfflineRel::Hb, Polarity::Refuted);
      push(p.not_par, p.a, p.b, OfflineRel::Par, Polarity::Refuted);
      push(p.not_cr, p.a, p.b, OfflineRel::Cr, Polarity::Refuted);
      push(p.not_unknown, p.a, p.b, OfflineRel::Unknown, Polarity::Refuted);
    }
    return out;
  }

  std::string to_lines() const {
    std::string s;
    for (const auto& f : all()) s += f.line() + "\n";
    return s;
  }

  std::map<std::pair<std::string, std::string>, PairFacts>& pairs() {
    return pairs_;
  }
  const std::map<std::pair<std::string, std::string>, PairFacts>& pairs()
      const {
    return pairs_;
  }

 private:
  static std::pair<std::string, std::string> key(const EventId& x,
                                                 const EventId& y) {
    return x.token < y.token ? std::make_pair(x.token, y.token)
                             : std::make_pair(y.token, x.token);
  }
  // Facts inserted without a derivation still need a presence marker.
  static const TreePtr& empty_marker() {
    static const TreePtr marker = std::make_shared<DerivationTree>();
    return marker;
  }
  static const TreePtr& cslot(const PairFacts& p, bool fwd, OfflineRel rel,
                              Polarity pol) {
    switch (rel) {
      case OfflineRel::Hb:
        return pol == Polarity::Asserted ? (fwd ? p.hb_ab : p.hb_ba)
                                         : (fwd ? p.not_hb_ab : p.not_hb_ba);
      case OfflineRel::Par:
        return pol == Polarity::Asserted ? p.par : p.not_par;
      case OfflineRel::Cr:
        return pol == Polarity::Asserted ? p.cr : p.not_cr;
      case OfflineRel::Unknown:
        return pol == Polarity::Asserted ? p.unknown : p.not_unknown;
    }
    return p.unknown;
  }
  TreePtr& slot_for(const EventId& x, const EventId& y, OfflineRel rel,
                    Polarity pol) {
    auto k = key(x, y);
    auto it = pairs_.find(k);
    if (it == pairs_.end()) {
      PairFacts p;
      p.a = EventId{k.first};
      p.b = EventId{k.second};
      it = pairs_.emplace(k, std::move(p)).first;
    }
    return const_cast<TreePtr&>(
        cslot(it->second, it->second.a == x, rel, pol));
  }

  std::map<std::pair<std::string, std::string>, PairFacts> pairs_;
};

/// Which of the three world possibilities remain open for a pair. Members
/// leave the set either by refutation (a contradiction eliminated them) or by
/// exclusion (an asserted relation ruled them out); only refutations give
/// rise to refuted facts.
struct PossibilitySet {
  enum class MemberState { Possible, Refuted, Excluded };
  EventId a, b;  // canonical
  MemberState ab = MemberState::Possible;   // a < b
  MemberState ba = MemberState::Possible;   // b < a
  MemberState par = MemberState::Possible;  // a par b

  bool remaining_ab() const { return ab == MemberState::Possible; }
  bool remaining_ba() const { return ba == MemberState::Possible; }
  bool remaining_par() const { return par == MemberState::Possible; }
  int remaining_count() const {
    return (remaining_ab() ? 1 : 0) + (remaining_ba() ? 1 : 0) +
           (remaining_par() ? 1 : 0);
  }
  bool inconsistent() const { return remaining_count() == 0; }
};

struct OfflineOptions {
  int depth = 1;  // hypothetical correspondences stacked per refutation
  std::size_t max_probes = 1u << 20;  // hypothesis budget for one saturation
};

enum class OfflineMode { RuleReplay, PossibilitySets };

struct OfflineResult {
  FactSet facts;
  bool complete = true;
  std::vector<PossibilitySet> possibilities;  // canonical pair order
};

struct RefutationOutcome {
  bool refuted = false;
  TreePtr tree;  // the Cntrd / Up-Cntrd derivation when refuted
  std::optional<Judgement> collision_first, collision_second;
};

namespace detail {

inline Microcosm hypothetical_add_unchecked(const Microcosm& m,
                                            const Correspondence& c) {
  auto external = m.external();
  external.push_back(c);
  auto hyps = m.hypotheses();
  hyps.push_back(c);
  return Microcosm::make_unchecked(m.internal(), std::move(external),
                                   m.world(), std::move(hyps));
}

inline Microcosm hypothetical_update_unchecked(const Microcosm& m,
                                               const Correspondence& stored,
                                               const Correspondence& c) {
  auto external = m.external();
  external.erase(std::remove(external.begin(), external.end(), stored),
                 external.end());
  external.push_back(c);
  auto hyps = m.hypotheses();
  hyps.push_back(c);
  return Microcosm::make_unchecked(m.internal(), std::move(external),
                                   m.world(), std::move(hyps));
}

struct Contradiction {
  Judgement first, second;
  TreePtr t1, t2;  // derivations at the offline judgement level
};

inline OfflineResult saturate_impl(const Microcosm& m,
                                   const OfflineOptions& opts,
                                   std::size_t& budget, OfflineMode mode);

/// Looks for a single ordered pair of events that the hypothetical store
/// judges with two distinct relations. At depth one this is a scan of the
/// initial closure; deeper searches recurse through the offline procedure of
/// the hypothetical store itself.
inline std::optional<Contradiction> probe_contradiction(
    const Microcosm& probe, int depth, const OfflineOptions& opts,
    std::size_t& budget) {
  auto closure = initial_closure_impl(probe, /*strict=*/false);
  if (!closure.consistent) {
    const auto& cf = *closure.conflict;
    auto lift = [](const TreePtr& base) {
      auto onl = make_tree(Rule::InOK, base->conclusion, {base});
      return make_tree(Rule::OnlOK, base->conclusion, {onl});
    };
    Contradiction c;
    c.first = cf.first->conclusion;
    c.second = cf.second->conclusion;
    c.t1 = lift(cf.first);
    c.t2 = lift(cf.second);
    return c;
  }
  if (depth <= 1) return std::nullopt;
  OfflineOptions sub = opts;
  sub.depth = depth - 1;
  auto result = saturate_impl(probe, sub, budget, OfflineMode::RuleReplay);
  for (const auto& [k, p] : result.facts.pairs()) {
    // Jointly unsatisfiable asserted positives on one pair. An order next to
    // a causally-related assertion is redundant, not contradictory, so the
    // clashes are: opposite orders, and concurrency against anything else.
    auto two = [](const TreePtr& t1, Judgement j1, const TreePtr& t2,
                  Judgement j2) -> std::optional<Contradiction> {
      if (t1 && t2) return Contradiction{j1, j2, t1, t2};
      return std::nullopt;
    };
    if (auto c = two(p.hb_ab, {p.a, p.b, JudgeRel::Hb}, p.hb_ba,
                     {p.b, p.a, JudgeRel::Hb}))
      return c;
    if (auto c = two(p.hb_ab, {p.a, p.b, JudgeRel::Hb}, p.par,
                     {p.a, p.b, JudgeRel::Par}))
      return c;
    if (auto c = two(p.hb_ba, {p.b, p.a, JudgeRel::Hb}, p.par,
                     {p.a, p.b, JudgeRel::Par}))
      return c;
    if (auto c = two(p.cr, {p.a, p.b, JudgeRel::Cr}, p.par,
                     {p.a, p.b, JudgeRel::Par}))
      return c;
    // An assertion and a refutation of the same relation.
    auto clash = [&](const TreePtr& pos, const TreePtr& neg, Judgement jp,
                     Judgement jn) -> std::optional<Contradiction> {
      if (pos && neg) return Contradiction{jp, jn, pos, neg};
      return std::nullopt;
    };
    if (auto c = clash(p.hb_ab, p.not_hb_ab, {p.a, p.b, JudgeRel::Hb},
                       {p.a, p.b, JudgeRel::NotHb}))
      return c;
    if (auto c = clash(p.hb_ba, p.not_hb_ba, {p.b, p.a, JudgeRel::Hb},
                       {p.b, p.a, JudgeRel::NotHb}))
      return c;
    if (auto c = clash(p.par, p.not_par, {p.a, p.b, JudgeRel::Par},
                       {p.a, p.b, JudgeRel::NotPar}))
      return c;
    if (auto c = clash(p.cr, p.not_cr, {p.a, p.b, JudgeRel::Cr},
                       {p.a, p.b, JudgeRel::NotCr}))
      return c;
  }
  return std::nullopt;
}

inline TreePtr contradiction_tree(Rule rule, const Correspondence& hyp,
                                  const Contradiction& ev,
                                  std::string side_condition) {
  JudgeRel concl = hyp.rel == CorrRel::HappensBefore  ? JudgeRel::NotHb
                   : hyp.rel == CorrRel::Concurrent   ? JudgeRel::NotPar
                                                      : JudgeRel::NotCr;
  return make_tree(rule, {hyp.left, hyp.right, concl}, {ev.t1, ev.t2},
                   {std::move(side_condition)}, hyp);
}

inline OfflineResult saturate_impl(const Microcosm& m,
                                   const OfflineOptions& opts,
                                   std::size_t& budget, OfflineMode mode) {
  OfflineResult out;
  auto closure = initial_closure_impl(m, /*strict=*/false);
  auto unknown = unknown_phase(closure);
  const auto& ev = closure.events;
  const std::size_t n = closure.n;

  auto lift = [](const TreePtr& base) {
    auto onl = make_tree(Rule::InOK, base->conclusion, {base});
    return make_tree(Rule::OnlOK, base->conclusion, {onl});
  };

  // Onl-OK: import every online verdict.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& fwd = closure.cell(i, j);
      const auto& rev = closure.cell(j, i);
      if (fwd.hb)
        out.facts.insert(ev[i], ev[j], OfflineRel::Hb, Polarity::Asserted,
                         lift(fwd.hb));
      if (rev.hb)
        out.facts.insert(ev[j], ev[i], OfflineRel::Hb, Polarity::Asserted,
                         lift(rev.hb));
      if (fwd.par)
        out.facts.insert(ev[i], ev[j], OfflineRel::Par, Polarity::Asserted,
                         lift(fwd.par));
      if (fwd.cr)
        out.facts.insert(ev[i], ev[j], OfflineRel::Cr, Polarity::Asserted,
                         lift(fwd.cr));
      if (unknown.unknown(i, j)) {
        auto t = unknown.oriented(ev, i, j);
        out.facts.insert(ev[i], ev[j], OfflineRel::Unknown, Polarity::Asserted,
                         make_tree(Rule::OnlOK, t->conclusion, {t}));
      }
    }

  // Refutation probes.
  struct ProbeRefutation {
    Correspondence hyp{EventId{}, EventId{}, CorrRel::HappensBefore};
  };
  std::vector<ProbeRefutation> refutations;
  for (std::size_t i = 0; i < n && out.complete; ++i)
    for (std::size_t j = i + 1; j < n && out.complete; ++j) {
      bool no_verdict = !closure.pair_determined(i, j) && !unknown.unknown(i, j);
      if (no_verdict) {
        const Correspondence candidates[] = {
            Correspondence::hb(ev[i], ev[j]), Correspondence::hb(ev[j], ev[i]),
            Correspondence::par(ev[i], ev[j]),
            Correspondence::cr(ev[i], ev[j])};
        for (const auto& c : candidates) {
          if (budget == 0) {
            out.complete = false;
            break;
          }
          --budget;
          auto probe = hypothetical_add_unchecked(m, c);
          if (auto contr = probe_contradiction(probe, opts.depth, opts,
                                               budget)) {
            auto tree = contradiction_tree(
                Rule::Cntrd, c, *contr,
                "no-verdict(" + c.left.token + "," + c.right.token + ")");
            out.facts.insert(c.left, c.right,
                             c.rel == CorrRel::HappensBefore ? OfflineRel::Hb
                             : c.rel == CorrRel::Concurrent  ? OfflineRel::Par
                                                             : OfflineRel::Cr,
                             Polarity::Refuted, tree);
            refutations.push_back({c});
          }
        }
      } else if (auto stored = m.stored_cr(ev[i], ev[j])) {
        const Correspondence candidates[] = {Correspondence::hb(ev[i], ev[j]),
                                             Correspondence::hb(ev[j], ev[i])};
        for (const auto& c : candidates) {
          if (budget == 0) {
            out.complete = false;
            break;
          }
          --budget;
          auto probe = hypothetical_update_unchecked(m, *stored, c);
          if (auto contr = probe_contradiction(probe, opts.depth, opts,
                                               budget)) {
            auto tree = contradiction_tree(
                Rule::UpCntrd, c, *contr,
                "stored-cr(" + c.left.token + "," + c.right.token + ")");
            out.facts.insert(c.left, c.right, OfflineRel::Hb,
                             Polarity::Refuted, tree);
            refutations.push_back({c});
          }
        }
      }
    }

  if (mode == OfflineMode::RuleReplay) {
    // Positive and negative consequences of the refutations, to fixpoint.
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [k, p] : out.facts.pairs()) {
        // Not-R: a refuted accurate relation means the pair is not unknown.
        // The conclusion keeps the premise's orientation; the flipped
        // presentation goes through NU-Sym at lookup time.
        if (!p.not_unknown && (p.not_hb_ab || p.not_hb_ba || p.not_par)) {
          TreePtr prem = p.not_hb_ab   ? p.not_hb_ab
                         : p.not_hb_ba ? p.not_hb_ba
                                       : p.not_par;
          p.not_unknown = make_tree(
              Rule::NotR,
              {prem->conclusion.a, prem->conclusion.b, JudgeRel::NotUnknown},
              {prem});
          changed = true;
        }
        // No-HBs: both directions refuted refutes causally-related.
        if (!p.not_cr && p.not_hb_ab && p.not_hb_ba) {
          p.not_cr = make_tree(Rule::NoHBs, {p.a, p.b, JudgeRel::NotCr},
                               {p.not_hb_ab, p.not_hb_ba});
          changed = true;
        }
        // Not-CR: refuted causally-related asserts concurrency.
        if (!p.par && p.not_cr) {
          p.par =
              make_tree(Rule::NotCR, {p.a, p.b, JudgeRel::Par}, {p.not_cr});
          changed = true;
        }
        // Not-Co: refuted concurrency asserts causally-related.
        if (!p.cr && p.not_par) {
          p.cr = make_tree(Rule::NotCo, {p.a, p.b, JudgeRel::Cr}, {p.not_par});
          changed = true;
        }
        // Not-HB: causally related with one direction refuted fixes the
        // other direction.
        if (!p.hb_ba && p.cr && p.not_hb_ab) {
          p.hb_ba = make_tree(Rule::NotHB, {p.b, p.a, JudgeRel::Hb},
                              {p.cr, p.not_hb_ab});
          changed = true;
        }
        if (!p.hb_ab && p.cr && p.not_hb_ba) {
          p.hb_ab = make_tree(Rule::NotHB, {p.a, p.b, JudgeRel::Hb},
                              {p.cr, p.not_hb_ba});
          changed = true;
        }
      }
    }
  }

  // Possibility sets for every pair: shrunk by assertions (exclusion) and by
  // refutations; in possibility-set mode the derived facts are then read off
  // the sets instead of replayed through the rules.
  std::map<std::pair<std::string, std::string>, PossibilitySet> table;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      PossibilitySet s;
      s.a = ev[i].token < ev[j].token ? ev[i] : ev[j];
      s.b = ev[i].token < ev[j].token ? ev[j] : ev[i];
      table[{s.a.token, s.b.token}] = s;
    }
  auto exclude = [](PossibilitySet::MemberState& st) {
    if (st == PossibilitySet::MemberState::Possible)
      st = PossibilitySet::MemberState::Excluded;
  };
  for (const auto& f : out.facts.all()) {
    auto it = table.find(f.a.token < f.b.token
                             ? std::make_pair(f.a.token, f.b.token)
                             : std::make_pair(f.b.token, f.a.token));
    if (it == table.end()) continue;
    auto& s = it->second;
    bool fwd = s.a == f.a;
    if (f.polarity == Polarity::Asserted) {
      switch (f.rel) {
        case OfflineRel::Hb:
          exclude(fwd ? s.ba : s.ab);
          exclude(s.par);
          break;
        case OfflineRel::Par:
          exclude(s.ab);
          exclude(s.ba);
          break;
        case OfflineRel::Cr: exclude(s.par); break;
        case OfflineRel::Unknown: break;
      }
    } else {
      switch (f.rel) {
        case OfflineRel::Hb:
          (fwd ? s.ab : s.ba) = PossibilitySet::MemberState::Refuted;
          break;
        case OfflineRel::Par:
          s.par = PossibilitySet::MemberState::Refuted;
          break;
        case OfflineRel::Cr:
          s.ab = PossibilitySet::MemberState::Refuted;
          s.ba = PossibilitySet::MemberState::Refuted;
          break;
        case OfflineRel::Unknown: break;
      }
    }
  }

  if (mode == OfflineMode::PossibilitySets) {
    // Read the derived facts off the set states. Mirrors the rule set:
    // refuted members become refuted facts, a refuted accurate member marks
    // the pair not-unknown, both orders refuted refutes causally-related and
    // asserts concurrency, refuted concurrency asserts causally-related, and
    // a causally-related pair with one refuted order fixes the other.
    const auto refuted = PossibilitySet::MemberState::Refuted;
    for (auto& [k, s] : table) {
      bool any_refuted = s.ab == refuted || s.ba == refuted || s.par == refuted;
      if (s.ab == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Hb, Polarity::Refuted, nullptr);
      if (s.ba == refuted)
        out.facts.insert(s.b, s.a, OfflineRel::Hb, Polarity::Refuted, nullptr);
      if (s.par == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Par, Polarity::Refuted,
                         nullptr);
      if (any_refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Unknown, Polarity::Refuted,
                         nullptr);
      if (s.ab == refuted && s.ba == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Cr, Polarity::Refuted, nullptr);
      if (s.par == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Cr, Polarity::Asserted,
                         nullptr);
      bool cr_known = out.facts.has(s.a, s.b, OfflineRel::Cr,
                                    Polarity::Asserted);
      if (cr_known && s.ab == refuted)
        out.facts.insert(s.b, s.a, OfflineRel::Hb, Polarity::Asserted,
                         nullptr);
      if (cr_known && s.ba == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Hb, Polarity::Asserted,
                         nullptr);
      if (s.ab == refuted && s.ba == refuted)
        out.facts.insert(s.a, s.b, OfflineRel::Par, Polarity::Asserted,
                         nullptr);
    }
  }

  out.possibilities.reserve(table.size());
  for (auto& [k, s] : table) out.possibilities.push_back(s);
  return out;
}

}  // namespace detail

/// Attempts to refute c by adding it hypothetically: refuted when the
/// hypothetical store judges some single pair with two distinct relations.
/// The pair must have no verdict at all for the hypothesis to be defined.
inline Result<RefutationOutcome> refute_by_addition(
    const Microcosm& m, const Correspondence& c,
    const OfflineOptions& opts = {}) {
  if (m.member(c.left) && m.member(c.right)) {
    OnlineEngine engine(m);
    Verdict v = engine.decide(c.left, c.right);
    if (v != Verdict::NoVerdict)
      return make_error(ErrorKind::HypothesisUndefined,
                        "hypothesis on {" + c.left.token + ", " +
                            c.right.token + "} is undefined: pair has verdict " +
                            std::string(verdict_name(v)));
  }
  std::size_t budget = opts.max_probes;
  auto probe = detail::hypothetical_add_unchecked(m, c);
  auto contr = detail::probe_contradiction(probe, opts.depth, opts, budget);
  RefutationOutcome out;
  if (contr) {
    out.refuted = true;
    out.tree = detail::contradiction_tree(
        Rule::Cntrd, c, *contr,
        "no-verdict(" + c.left.token + "," + c.right.token + ")");
    out.collision_first = contr->first;
    out.collision_second = contr->second;
  }
  return out;
}

/// Attempts to refute a happens-before direction by hypothetically updating
/// the pair's stored causally-related correspondence.
inline Result<RefutationOutcome> refute_by_update(
    const Microcosm& m, const Correspondence& c,
    const OfflineOptions& opts = {}) {
  if (c.rel != CorrRel::HappensBefore)
    throw std::invalid_argument("refute_by_update takes a happens-before");
  auto stored = m.stored_cr(c.left, c.right);
  if (!stored)
    return make_error(ErrorKind::HypothesisUndefined,
                      "hypothetical update on {" + c.left.token + ", " +
                          c.right.token +
                          "} is undefined: no stored causally-related "
                          "correspondence");
  std::size_t budget = opts.max_probes;
  auto probe = detail::hypothetical_update_unchecked(m, *stored, c);
  auto contr = detail::probe_contradiction(probe, opts.depth, opts, budget);
  RefutationOutcome out;
  if (contr) {
    out.refuted = true;
    out.tree = detail::contradiction_tree(
        Rule::UpCntrd, c, *contr,
        "stored-cr(" + c.left.token + "," + c.right.token + ")");
    out.collision_first = contr->first;
    out.collision_second = contr->second;
  }
  return out;
}

/// The full offline procedure: import every online verdict, probe every
/// eligible hypothesis, then close under the derived rules (or read the
/// consequences off the possibility sets). Budget exhaustion yields the
/// partial result with complete = false.
inline OfflineResult offline_saturate(const Microcosm& m,
                                      const OfflineOptions& opts = {},
                                      OfflineMode mode = OfflineMode::RuleReplay) {
  std::size_t budget = opts.max_probes;
  return detail::saturate_impl(m, opts, budget, mode);
}

}  // namespace cdeduce
