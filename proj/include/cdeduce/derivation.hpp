// cdeduce/derivation.hpp — proof objects: which rule concluded what, from
// which premises, under which recorded side conditions.

#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cdeduce/event.hpp"

namespace cdeduce {

enum class Rule {
  // initial judgements
  Init,
  InTr,
  CoSym,
  CRSym,
  // online decision making
  InOK,
  UnSym,
  Un1,
  Un2,
  Un3,
  Un4,
  Strng,
  Weak,
  UpS,
  UpW,
  // offline decision making
  OnlOK,
  NotR,
  NotCR,
  NotCo,
  Cntrd,
  UpCntrd,
  NotHB,
  NoHBs,
  NUSym,
  NCRSym,
  NCoSym,
};

inline std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::Init: return "Init";
    case Rule::InTr: return "In-Tr";
    case Rule::CoSym: return "Co-Sym";
    case Rule::CRSym: return "CR-Sym";
    case Rule::InOK: return "In-OK";
    case Rule::UnSym: return "Un-Sym";
    case Rule::Un1: return "Un-1";
    case Rule::Un2: return "Un-2";
    case Rule::Un3: return "Un-3";
    case Rule::Un4: return "Un-4";
    case Rule::Strng: return "Strng";
    case Rule::Weak: return "Weak";
    case Rule::UpS: return "Up-S";
    case Rule::UpW: return "Up-W";
    case Rule::OnlOK: return "Onl-OK";
    case Rule::NotR: return "Not-R";
    case Rule::NotCR: return "Not-CR";
    case Rule::NotCo: return "Not-Co";
    case Rule::Cntrd: return "Cntrd";
    case Rule::UpCntrd: return "Up-Cntrd";
    case Rule::NotHB: return "Not-HB";
    case Rule::NoHBs: return "No-HBs";
    case Rule::NUSym: return "NU-Sym";
    case Rule::NCRSym: return "NCR-Sym";
    case Rule::NCoSym: return "NCo-Sym";
  }
  return "?";
}

/// Relation symbol of a judgement conclusion. Hb is oriented a -> b; the
/// refuted forms carry the same orientation convention (NotHb at (a, b) reads
/// "a does not happen before b").
enum class JudgeRel { Hb, Par, Cr, Unknown, NotHb, NotPar, NotCr, NotUnknown };

inline std::string_view judge_token(JudgeRel r) {
  switch (r) {
    case JudgeRel::Hb: return "<";
    case JudgeRel::Par: return "par";
    case JudgeRel::Cr: return "cr";
    case JudgeRel::Unknown: return "?";
    case JudgeRel::NotHb: return "not-<";
    case JudgeRel::NotPar: return "not-par";
    case JudgeRel::NotCr: return "not-cr";
    case JudgeRel::NotUnknown: return "not-?";
  }
  return "?";
}

struct Judgement {
  EventId a;
  EventId b;
  JudgeRel rel = JudgeRel::Unknown;

  std::string text() const {
    return a.token + " " + std::string(judge_token(rel)) + " " + b.token;
  }
  auto operator<=>(const Judgement&) const = default;
};

struct DerivationTree;
using TreePtr = std::shared_ptr<const DerivationTree>;

struct DerivationTree {
  Rule rule = Rule::Init;
  Judgement conclusion;
  std::vector<TreePtr> premises;
  // Non-derivability checks the rule depended on, rendered as text,
  // e.g. "no-initial(e1,e3)".
  std::vector<std::string> side_conditions;
  // For Cntrd / Up-Cntrd nodes: the hypothesised correspondence.
  std::optional<Correspondence> hypothesis;
};

inline TreePtr make_tree(Rule r, Judgement c, std::vector<TreePtr> premises = {},
                         std::vector<std::string> side = {},
                         std::optional<Correspondence> hyp = std::nullopt) {
  auto t = std::make_shared<DerivationTree>();
  t->rule = r;
  t->conclusion = std::move(c);
  t->premises = std::move(premises);
  t->side_conditions = std::move(side);
  t->hypothesis = std::move(hyp);
  return t;
}

/// A conclusion read back as a correspondence, when it states one.
/// Unknown and refuted conclusions are not correspondences.
inline std::optional<Correspondence> judgement_correspondence(
    const Judgement& j) {
  switch (j.rel) {
    case JudgeRel::Hb: return Correspondence::hb(j.a, j.b);
    case JudgeRel::Par: return Correspondence::par(j.a, j.b);
    case JudgeRel::Cr: return Correspondence::cr(j.a, j.b);
    default: return std::nullopt;
  }
}

/// Whether c appears in the derivation: as the conclusion of the root or of
/// any premise subtree.
inline bool tree_contains(const DerivationTree& t, const Correspondence& c) {
  if (auto cc = judgement_correspondence(t.conclusion); cc && *cc == c)
    return true;
  for (const auto& p : t.premises)
    if (p && tree_contains(*p, c)) return true;
  return false;
}

/// Collects every rule used anywhere in the derivation.
inline void collect_rules(const DerivationTree& t, std::vector<Rule>& out) {
  out.push_back(t.rule);
  for (const auto& p : t.premises)
    if (p) collect_rules(*p, out);
}

inline bool tree_uses_rule(const DerivationTree& t, Rule r) {
  if (t.rule == r) return true;
  for (const auto& p : t.premises)
    if (p && tree_uses_rule(*p, r)) return true;
  return false;
}

/// One node per line, `<rule-name>: <a> <rel> <b>`, premises indented two
/// spaces, left to right.
inline void render_trace(std::ostream& out, const DerivationTree& t,
                         int indent = 0) {
  for (int i = 0; i < indent; ++i) out << ' ';
  out << rule_name(t.rule) << ": " << t.conclusion.text() << "\n";
  for (const auto& p : t.premises)
    if (p) render_trace(out, *p, indent + 2);
}

inline std::string trace_string(const DerivationTree& t) {
  std::ostringstream out;
  render_trace(out, t);
  return out.str();
}

}  // namespace cdeduce
