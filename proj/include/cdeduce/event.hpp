// cdeduce/event.hpp — event identifiers, relation vocabularies, correspondences.

#pragma once

#include <compare>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace cdeduce {

/// Opaque event identifier. Two events are the same iff their tokens are equal.
struct EventId {
  std::string token;

  EventId() = default;
  explicit EventId(std::string t) : token(std::move(t)) {}

  auto operator<=>(const EventId&) const = default;
};

inline namespace literals {
inline EventId operator""_ev(const char* s, std::size_t n) {
  return EventId{std::string(s, n)};
}
}  // namespace literals

/// The accurate relations.
enum class Relation { HappensBefore, Concurrent };

/// Relations a stored correspondence may carry: the accurate ones plus
/// is-causally-related-to ("one happened before the other, direction unknown
/// to the holder").
enum class CorrRel { HappensBefore, Concurrent, CausallyRelated };

/// Outcome of deciding an ordered pair (a, b).
///
/// HappensBeforeInv presents a happens-before judgement stored in the
/// opposite orientation. Unknown is the derived judgement a ? b. NoVerdict
/// means no rule derives any judgement for the pair at all — a distinct,
/// weaker outcome than Unknown.
enum class Verdict {
  HappensBefore,
  HappensBeforeInv,
  Concurrent,
  CausallyRelated,
  Unknown,
  NoVerdict,
};

inline std::string_view rel_token(CorrRel r) {
  switch (r) {
    case CorrRel::HappensBefore: return "<";
    case CorrRel::Concurrent: return "par";
    case CorrRel::CausallyRelated: return "cr";
  }
  return "?";
}

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::HappensBefore: return "hb";
    case Verdict::HappensBeforeInv: return "hb-inv";
    case Verdict::Concurrent: return "par";
    case Verdict::CausallyRelated: return "cr";
    case Verdict::Unknown: return "unknown";
    case Verdict::NoVerdict: return "none";
  }
  return "none";
}

/// Renders a verdict for the ordered query (a, b), e.g. "e1 < e2" or "none".
inline std::string verdict_text(Verdict v, const EventId& a, const EventId& b) {
  switch (v) {
    case Verdict::HappensBefore: return a.token + " < " + b.token;
    case Verdict::HappensBeforeInv: return b.token + " < " + a.token;
    case Verdict::Concurrent: return a.token + " par " + b.token;
    case Verdict::CausallyRelated: return a.token + " cr " + b.token;
    case Verdict::Unknown: return a.token + " ? " + b.token;
    case Verdict::NoVerdict: return "none";
  }
  return "none";
}

/// A relational fact between two distinct events.
///
/// Concurrent and causally-related correspondences are symmetric and are kept
/// in canonical form (left token below right token), so set membership is
/// order-insensitive. Happens-before is directional and never canonicalized.
/// Construct via the factories; they reject reflexive pairs.
struct Correspondence {
  EventId left;
  EventId right;
  CorrRel rel = CorrRel::HappensBefore;

  static Correspondence make(EventId a, EventId b, CorrRel r) {
    if (a == b)
      throw std::invalid_argument("correspondence is irreflexive: " + a.token);
    if (r != CorrRel::HappensBefore && b < a) std::swap(a, b);
    return Correspondence{std::move(a), std::move(b), r};
  }
  static Correspondence hb(EventId a, EventId b) {
    return make(std::move(a), std::move(b), CorrRel::HappensBefore);
  }
  static Correspondence par(EventId a, EventId b) {
    return make(std::move(a), std::move(b), CorrRel::Concurrent);
  }
  static Correspondence cr(EventId a, EventId b) {
    return make(std::move(a), std::move(b), CorrRel::CausallyRelated);
  }

  bool involves(const EventId& e) const { return left == e || right == e; }

  /// True when this correspondence is over the unordered pair {a, b}.
  bool same_pair(const EventId& a, const EventId& b) const {
    return (left == a && right == b) || (left == b && right == a);
  }
  bool same_pair(const Correspondence& o) const {
    return same_pair(o.left, o.right);
  }

  bool directional() const { return rel == CorrRel::HappensBefore; }

  std::string text() const {
    return left.token + " " + std::string(rel_token(rel)) + " " + right.token;
  }

  auto operator<=>(const Correspondence&) const = default;
};

}  // namespace cdeduce

template <>
struct std::hash<cdeduce::EventId> {
  std::size_t operator()(const cdeduce::EventId& e) const noexcept {
    return std::hash<std::string>{}(e.token);
  }
};
