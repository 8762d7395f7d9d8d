// cdeduce/microcosm.hpp — the partial-knowledge store: an internal event
// chain plus a set of external correspondences, with validity checking.

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cdeduce/event.hpp"
#include "cdeduce/result.hpp"
#include "cdeduce/world.hpp"

namespace cdeduce {

enum class Placement { Internal, External };

inline std::string_view placement_token(Placement p) {
  return p == Placement::Internal ? "int" : "ext";
}

/// One step of microcosm evolution. Update payloads are always directed
/// happens-before; Add carries the placement of the new correspondence.
struct EvolutionStep {
  enum class Kind { Add, Update, Remove };
  Kind kind = Kind::Add;
  Correspondence corr{EventId{}, EventId{}, CorrRel::HappensBefore};
  Placement placement = Placement::External;
};

struct Violation {
  enum class Cond { M1, M2, M3, M4, DuplicatePair };
  Cond cond = Cond::M4;
  std::string detail;
  std::optional<Correspondence> corr;
  std::vector<EventId> chain;

  std::string to_string() const {
    std::string name;
    switch (cond) {
      case Cond::M1: name = "M1"; break;
      case Cond::M2: name = "M2"; break;
      case Cond::M3: name = "M3"; break;
      case Cond::M4: name = "M4"; break;
      case Cond::DuplicatePair: name = "duplicate"; break;
    }
    std::string s = name + ": " + detail;
    if (!chain.empty()) {
      s += " [chain";
      for (const auto& e : chain) s += " " + e.token;
      s += "]";
    }
    return s;
  }
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    if (ok()) return "ok";
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v.to_string();
    }
    return s;
  }
};

namespace detail {

/// Directed happens-before fact edges: consecutive internal chain pairs plus
/// external happens-before correspondences. `skip` omits one external
/// correspondence (the one under scrutiny, which must not witness its own
/// chain).
inline std::vector<std::pair<EventId, EventId>> hb_fact_edges(
    const std::vector<EventId>& internal,
    const std::vector<Correspondence>& external,
    const Correspondence* skip = nullptr) {
  std::vector<std::pair<EventId, EventId>> edges;
  for (std::size_t i = 0; i + 1 < internal.size(); ++i)
    edges.emplace_back(internal[i], internal[i + 1]);
  for (const auto& c : external) {
    if (c.rel != CorrRel::HappensBefore) continue;
    if (skip && c == *skip) continue;
    edges.emplace_back(c.left, c.right);
  }
  return edges;
}

/// BFS over fact edges; returns the event path from -> to when one exists.
inline std::optional<std::vector<EventId>> hb_path(
    const std::vector<std::pair<EventId, EventId>>& edges, const EventId& from,
    const EventId& to) {
  std::vector<EventId> frontier{from};
  std::vector<EventId> seen{from};
  std::vector<std::pair<EventId, EventId>> parent;  // (node, predecessor)
  while (!frontier.empty()) {
    std::vector<EventId> next;
    for (const auto& u : frontier) {
      for (const auto& [a, b] : edges) {
        if (!(a == u)) continue;
        if (std::find(seen.begin(), seen.end(), b) != seen.end()) continue;
        seen.push_back(b);
        parent.emplace_back(b, u);
        if (b == to) {
          std::vector<EventId> path{to};
          EventId cur = to;
          while (!(cur == from)) {
            for (const auto& [node, pred] : parent)
              if (node == cur) {
                cur = pred;
                break;
              }
            path.push_back(cur);
          }
          std::reverse(path.begin(), path.end());
          return path;
        }
        next.push_back(b);
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

/// First correspondence whose endpoints are connected by a happens-before
/// chain built from the store's other facts, if any.
inline std::optional<Violation> check_m4(
    const std::vector<EventId>& internal,
    const std::vector<Correspondence>& external) {
  for (const auto& c : external) {
    auto edges = hb_fact_edges(internal, external, &c);
    auto path = hb_path(edges, c.left, c.right);
    if (!path) path = hb_path(edges, c.right, c.left);
    if (path) {
      Violation v;
      v.cond = Violation::Cond::M4;
      v.detail = "correspondence " + c.text() +
                 " has a happens-before chain between its endpoints";
      v.corr = c;
      v.chain = *path;
      return v;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// A device's partial causal knowledge: a finite internal chain I of events
/// (ascending in happens-before) and a finite set E of external
/// correspondences, optionally tied to an enclosing world.
///
/// Values are immutable; every evolution operator returns a fresh value, so
/// transition systems can branch from one microcosm without interference.
class Microcosm {
 public:
  Microcosm() = default;

  static Microcosm empty(WorldPtr world = {}) {
    Microcosm m;
    m.world_ = std::move(world);
    return m;
  }

  /// Validating constructor.
  static Result<Microcosm> make(std::vector<EventId> internal_chain,
                                std::vector<Correspondence> external,
                                WorldPtr world = {}) {
    Microcosm m = make_unchecked(std::move(internal_chain),
                                 std::move(external), std::move(world));
    auto report = m.validate();
    if (!report.ok())
      return make_error(ErrorKind::DomainError,
                        "invalid microcosm: " + report.to_string());
    return m;
  }

  /// Constructs without validation. For tests, tooling, and hypothetical
  /// probes that deliberately build stores validate() would reject.
  static Microcosm make_unchecked(std::vector<EventId> internal_chain,
                                  std::vector<Correspondence> external,
                                  WorldPtr world = {},
                                  std::vector<Correspondence> hypotheses = {}) {
    Microcosm m;
    m.internal_ = std::move(internal_chain);
    m.external_ = std::move(external);
    std::sort(m.external_.begin(), m.external_.end());
    m.external_.erase(std::unique(m.external_.begin(), m.external_.end()),
                      m.external_.end());
    m.world_ = std::move(world);
    m.hypotheses_ = std::move(hypotheses);
    return m;
  }

  const std::vector<EventId>& internal() const { return internal_; }
  const std::vector<Correspondence>& external() const { return external_; }
  const WorldPtr& world() const { return world_; }
  bool world_backed() const { return static_cast<bool>(world_); }

  /// Hypothesised correspondences this value was built under (empty for
  /// ordinary microcosms); kept for trace rendering only.
  const std::vector<Correspondence>& hypotheses() const { return hypotheses_; }

  bool member(const EventId& e) const {
    if (std::find(internal_.begin(), internal_.end(), e) != internal_.end())
      return true;
    for (const auto& c : external_)
      if (c.involves(e)) return true;
    return false;
  }

  /// All events known to the microcosm, sorted.
  std::vector<EventId> events() const {
    std::vector<EventId> out = internal_;
    for (const auto& c : external_) {
      out.push_back(c.left);
      out.push_back(c.right);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<std::pair<EventId, EventId>> hb_facts() const {
    return detail::hb_fact_edges(internal_, external_);
  }

  /// Stored correspondences with their placements: consecutive internal chain
  /// edges count as internal happens-before facts.
  std::vector<std::pair<Correspondence, Placement>> correspondences() const {
    std::vector<std::pair<Correspondence, Placement>> out;
    for (std::size_t i = 0; i + 1 < internal_.size(); ++i)
      out.emplace_back(Correspondence::hb(internal_[i], internal_[i + 1]),
                       Placement::Internal);
    for (const auto& c : external_) out.emplace_back(c, Placement::External);
    return out;
  }

  /// |E| plus the internal chain's edge count. Addition grows this by exactly
  /// one, update preserves it, removal shrinks it by exactly one.
  std::size_t correspondence_count() const {
    return external_.size() + (internal_.size() >= 1 ? internal_.size() - 1 : 0);
  }

  std::optional<Correspondence> stored_cr(const EventId& a,
                                          const EventId& b) const {
    for (const auto& c : external_)
      if (c.rel == CorrRel::CausallyRelated && c.same_pair(a, b)) return c;
    return std::nullopt;
  }

  /// Same internal chain, external set, and enclosing world.
  bool same_knowledge(const Microcosm& o) const {
    return internal_ == o.internal_ && external_ == o.external_ &&
           world_ == o.world_;
  }

  /// Checks the microcosm conditions:
  ///   M1  internal events exist in the enclosing world (when tied to one),
  ///   M2  the internal sequence is a strict chain the world agrees with,
  ///   M3  every external correspondence is modelled by the world,
  ///   M4  no correspondence has a happens-before chain between its endpoints
  ///       built from the store's other facts,
  /// plus: no two stored correspondences on the same unordered pair.
  ValidationReport validate() const {
    ValidationReport report;
    // M2: strict chain — no repeated events.
    for (std::size_t i = 0; i < internal_.size(); ++i)
      for (std::size_t j = i + 1; j < internal_.size(); ++j)
        if (internal_[i] == internal_[j])
          report.violations.push_back(
              {Violation::Cond::M2,
               "internal chain repeats " + internal_[i].token,
               std::nullopt,
               {}});
    if (world_) {
      for (const auto& e : internal_)
        if (!world_->contains(e))
          report.violations.push_back({Violation::Cond::M1,
                                       "internal event " + e.token +
                                           " is not in the enclosing world",
                                       std::nullopt,
                                       {}});
      for (std::size_t i = 0; i + 1 < internal_.size(); ++i) {
        const auto& a = internal_[i];
        const auto& b = internal_[i + 1];
        if (world_->contains(a) && world_->contains(b) && !(a == b) &&
            !world_->models(a, b, Relation::HappensBefore))
          report.violations.push_back(
              {Violation::Cond::M2,
               "chain step " + a.token + " < " + b.token +
                   " does not hold in the enclosing world",
               std::nullopt,
               {}});
      }
      for (const auto& c : external_)
        if (!world_->contains(c.left) || !world_->contains(c.right) ||
            !world_->models_star(c))
          report.violations.push_back({Violation::Cond::M3,
                                       "external correspondence " + c.text() +
                                           " is not modelled by the world",
                                       c,
                                       {}});
    }
    // Duplicate unordered pairs across stored facts.
    auto all = correspondences();
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (all[i].first.same_pair(all[j].first))
          report.violations.push_back(
              {Violation::Cond::DuplicatePair,
               "pair {" + all[i].first.left.token + ", " +
                   all[i].first.right.token + "} is stored twice",
               all[j].first,
               {}});
    if (auto m4 = detail::check_m4(internal_, external_))
      report.violations.push_back(*m4);
    return report;
  }

  std::string text() const {
    std::ostringstream out;
    out << "internal:";
    for (const auto& e : internal_) out << " " << e.token;
    out << " external:";
    for (const auto& c : external_) out << " {" << c.text() << "}";
    return out.str();
  }

 private:
  std::vector<EventId> internal_;
  std::vector<Correspondence> external_;  // canonical, sorted, unique
  WorldPtr world_;
  std::vector<Correspondence> hypotheses_;
};

}  // namespace cdeduce
