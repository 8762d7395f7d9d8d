// cdeduce/world.hpp — the ground-truth event history: a finite strict poset
// with concurrency instantiated as incomparability.

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdeduce/event.hpp"
#include "cdeduce/result.hpp"

namespace cdeduce {

/// A finite set of events with a strict partial order (irreflexive,
/// asymmetric, transitive). Two distinct events are concurrent exactly when
/// neither orders before the other, so every distinct pair satisfies exactly
/// one of a < b, b < a, a par b.
///
/// Immutable after construction; safe to share across concurrent readers.
class World {
 public:
  /// Builds a world from an event set and happens-before edges. The closure
  /// is computed here; edges may be any generating set. Fails on unknown
  /// endpoints, reflexive edges, or cycles.
  static Result<World> make(std::vector<EventId> events,
                            std::vector<std::pair<EventId, EventId>> hb) {
    World w;
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    w.events_ = std::move(events);
    for (std::size_t i = 0; i < w.events_.size(); ++i)
      w.index_[w.events_[i].token] = static_cast<int>(i);
    const std::size_t n = w.events_.size();
    w.lt_.assign(n * n, false);
    for (const auto& [a, b] : hb) {
      int i = w.find(a), j = w.find(b);
      if (i < 0 || j < 0)
        return make_error(ErrorKind::DomainError,
                          "hb edge references unknown event " +
                              (i < 0 ? a.token : b.token));
      if (i == j)
        return make_error(ErrorKind::DomainError,
                          "hb edge is reflexive on " + a.token);
      w.lt_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] =
          true;
    }
    // Transitive closure.
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (w.lt_[i * n + k])
          for (std::size_t j = 0; j < n; ++j)
            if (w.lt_[k * n + j]) w.lt_[i * n + j] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (w.lt_[i * n + i])
        return make_error(ErrorKind::DomainError,
                          "happens-before contains a cycle through " +
                              w.events_[i].token);
    return w;
  }

  const std::vector<EventId>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool contains(const EventId& e) const { return find(e) >= 0; }

  /// Whether a r b holds, for an accurate relation r.
  bool models(const EventId& a, const EventId& b, Relation r) const {
    auto [i, j] = checked_pair(a, b);
    bool ab = lt(i, j), ba = lt(j, i);
    return r == Relation::HappensBefore ? ab : (!ab && !ba);
  }

  /// Whether a r b holds when the inaccurate causally-related relation is
  /// also admitted: a cr b holds iff a < b or b < a.
  bool models_star(const EventId& a, const EventId& b, CorrRel r) const {
    switch (r) {
      case CorrRel::HappensBefore:
        return models(a, b, Relation::HappensBefore);
      case CorrRel::Concurrent:
        return models(a, b, Relation::Concurrent);
      case CorrRel::CausallyRelated: {
        auto [i, j] = checked_pair(a, b);
        return lt(i, j) || lt(j, i);
      }
    }
    return false;
  }

  bool models_star(const Correspondence& c) const {
    return contains(c.left) && contains(c.right) &&
           models_star(c.left, c.right, c.rel);
  }

  /// The unique ground-truth verdict for the ordered pair (a, b).
  Verdict verdict(const EventId& a, const EventId& b) const {
    auto [i, j] = checked_pair(a, b);
    if (lt(i, j)) return Verdict::HappensBefore;
    if (lt(j, i)) return Verdict::HappensBeforeInv;
    return Verdict::Concurrent;
  }

  /// Serializes as `event <id>` and `hb <a> <b>` lines, lexicographically
  /// ordered, keeping only the transitive reduction (the closure is
  /// recomputed on load).
  std::string to_text() const {
    std::ostringstream out;
    const std::size_t n = events_.size();
    for (const auto& e : events_) out << "event " << e.token << "\n";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!lt(i, j)) continue;
        bool redundant = false;
        for (std::size_t k = 0; k < n && !redundant; ++k)
          if (lt(i, k) && lt(k, j)) redundant = true;
        if (!redundant)
          out << "hb " << events_[i].token << " " << events_[j].token << "\n";
      }
    return out.str();
  }

  static Result<World> from_text(const std::string& text) {
    std::vector<EventId> events;
    std::vector<std::pair<EventId, EventId>> hb;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string kw;
      if (!(ls >> kw) || kw[0] == '#') continue;
      if (kw == "event") {
        std::string tok;
        if (!(ls >> tok))
          return make_error(ErrorKind::Syntax,
                            "line " + std::to_string(line_no) +
                                ": event needs an identifier");
        events.emplace_back(tok);
      } else if (kw == "hb") {
        std::string a, b;
        if (!(ls >> a >> b))
          return make_error(ErrorKind::Syntax,
                            "line " + std::to_string(line_no) +
                                ": hb needs two identifiers");
        hb.emplace_back(EventId{a}, EventId{b});
      } else {
        return make_error(ErrorKind::Syntax, "line " +
                                                 std::to_string(line_no) +
                                                 ": unknown keyword " + kw);
      }
    }
    return make(std::move(events), std::move(hb));
  }

 private:
  friend World generate_world(std::size_t, double, std::uint64_t);

  int find(const EventId& e) const {
    auto it = index_.find(e.token);
    return it == index_.end() ? -1 : it->second;
  }
  bool lt(std::size_t i, std::size_t j) const {
    return lt_[i * events_.size() + j];
  }
  std::pair<std::size_t, std::size_t> checked_pair(const EventId& a,
                                                   const EventId& b) const {
    int i = find(a), j = find(b);
    if (i < 0) throw std::invalid_argument("unknown event " + a.token);
    if (j < 0) throw std::invalid_argument("unknown event " + b.token);
    if (i == j) throw std::invalid_argument("reflexive query on " + a.token);
    return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
  }

  std::vector<EventId> events_;
  std::unordered_map<std::string, int> index_;
  std::vector<bool> lt_;  // row-major closure
};

using WorldPtr = std::shared_ptr<const World>;

/// A random world over n events named e1..en: the transitive closure of a
/// random DAG with the given edge probability. Deterministic per seed;
/// density 1.0 yields a total chain.
inline World generate_world(std::size_t n, double density,
                            std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_world needs n >= 1");
  if (density < 0.0 || density > 1.0)
    throw std::invalid_argument("density must lie in [0, 1]");
  std::vector<EventId> events;
  events.reserve(n);
  for (std::size_t i = 1; i <= n; ++i)
    events.emplace_back("e" + std::to_string(i));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<EventId, EventId>> hb;
  // Edges only run from lower index to higher, so the result is acyclic by
  // construction.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) < density) hb.emplace_back(events[i], events[j]);
  auto r = World::make(std::move(events), std::move(hb));
  return std::move(r).value();
}

inline WorldPtr share(World w) {
  return std::make_shared<const World>(std::move(w));
}

}  // namespace cdeduce
