// cdeduce/online.hpp — initial judgements and the online decision procedure,
// with derivation traces and the quadratic memoisation matrix.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdeduce/derivation.hpp"
#include "cdeduce/event.hpp"
#include "cdeduce/microcosm.hpp"

namespace cdeduce {

namespace detail {

/// Saturation of the initial judgement rules (Init, In-Tr, Co-Sym, CR-Sym)
/// over a microcosm's stored facts.
///
/// Cells are per ordered pair; symmetric relations are materialised in both
/// orientations with explicit symmetry steps in their trees. In lenient mode
/// a pair may end up with two distinct relations (used when probing
/// hypothetical stores); strict mode treats that as an internal error, since
/// validity checking must have rejected such a store.
struct ClosureResult {
  struct Cell {
    TreePtr hb;  // at (i, j): ev[i] < ev[j]
    TreePtr par;
    TreePtr cr;
    bool any() const { return hb || par || cr; }
    int count() const { return (hb ? 1 : 0) + (par ? 1 : 0) + (cr ? 1 : 0); }
  };
  struct Conflict {
    std::size_t i = 0, j = 0;
    TreePtr first;
    TreePtr second;
  };

  std::vector<EventId> events;  // sorted
  std::size_t n = 0;
  std::vector<Cell> cells;  // row-major n*n
  bool consistent = true;
  std::optional<Conflict> conflict;

  int find(const EventId& e) const {
    auto it = std::lower_bound(events.begin(), events.end(), e);
    if (it == events.end() || !(*it == e)) return -1;
    return static_cast<int>(it - events.begin());
  }
  const Cell& cell(std::size_t i, std::size_t j) const {
    return cells[i * n + j];
  }
  Cell& cell(std::size_t i, std::size_t j) { return cells[i * n + j]; }
  bool pair_determined(std::size_t i, std::size_t j) const {
    return cell(i, j).any() || cell(j, i).any();
  }
};

inline ClosureResult initial_closure_impl(const Microcosm& m, bool strict) {
  ClosureResult r;
  r.events = m.events();
  r.n = r.events.size();
  r.cells.assign(r.n * r.n, {});

  auto idx = [&](const EventId& e) {
    return static_cast<std::size_t>(r.find(e));
  };

  // Init: internal chain pairs. Any ordered pair of the chain is stored
  // knowledge, not a derived fact.
  const auto& chain = m.internal();
  for (std::size_t p = 0; p < chain.size(); ++p)
    for (std::size_t q = p + 1; q < chain.size(); ++q) {
      auto& c = r.cell(idx(chain[p]), idx(chain[q]));
      if (!c.hb)
        c.hb = make_tree(Rule::Init, {chain[p], chain[q], JudgeRel::Hb});
    }
  // Init: external correspondences, with symmetry rules materialising the
  // reversed orientation for the symmetric relations.
  for (const auto& c : m.external()) {
    std::size_t i = idx(c.left), j = idx(c.right);
    switch (c.rel) {
      case CorrRel::HappensBefore: {
        auto& cc = r.cell(i, j);
        if (!cc.hb)
          cc.hb = make_tree(Rule::Init, {c.left, c.right, JudgeRel::Hb});
        break;
      }
      case CorrRel::Concurrent: {
        auto fwd = make_tree(Rule::Init, {c.left, c.right, JudgeRel::Par});
        if (!r.cell(i, j).par) r.cell(i, j).par = fwd;
        if (!r.cell(j, i).par)
          r.cell(j, i).par =
              make_tree(Rule::CoSym, {c.right, c.left, JudgeRel::Par}, {fwd});
        break;
      }
      case CorrRel::CausallyRelated: {
        auto fwd = make_tree(Rule::Init, {c.left, c.right, JudgeRel::Cr});
        if (!r.cell(i, j).cr) r.cell(i, j).cr = fwd;
        if (!r.cell(j, i).cr)
          r.cell(j, i).cr =
              make_tree(Rule::CRSym, {c.right, c.left, JudgeRel::Cr}, {fwd});
        break;
      }
    }
  }

  // In-Tr saturation over happens-before, deterministic scan order.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < r.n; ++i)
      for (std::size_t j = 0; j < r.n; ++j) {
        if (i == j || r.cell(i, j).hb) continue;
        for (std::size_t k = 0; k < r.n; ++k) {
          if (k == i || k == j) continue;
          if (r.cell(i, k).hb && r.cell(k, j).hb) {
            r.cell(i, j).hb =
                make_tree(Rule::InTr, {r.events[i], r.events[j], JudgeRel::Hb},
                          {r.cell(i, k).hb, r.cell(k, j).hb});
            changed = true;
            break;
          }
        }
      }
  }
  // Conflict scan. In strict mode any doubly-related pair or cycle is an
  // internal error (validity checking must have rejected the store). In
  // lenient mode — used on hypothetical stores — only jointly unsatisfiable
  // combinations count as a contradiction: concurrency against an order or
  // against causally-related, and the two opposite orders. An order derived
  // on top of a stored causally-related fact is redundant knowledge, not a
  // contradiction; it is the illegal-evolution guard's business, never a
  // refutation.
  for (std::size_t i = 0; i < r.n && r.consistent; ++i)
    for (std::size_t j = 0; j < r.n && r.consistent; ++j) {
      if (i == j) continue;
      const auto& c = r.cell(i, j);
      const auto& rev = r.cell(j, i);
      if (strict) {
        if (c.count() >= 2)
          throw std::logic_error("InconsistentClosure: pair (" +
                                 r.events[i].token + ", " + r.events[j].token +
                                 ") carries two relations");
        if (c.hb && rev.hb)
          throw std::logic_error(
              "InconsistentClosure: happens-before cycle through " +
              r.events[i].token);
        continue;
      }
      ClosureResult::Conflict cf;
      cf.i = i;
      cf.j = j;
      if (c.par && (c.hb || c.cr)) {
        cf.first = c.hb ? c.hb : c.cr;
        cf.second = c.par;
      } else if (i < j && c.hb && rev.hb) {
        cf.first = c.hb;
        cf.second = rev.hb;
      } else {
        continue;
      }
      r.consistent = false;
      r.conflict = cf;
    }
  return r;
}

/// The unknown-judgement phase over pairs the initial closure leaves open.
///
/// Computed as a stratified least fixpoint: Un-3 and Un-1 (with a shared
/// concurrent or causally-related link) seed the set, then Un-2 and Un-1 with
/// unknown links iterate to saturation. Un-3's no-intermediate condition is
/// evaluated against initial-closure links. Side conditions of the form
/// "no initial judgement on the pair" are checked in both orientations.
struct UnknownPhase {
  struct Entry {
    bool unknown = false;
    std::size_t a = 0, b = 0;  // tree orientation: concludes ev[a] ? ev[b]
    TreePtr tree;
  };
  std::size_t n = 0;
  std::vector<Entry> entries;  // indexed by unordered pair i < j

  std::size_t key(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n + j;
  }
  bool unknown(std::size_t i, std::size_t j) const {
    return entries[key(i, j)].unknown;
  }
  /// Tree concluding ev[i] ? ev[j], adding an Un-Sym step when the stored
  /// orientation is the other way.
  TreePtr oriented(const std::vector<EventId>& ev, std::size_t i,
                   std::size_t j) const {
    const Entry& e = entries[key(i, j)];
    if (!e.unknown) return nullptr;
    if (e.a == i) return e.tree;
    return make_tree(Rule::UnSym, {ev[i], ev[j], JudgeRel::Unknown}, {e.tree});
  }
};

inline UnknownPhase unknown_phase(const ClosureResult& cl) {
  UnknownPhase up;
  up.n = cl.n;
  up.entries.assign(cl.n * cl.n, {});
  const auto& ev = cl.events;

  auto no_initial = [&](std::size_t i, std::size_t j) {
    return "no-initial(" + ev[i].token + "," + ev[j].token + ")";
  };
  auto set = [&](std::size_t i, std::size_t j, TreePtr t) {
    auto& e = up.entries[up.key(i, j)];
    e.unknown = true;
    e.a = i;
    e.b = j;
    e.tree = std::move(t);
  };
  // A positively related link usable as Un-2's first premise; the In-OK
  // wrapper cites the underlying initial judgement in its stored orientation.
  auto positive_link = [&](std::size_t i, std::size_t x) -> TreePtr {
    const auto& fwd = cl.cell(i, x);
    const auto& rev = cl.cell(x, i);
    TreePtr base;
    if (fwd.hb) base = fwd.hb;
    else if (fwd.par) base = fwd.par;
    else if (fwd.cr) base = fwd.cr;
    else if (rev.hb) base = rev.hb;
    if (!base) return nullptr;
    return make_tree(Rule::InOK, base->conclusion, {base});
  };

  // Seeds.
  for (std::size_t i = 0; i < cl.n; ++i)
    for (std::size_t j = i + 1; j < cl.n; ++j) {
      if (cl.pair_determined(i, j)) continue;
      TreePtr seed;
      // Un-1 with the same symmetric relation on both links.
      for (std::size_t x = 0; x < cl.n && !seed; ++x) {
        if (x == i || x == j) continue;
        if (cl.cell(i, x).par && cl.cell(x, j).par)
          seed = make_tree(
              Rule::Un1, {ev[i], ev[j], JudgeRel::Unknown},
              {make_tree(Rule::InOK, cl.cell(i, x).par->conclusion,
                         {cl.cell(i, x).par}),
               make_tree(Rule::InOK, cl.cell(x, j).par->conclusion,
                         {cl.cell(x, j).par})},
              {no_initial(i, j)});
        else if (cl.cell(i, x).cr && cl.cell(x, j).cr)
          seed = make_tree(
              Rule::Un1, {ev[i], ev[j], JudgeRel::Unknown},
              {make_tree(Rule::InOK, cl.cell(i, x).cr->conclusion,
                         {cl.cell(i, x).cr}),
               make_tree(Rule::InOK, cl.cell(x, j).cr->conclusion,
                         {cl.cell(x, j).cr})},
              {no_initial(i, j)});
      }
      if (!seed) {
        bool has_intermediate = false;
        for (std::size_t x = 0; x < cl.n && !has_intermediate; ++x) {
          if (x == i || x == j) continue;
          if (cl.pair_determined(i, x) && cl.pair_determined(x, j))
            has_intermediate = true;
        }
        if (!has_intermediate)
          seed = make_tree(Rule::Un3, {ev[i], ev[j], JudgeRel::Unknown}, {},
                           {no_initial(i, j),
                            "no-intermediate(" + ev[i].token + "," +
                                ev[j].token + ")"});
      }
      if (seed) set(i, j, std::move(seed));
    }

  // Fixpoint: Un-2 and Un-1 through unknown links.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < cl.n; ++i)
      for (std::size_t j = i + 1; j < cl.n; ++j) {
        if (cl.pair_determined(i, j) || up.unknown(i, j)) continue;
        TreePtr derived;
        for (std::size_t x = 0; x < cl.n && !derived; ++x) {
          if (x == i || x == j) continue;
          if (up.unknown(x, j)) {
            if (auto link = positive_link(i, x))
              derived = make_tree(Rule::Un2, {ev[i], ev[j], JudgeRel::Unknown},
                                  {link, up.oriented(ev, x, j)},
                                  {no_initial(i, j)});
          }
          if (!derived && up.unknown(x, i)) {
            if (auto link = positive_link(j, x))
              derived = make_tree(Rule::Un2, {ev[j], ev[i], JudgeRel::Unknown},
                                  {link, up.oriented(ev, x, i)},
                                  {no_initial(j, i)});
          }
          if (!derived && up.unknown(i, x) && up.unknown(x, j))
            derived = make_tree(
                Rule::Un1, {ev[i], ev[j], JudgeRel::Unknown},
                {up.oriented(ev, i, x), up.oriented(ev, x, j)},
                {no_initial(i, j)});
        }
        if (derived) {
          std::size_t a = derived->conclusion.a == ev[i] ? i : j;
          std::size_t b = a == i ? j : i;
          auto& e = up.entries[up.key(i, j)];
          e.unknown = true;
          e.a = a;
          e.b = b;
          e.tree = std::move(derived);
          changed = true;
        }
      }
  }
  return up;
}

}  // namespace detail

/// The memoisation table: one cell per ordered pair of events known to the
/// microcosm, holding the decided verdict, its provenance, and a derivation.
/// Symmetric cells agree up to relation inversion, and no cell ever holds two
/// verdicts.
class DecisionMatrix {
 public:
  enum class Source { None, InitialClosure, UnknownRule };
  struct Cell {
    Verdict verdict = Verdict::NoVerdict;
    Source source = Source::None;
    TreePtr tree;
  };

  DecisionMatrix() = default;
  DecisionMatrix(std::vector<EventId> events)
      : events_(std::move(events)), n_(events_.size()) {
    cells_.assign(n_ * n_, {});
  }

  const std::vector<EventId>& events() const { return events_; }
  std::size_t size() const { return n_; }
  int find(const EventId& e) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), e);
    if (it == events_.end() || !(*it == e)) return -1;
    return static_cast<int>(it - events_.begin());
  }
  const Cell& cell(std::size_t i, std::size_t j) const {
    return cells_[i * n_ + j];
  }
  Cell& cell(std::size_t i, std::size_t j) { return cells_[i * n_ + j]; }

 private:
  std::vector<EventId> events_;
  std::size_t n_ = 0;
  std::vector<Cell> cells_;
};

struct Decision {
  Verdict verdict = Verdict::NoVerdict;
  TreePtr tree;  // null exactly when verdict is NoVerdict
};

/// Decides queries against one immutable microcosm. Construction computes the
/// initial closure, the unknown-judgement fixpoint, and the memoisation
/// matrix; queries are then table lookups. Concurrent queries are safe.
class OnlineEngine {
 public:
  explicit OnlineEngine(Microcosm m) : m_(std::move(m)) {
    closure_ = detail::initial_closure_impl(m_, /*strict=*/true);
    unknown_ = detail::unknown_phase(closure_);
    matrix_ = DecisionMatrix(closure_.events);
    const auto& ev = closure_.events;
    for (std::size_t i = 0; i < closure_.n; ++i)
      for (std::size_t j = 0; j < closure_.n; ++j) {
        if (i == j) continue;
        auto& out = matrix_.cell(i, j);
        const auto& fwd = closure_.cell(i, j);
        const auto& rev = closure_.cell(j, i);
        if (fwd.hb) {
          out = {Verdict::HappensBefore, DecisionMatrix::Source::InitialClosure,
                 make_tree(Rule::InOK, fwd.hb->conclusion, {fwd.hb})};
        } else if (rev.hb) {
          // Presented as an inverted happens-before; the derivation concludes
          // the judgement in its stored orientation.
          out = {Verdict::HappensBeforeInv,
                 DecisionMatrix::Source::InitialClosure,
                 make_tree(Rule::InOK, rev.hb->conclusion, {rev.hb})};
        } else if (fwd.par) {
          out = {Verdict::Concurrent, DecisionMatrix::Source::InitialClosure,
                 make_tree(Rule::InOK, fwd.par->conclusion, {fwd.par})};
        } else if (fwd.cr) {
          out = {Verdict::CausallyRelated,
                 DecisionMatrix::Source::InitialClosure,
                 make_tree(Rule::InOK, fwd.cr->conclusion, {fwd.cr})};
        } else if (unknown_.unknown(i, j)) {
          out = {Verdict::Unknown, DecisionMatrix::Source::UnknownRule,
                 unknown_.oriented(ev, i, j)};
        }
      }
  }

  const Microcosm& microcosm() const { return m_; }
  const DecisionMatrix& matrix() const { return matrix_; }
  const std::vector<EventId>& events() const { return closure_.events; }

  /// The initial judgement at the ordered pair (a, b), if the closure derives
  /// one. Literal orientation: a stored a < b yields a judgement at (a, b)
  /// only — the reversed query reads absent here and is presented as an
  /// inverted verdict by decide().
  std::optional<CorrRel> initially_derivable(const EventId& a,
                                             const EventId& b) const {
    if (a == b) throw std::invalid_argument("reflexive query on " + a.token);
    int i = closure_.find(a), j = closure_.find(b);
    if (i < 0 || j < 0) return std::nullopt;
    const auto& c = closure_.cell(static_cast<std::size_t>(i),
                                  static_cast<std::size_t>(j));
    if (c.hb) return CorrRel::HappensBefore;
    if (c.par) return CorrRel::Concurrent;
    if (c.cr) return CorrRel::CausallyRelated;
    return std::nullopt;
  }

  /// Whether any initial judgement exists on the pair, in either orientation.
  bool pair_initially_determined(const EventId& a, const EventId& b) const {
    if (a == b) throw std::invalid_argument("reflexive query on " + a.token);
    int i = closure_.find(a), j = closure_.find(b);
    if (i < 0 || j < 0) return false;
    return closure_.pair_determined(static_cast<std::size_t>(i),
                                    static_cast<std::size_t>(j));
  }

  Decision decide_with_tree(const EventId& a, const EventId& b) const {
    if (a == b) throw std::invalid_argument("reflexive query on " + a.token);
    int i = matrix_.find(a), j = matrix_.find(b);
    if (i >= 0 && j >= 0) {
      const auto& c = matrix_.cell(static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j));
      return {c.verdict, c.tree};
    }
    // Un-4: an event outside the microcosm is unknown to every other event.
    if (!m_.member(a)) {
      return {Verdict::Unknown,
              make_tree(Rule::Un4, {a, b, JudgeRel::Unknown}, {},
                        {"not-member(" + a.token + ")"})};
    }
    auto base = make_tree(Rule::Un4, {b, a, JudgeRel::Unknown}, {},
                          {"not-member(" + b.token + ")"});
    return {Verdict::Unknown,
            make_tree(Rule::UnSym, {a, b, JudgeRel::Unknown}, {base})};
  }

  Verdict decide(const EventId& a, const EventId& b) const {
    return decide_with_tree(a, b).verdict;
  }

 private:
  Microcosm m_;
  detail::ClosureResult closure_;
  detail::UnknownPhase unknown_;
  DecisionMatrix matrix_;
};

/// The matrix restricted to initial judgements: the least fixpoint of Init,
/// In-Tr, Co-Sym, CR-Sym over the stored correspondences.
inline DecisionMatrix initial_closure(const Microcosm& m) {
  auto cl = detail::initial_closure_impl(m, /*strict=*/true);
  DecisionMatrix matrix(cl.events);
  for (std::size_t i = 0; i < cl.n; ++i)
    for (std::size_t j = 0; j < cl.n; ++j) {
      if (i == j) continue;
      const auto& fwd = cl.cell(i, j);
      const auto& rev = cl.cell(j, i);
      auto& out = matrix.cell(i, j);
      if (fwd.hb)
        out = {Verdict::HappensBefore, DecisionMatrix::Source::InitialClosure,
               fwd.hb};
      else if (rev.hb)
        out = {Verdict::HappensBeforeInv,
               DecisionMatrix::Source::InitialClosure, rev.hb};
      else if (fwd.par)
        out = {Verdict::Concurrent, DecisionMatrix::Source::InitialClosure,
               fwd.par};
      else if (fwd.cr)
        out = {Verdict::CausallyRelated,
               DecisionMatrix::Source::InitialClosure, fwd.cr};
    }
  return matrix;
}

}  // namespace cdeduce
