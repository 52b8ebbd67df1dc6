#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "locfaults/interp.hpp"
#include "locfaults/mcs.hpp"
#include "locfaults/pathgen.hpp"

namespace locfaults {

struct DeviationSet {
  std::vector<NodeId> conditions;  // path order
  bool corrected = false;
};

// Marks carry the cardinality of the correcting deviation whose last flipped
// condition is that node; later steps refuse to flip nodes with a smaller
// mark than their own budget.
struct Marking {
  std::map<NodeId, int> marks;

  bool allows(NodeId node, int k) const {
    auto it = marks.find(node);
    return it == marks.end() || it->second >= k;
  }

  void mark(NodeId node, int k) { marks.emplace(node, k); }
};

struct LocalizeOptions {
  int unroll = 3;
  int max_deviations = 3;
  int max_mcs_size = 3;
  bool marking = true;
  Domain domain = kDefaultDomain;
};

struct ReportEntry {
  std::vector<NodeId> deviation_nodes;
  std::vector<LocRef> deviation;
  bool corrected = false;
  bool is_dcm = false;
  std::vector<Mcs> mcss;
};

struct LocalizationReport {
  std::string program_name;
  Counterexample ce;
  int unroll_bound = 0;
  bool unroll_insufficient = false;
  std::vector<ReportEntry> entries;  // entry 0 is the empty deviation

  std::vector<std::vector<std::string>> dcm_renderings() const {
    std::vector<std::vector<std::string>> out;
    for (const auto& e : entries) {
      if (!e.is_dcm) continue;
      std::vector<std::string> locs;
      for (const auto& l : e.deviation) locs.push_back(l.str());
      out.push_back(std::move(locs));
    }
    return out;
  }
};

namespace detail {

// Depth-first walk over the concrete run, optionally flipping conditions.
// At each condition the deviated branch is explored first, which yields the
// path-ordered emission the reports use.
class Explorer {
 public:
  using Observer = std::function<void(const DeviationSet&, bool insufficient)>;

  Explorer(const Cfg& g, const Counterexample& ce, int k, bool use_marking,
           const Marking& marking, Observer observer)
      : g_(g), k_(k), use_marking_(use_marking), marking_(marking),
        observer_(std::move(observer)) {
    bind_inputs(g, ce, seed_);
  }

  std::vector<DeviationSet> run() {
    walk(g_.entry, seed_, {}, false);
    return std::move(correcting_);
  }

 private:
  void walk(NodeId cur, Valuation val, std::vector<NodeId> devset, bool insufficient) {
    VersionedEval ev(val);
    while (cur >= 0) {
      const CfgNode& n = g_.node(cur);
      if (const auto* blk = std::get_if<NBlock>(&n.kind)) {
        for (const auto& a : blk->assigns) {
          if (a.is_copy) {
            if (a.is_array) val.arrays[a.target_name()] = val.arrays.at(a.copy_src);
            else val.scalars[a.target_name()] = val.scalars.at(a.copy_src);
            continue;
          }
          long long v = ev.eval(a.rhs);
          if (a.index) {
            long long idx = ev.eval(a.index);
            auto prev = val.arrays.at(versioned(a.base, a.version - 1));
            if (idx < 0 || idx >= static_cast<long long>(prev.size()))
              throw Error("IndexOutOfBounds", a.base + " write out of bounds");
            prev[static_cast<size_t>(idx)] = v;
            val.arrays[a.target_name()] = std::move(prev);
          } else {
            val.scalars[a.target_name()] = v;
          }
        }
        if (blk->trunc_guard && ev.eval(blk->trunc_guard)) insufficient = true;
        cur = g_.succ(cur, BranchKind::Seq);
        continue;
      }
      if (const auto* cond = std::get_if<NCond>(&n.kind)) {
        bool truth = ev.eval(cond->expr);
        bool may_deviate = static_cast<int>(devset.size()) < k_ &&
                           (!use_marking_ || marking_.allows(cur, k_));
        if (may_deviate) {
          std::vector<NodeId> flipped = devset;
          flipped.push_back(cur);
          walk(g_.succ(cur, truth ? BranchKind::Else : BranchKind::Then), val,
               std::move(flipped), insufficient);
        }
        cur = g_.succ(cur, truth ? BranchKind::Then : BranchKind::Else);
        continue;
      }
      if (const auto* post = std::get_if<NPost>(&n.kind)) {
        if (static_cast<int>(devset.size()) == k_) {
          DeviationSet ds;
          ds.conditions = devset;
          ds.corrected = !insufficient && ev.eval(post->expr);
          observer_(ds, insufficient);
          if (ds.corrected) correcting_.push_back(std::move(ds));
        }
        return;
      }
      cur = g_.succ(cur, BranchKind::Seq);  // Pre
    }
  }

  const Cfg& g_;
  int k_;
  bool use_marking_;
  const Marking& marking_;
  Observer observer_;
  Valuation seed_;
  std::vector<DeviationSet> correcting_;
};

inline bool subset_of(const std::vector<NodeId>& small, const std::vector<NodeId>& big) {
  std::set<NodeId> b(big.begin(), big.end());
  for (NodeId n : small)
    if (!b.count(n)) return false;
  return true;
}

}  // namespace detail

// One incremental step: all paths with exactly k flipped conditions, in
// deterministic path order. Returns the correcting sets; the observer also
// sees the reached non-correcting ones.
inline std::vector<DeviationSet> explore_step(
    const Cfg& g, const Counterexample& ce, int k, const Marking& marking,
    bool use_marking = true,
    const std::function<void(const DeviationSet&, bool)>& observer = {}) {
  if (k < 1) throw Error("BadArgument", "deviation step needs k >= 1");
  auto obs = observer ? observer : [](const DeviationSet&, bool) {};
  return detail::Explorer(g, ce, k, use_marking, marking, obs).run();
}

// Full localization over an already-unrolled single-assignment graph.
inline LocalizationReport localize_cfg(const Cfg& g, const Counterexample& ce,
                                       const LocalizeOptions& opts,
                                       const std::string& name = "") {
  LocalizationReport report;
  report.program_name = !name.empty() ? name
                        : g.source ? g.source->program.name
                                   : "synthetic";
  report.ce = ce;
  report.unroll_bound = g.unroll_bound;

  PropagateResult pr0 = propagate(g, ce, {});
  if (pr0.unroll_insufficient) report.unroll_insufficient = true;
  if (pr0.post_holds && !pr0.unroll_insufficient)
    throw Error("NotACounterexample", "the given input satisfies the postcondition");

  ReportEntry entry0;
  entry0.corrected = false;
  entry0.is_dcm = false;
  entry0.mcss = enumerate_mcs(ce_path_csp(g, ce, opts.domain), opts.max_mcs_size);
  report.entries.push_back(std::move(entry0));

  Marking marking;
  std::vector<std::vector<NodeId>> known_dcms;

  for (int k = 1; k <= opts.max_deviations; ++k) {
    auto observer = [&](const DeviationSet& ds, bool insufficient) {
      if (insufficient) report.unroll_insufficient = true;
      ReportEntry e;
      e.deviation_nodes = ds.conditions;
      for (NodeId n : ds.conditions) e.deviation.push_back(g.node(n).loc);
      e.corrected = ds.corrected;
      if (ds.corrected) {
        bool minimal = true;
        for (const auto& prior : known_dcms)
          if (detail::subset_of(prior, ds.conditions)) {
            minimal = false;
            break;
          }
        e.is_dcm = minimal;
        if (minimal) {
          known_dcms.push_back(ds.conditions);
          try {
            e.mcss = enumerate_mcs(deviated_path_csp(g, ce, ds.conditions, opts.domain),
                                   opts.max_mcs_size);
          } catch (const Error& err) {
            if (err.code() != "FeasibleInput") throw;
          }
        }
        marking.mark(ds.conditions.back(), k);
      }
      report.entries.push_back(std::move(e));
    };
    explore_step(g, ce, k, marking, opts.marking, observer);
  }
  return report;
}

inline LocalizationReport localize(const ValidatedProgram& vp, const Counterexample& ce,
                                   const LocalizeOptions& opts) {
  Cfg g = to_dsa(unroll(build_cfg(vp), opts.unroll));
  return localize_cfg(g, ce, opts, vp.program.name);
}

// Exhaustive oracle for the bounded-deviation problem: every condition subset
// that is reached, corrects the run, and has no kept proper subset.
inline std::vector<DeviationSet> brute_force_dcm(const Cfg& g, const Counterexample& ce,
                                                 int k_max) {
  std::vector<NodeId> conds = g.condition_nodes();
  if (conds.size() > 16) throw Error("TooLarge", "too many conditions to enumerate");
  const int n = static_cast<int>(conds.size());

  std::vector<DeviationSet> kept;
  for (int size = 1; size <= std::min(k_max, n); ++size) {
    std::vector<int> idx(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<size_t>(i)] = i;
    for (;;) {
      std::set<NodeId> devs;
      for (int i : idx) devs.insert(conds[static_cast<size_t>(i)]);

      PropagateResult pr = propagate(g, ce, devs, /*strict=*/false);
      if (pr.deviations_reached && !pr.unroll_insufficient && pr.post_holds) {
        std::vector<NodeId> in_path_order;
        for (NodeId nid : pr.path)
          if (devs.count(nid)) in_path_order.push_back(nid);
        bool minimal = true;
        for (const auto& prior : kept)
          if (detail::subset_of(prior.conditions, in_path_order)) {
            minimal = false;
            break;
          }
        if (minimal) kept.push_back(DeviationSet{std::move(in_path_order), true});
      }

      int i = size - 1;
      while (i >= 0 && idx[static_cast<size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++idx[static_cast<size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
  return kept;
}

// Bounded scan of the input space for a run that violates the postcondition
// within the unroll budget. Deterministic lexicographic order, ascending.
inline std::optional<Counterexample> find_counterexample(const ValidatedProgram& vp, int b,
                                                         long long budget,
                                                         Domain scan = Domain{-4, 4}) {
  struct Slot {
    std::string param;
    int cell = -1;  // -1: scalar
  };
  std::vector<Slot> slots;
  for (const auto& p : vp.program.params) {
    if (p.type.is_array)
      for (int i = 0; i < p.type.length; ++i) slots.push_back(Slot{p.name, i});
    else
      slots.push_back(Slot{p.name, -1});
  }

  Interpreter interp(vp);
  std::vector<long long> vals(slots.size(), scan.lo);
  long long tried = 0;

  for (;;) {
    if (tried++ >= budget) return std::nullopt;
    Counterexample ce;
    for (size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].cell < 0) {
        ce.scalars[slots[i].param] = vals[i];
      } else {
        auto& arr = ce.arrays[slots[i].param];
        if (arr.empty())
          arr.resize(static_cast<size_t>(vp.symbols.at(slots[i].param).length));
        arr[static_cast<size_t>(slots[i].cell)] = vals[i];
      }
    }
    try {
      if (interp.precondition_holds(ce)) {
        InterpResult r = interp.run(ce);
        bool fits = true;
        for (const auto& [line, trips] : r.loop_trips)
          if (trips > b) fits = false;
        if (fits && !r.post_holds) return ce;
      }
    } catch (const Error&) {
      // runs that crash (out-of-bounds, unbound reads) are not usable
    }

    if (slots.empty()) return std::nullopt;  // zero-input program, single candidate
    size_t i = slots.size();
    while (i > 0) {
      --i;
      if (vals[i] < scan.hi) {
        ++vals[i];
        break;
      }
      vals[i] = scan.lo;
      if (i == 0) return std::nullopt;
    }
  }
}

}  // namespace locfaults
