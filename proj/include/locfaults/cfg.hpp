#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "locfaults/constraint.hpp"
#include "locfaults/locref.hpp"
#include "locfaults/semantics.hpp"

namespace locfaults {

using NodeId = int;
enum class BranchKind { Then, Else, Seq };

inline std::string versioned(const std::string& base, int version) {
  return base + "_" + (version < 0 ? "u" : std::to_string(version));
}

// One assignment inside a block node. After the single-assignment rewrite the
// target carries a version and the right-hand side reads versioned names.
struct CfgAssign {
  std::string base;
  int version = -1;
  bool is_array = false;
  IntExprPtr index;       // set for array cell writes
  IntExprPtr rhs;         // null for whole-array copies
  LocRef loc;
  bool is_copy = false;   // join-reconciliation copy
  std::string copy_src;   // versioned source name when is_copy

  std::string target_name() const { return versioned(base, version); }

  std::string str() const {
    std::string lhs = target_name();
    if (index) lhs += "[" + expr_str(index) + "]";
    if (is_copy && !rhs) return lhs + " = " + copy_src;
    return lhs + " = " + (rhs ? expr_str(rhs) : copy_src);
  }
};

struct NPre {};
struct NPost { BoolExprPtr expr; };
struct NCond { BoolExprPtr expr; };
struct NBlock {
  std::vector<CfgAssign> assigns;
  BoolExprPtr trunc_guard;  // loop condition re-checked after the last copy
};

struct CfgNode {
  NodeId id = -1;
  LocRef loc;
  std::variant<NPre, NPost, NCond, NBlock> kind;

  bool is_cond() const { return std::holds_alternative<NCond>(kind); }
  bool is_block() const { return std::holds_alternative<NBlock>(kind); }
  bool is_post() const { return std::holds_alternative<NPost>(kind); }
};

struct Cfg {
  struct Out {
    NodeId then_to = -1, else_to = -1, seq_to = -1;
  };

  std::vector<CfgNode> nodes;
  std::vector<Out> out;
  NodeId entry = -1, exit = -1;
  bool dsa_form = false;
  int unroll_bound = 0;  // 0 while loops are still cyclic
  std::shared_ptr<const ValidatedProgram> source;

  const CfgNode& node(NodeId id) const { return nodes[static_cast<size_t>(id)]; }

  NodeId succ(NodeId id, BranchKind b) const {
    const Out& o = out[static_cast<size_t>(id)];
    switch (b) {
      case BranchKind::Then: return o.then_to;
      case BranchKind::Else: return o.else_to;
      default: return o.seq_to;
    }
  }

  std::vector<NodeId> condition_nodes() const {
    std::vector<NodeId> ids;
    for (const auto& n : nodes)
      if (n.is_cond()) ids.push_back(n.id);
    return ids;
  }

  std::vector<std::vector<NodeId>> predecessors() const {
    std::vector<std::vector<NodeId>> preds(nodes.size());
    for (const auto& n : nodes) {
      const Out& o = out[static_cast<size_t>(n.id)];
      for (NodeId t : {o.then_to, o.else_to, o.seq_to})
        if (t >= 0) preds[static_cast<size_t>(t)].push_back(n.id);
    }
    return preds;
  }
};

// Topological order, or nullopt when the graph still has a cycle.
inline std::optional<std::vector<NodeId>> topo_order(const Cfg& g) {
  std::vector<int> indeg(g.nodes.size(), 0);
  for (const auto& n : g.nodes) {
    const Cfg::Out& o = g.out[static_cast<size_t>(n.id)];
    for (NodeId t : {o.then_to, o.else_to, o.seq_to})
      if (t >= 0) ++indeg[static_cast<size_t>(t)];
  }
  std::deque<NodeId> ready;
  for (const auto& n : g.nodes)
    if (indeg[static_cast<size_t>(n.id)] == 0) ready.push_back(n.id);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    // smallest id first keeps the order deterministic
    auto it = std::min_element(ready.begin(), ready.end());
    NodeId id = *it;
    ready.erase(it);
    order.push_back(id);
    const Cfg::Out& o = g.out[static_cast<size_t>(id)];
    for (NodeId t : {o.then_to, o.else_to, o.seq_to})
      if (t >= 0 && --indeg[static_cast<size_t>(t)] == 0) ready.push_back(t);
  }
  if (order.size() != g.nodes.size()) return std::nullopt;
  return order;
}

inline bool is_acyclic(const Cfg& g) { return topo_order(g).has_value(); }

namespace detail {

// Unrolled statement tree: loops already replaced by nested conditionals,
// every element tagged with its loop-iteration context.
struct UStmt;
using UStmtPtr = std::shared_ptr<const UStmt>;

struct UAssign { LValue target; IntExprPtr rhs; };
struct UIf { BoolExprPtr cond; std::vector<UStmtPtr> then_body, else_body; };
struct UWhile { BoolExprPtr cond; std::vector<UStmtPtr> body; };
struct UGhost { BoolExprPtr cond; };  // truncated-loop continuation test

struct UStmt {
  LocRef loc;
  std::variant<UAssign, UIf, UWhile, UGhost> node;
};

inline UStmtPtr mk_ustmt(LocRef loc, auto node) {
  return std::make_shared<UStmt>(UStmt{std::move(loc), {std::move(node)}});
}

inline std::vector<UStmtPtr> to_ustmts(const std::vector<StmtPtr>& stmts,
                                       const std::vector<LoopCtx>& ctx) {
  std::vector<UStmtPtr> out;
  for (const auto& s : stmts) {
    LocRef loc{s->line, ctx};
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SAssign>) {
            out.push_back(mk_ustmt(loc, UAssign{x.target, x.expr}));
          } else if constexpr (std::is_same_v<T, SReturn>) {
            out.push_back(mk_ustmt(loc, UAssign{LValue{"\\result", nullptr}, x.expr}));
          } else if constexpr (std::is_same_v<T, SIf>) {
            out.push_back(mk_ustmt(loc, UIf{x.cond, to_ustmts(x.then_body, ctx),
                                            to_ustmts(x.else_body, ctx)}));
          } else {
            out.push_back(mk_ustmt(loc, UWhile{x.cond, to_ustmts(x.body, ctx)}));
          }
        },
        s->node);
  }
  return out;
}

inline std::vector<UStmtPtr> unroll_stmts(const std::vector<StmtPtr>& stmts, int b,
                                          const std::vector<LoopCtx>& ctx);

inline UStmtPtr unroll_while(const SWhile& w, int line, int b,
                             const std::vector<LoopCtx>& ctx, int k) {
  std::vector<LoopCtx> inner = ctx;
  inner.push_back(LoopCtx{line, k});
  std::vector<UStmtPtr> body = unroll_stmts(w.body, b, inner);
  if (k < b) {
    body.push_back(unroll_while(w, line, b, ctx, k + 1));
  } else {
    // One more concrete test of the loop condition: if it still holds, the
    // chosen bound cannot represent this run.
    body.push_back(mk_ustmt(LocRef{line, inner}, UGhost{w.cond}));
  }
  return mk_ustmt(LocRef{line, inner}, UIf{w.cond, std::move(body), {}});
}

inline std::vector<UStmtPtr> unroll_stmts(const std::vector<StmtPtr>& stmts, int b,
                                          const std::vector<LoopCtx>& ctx) {
  std::vector<UStmtPtr> out;
  for (const auto& s : stmts) {
    LocRef loc{s->line, ctx};
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SAssign>) {
            out.push_back(mk_ustmt(loc, UAssign{x.target, x.expr}));
          } else if constexpr (std::is_same_v<T, SReturn>) {
            out.push_back(mk_ustmt(loc, UAssign{LValue{"\\result", nullptr}, x.expr}));
          } else if constexpr (std::is_same_v<T, SIf>) {
            out.push_back(mk_ustmt(loc, UIf{x.cond, unroll_stmts(x.then_body, b, ctx),
                                            unroll_stmts(x.else_body, b, ctx)}));
          } else {
            out.push_back(unroll_while(x, s->line, b, ctx, 1));
          }
        },
        s->node);
  }
  return out;
}

// Builds the graph from an unrolled statement tree. Dangling edges are the
// (node, slot) pairs waiting for their successor.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::shared_ptr<const ValidatedProgram> src) : src_(std::move(src)) {}

  Cfg build(const std::vector<UStmtPtr>& stmts) {
    NodeId pre = add_node(NPre{}, LocRef{src_->program.header_line, {}});
    g_.entry = pre;
    auto preds = build_seq(stmts, {{pre, BranchKind::Seq}});
    NodeId post = add_node(NPost{src_->program.postcondition}, LocRef{0, {}});
    wire(preds, post);
    g_.exit = post;
    g_.source = src_;
    return std::move(g_);
  }

 private:
  using Dangling = std::pair<NodeId, BranchKind>;

  NodeId add_node(auto kind, LocRef loc) {
    NodeId id = static_cast<NodeId>(g_.nodes.size());
    g_.nodes.push_back(CfgNode{id, std::move(loc), {std::move(kind)}});
    g_.out.push_back({});
    return id;
  }

  void wire(const std::vector<Dangling>& preds, NodeId target) {
    for (auto [n, slot] : preds) {
      Cfg::Out& o = g_.out[static_cast<size_t>(n)];
      switch (slot) {
        case BranchKind::Then: o.then_to = target; break;
        case BranchKind::Else: o.else_to = target; break;
        case BranchKind::Seq: o.seq_to = target; break;
      }
    }
  }

  std::vector<Dangling> build_seq(const std::vector<UStmtPtr>& stmts,
                                  std::vector<Dangling> preds) {
    NodeId open_block = -1;
    auto close = [&] { open_block = -1; };
    for (const auto& s : stmts) {
      if (const auto* a = std::get_if<UAssign>(&s->node)) {
        CfgAssign ca;
        ca.base = a->target.name;
        ca.is_array = a->target.index != nullptr;
        ca.index = a->target.index;
        ca.rhs = a->rhs;
        ca.loc = s->loc;
        if (open_block < 0) {
          open_block = add_node(NBlock{}, s->loc);
          wire(preds, open_block);
          preds = {{open_block, BranchKind::Seq}};
        }
        std::get<NBlock>(g_.nodes[static_cast<size_t>(open_block)].kind)
            .assigns.push_back(std::move(ca));
        continue;
      }
      if (const auto* gst = std::get_if<UGhost>(&s->node)) {
        close();
        NodeId blk = add_node(NBlock{{}, gst->cond}, s->loc);
        wire(preds, blk);
        preds = {{blk, BranchKind::Seq}};
        continue;
      }
      if (const auto* i = std::get_if<UIf>(&s->node)) {
        close();
        NodeId cond = add_node(NCond{i->cond}, s->loc);
        wire(preds, cond);
        auto then_tail = build_seq(i->then_body, {{cond, BranchKind::Then}});
        auto else_tail = build_seq(i->else_body, {{cond, BranchKind::Else}});
        preds = std::move(then_tail);
        preds.insert(preds.end(), else_tail.begin(), else_tail.end());
        continue;
      }
      const auto& w = std::get<UWhile>(s->node);
      close();
      NodeId cond = add_node(NCond{w.cond}, s->loc);
      wire(preds, cond);
      auto body_tail = build_seq(w.body, {{cond, BranchKind::Then}});
      wire(body_tail, cond);  // back edge
      preds = {{cond, BranchKind::Else}};
    }
    return preds;
  }

  Cfg g_;
  std::shared_ptr<const ValidatedProgram> src_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// The three construction passes
// ---------------------------------------------------------------------------

inline Cfg build_cfg(const ValidatedProgram& vp) {
  auto src = std::make_shared<const ValidatedProgram>(vp);
  return detail::GraphBuilder(src).build(detail::to_ustmts(src->program.body, {}));
}

inline Cfg unroll(const Cfg& g, int b) {
  if (b < 1) throw Error("BadBound", "unroll bound must be at least 1");
  if (!g.source) throw Error("NoSource", "cannot unroll a synthetic graph");
  Cfg out = detail::GraphBuilder(g.source).build(
      detail::unroll_stmts(g.source->program.body, b, {}));
  out.unroll_bound = b;
  return out;
}

// Rewrites an acyclic graph so every variable is assigned at most once per
// path. Join points reconcile versions with explicit copy blocks spliced
// into the incoming edges that carry the older version.
inline Cfg to_dsa(const Cfg& g) {
  auto order = topo_order(g);
  if (!order) throw Error("CyclicCfg", "single-assignment form requires an acyclic graph");

  Cfg out = g;
  out.dsa_form = true;

  using State = std::map<std::string, int>;
  State init;
  if (g.source) {
    for (const auto& p : g.source->program.params) init[p.name] = 0;
    // a bare declaration reserves version 0 for the undefined slot, an
    // initializer owns version 0 itself
    for (const auto& l : g.source->program.locals) init[l.name] = l.fused_init ? -1 : 0;
    init["\\result"] = -1;
  }

  auto preds = g.predecessors();
  std::vector<State> out_state(g.nodes.size());

  struct PendingCopy {
    NodeId from;
    BranchKind slot;
    CfgAssign copy;
  };
  std::vector<PendingCopy> pending;

  auto state_rename = [&](const State& st) {
    return [&st](const std::string& name) {
      auto it = st.find(name);
      return versioned(name, it == st.end() ? -1 : it->second);
    };
  };

  auto slot_of = [&](NodeId from, NodeId to) {
    const Cfg::Out& o = g.out[static_cast<size_t>(from)];
    if (o.then_to == to) return BranchKind::Then;
    if (o.else_to == to) return BranchKind::Else;
    return BranchKind::Seq;
  };

  auto is_array_var = [&](const std::string& base) {
    if (!g.source) return false;
    auto it = g.source->symbols.find(base);
    return it != g.source->symbols.end() && it->second.is_array;
  };

  for (NodeId id : *order) {
    State st;
    const auto& ps = preds[static_cast<size_t>(id)];
    if (ps.empty()) {
      st = init;
    } else {
      // per-variable max across incoming edges
      for (NodeId p : ps)
        for (const auto& [v, ver] : out_state[static_cast<size_t>(p)]) {
          auto it = st.find(v);
          if (it == st.end() || it->second < ver) st[v] = ver;
        }
      if (ps.size() > 1) {
        for (NodeId p : ps) {
          const State& their = out_state[static_cast<size_t>(p)];
          for (const auto& [v, ver] : st) {
            auto it = their.find(v);
            int theirs = it == their.end() ? -1 : it->second;
            if (theirs < ver && theirs >= 0) {
              CfgAssign c;
              c.base = v;
              c.version = ver;
              c.is_array = is_array_var(v);
              c.is_copy = true;
              c.copy_src = versioned(v, theirs);
              if (!c.is_array) c.rhs = mk_var(c.copy_src);
              c.loc = g.node(p).loc;
              pending.push_back(PendingCopy{p, slot_of(p, id), std::move(c)});
            }
          }
        }
      }
    }

    CfgNode& n = out.nodes[static_cast<size_t>(id)];
    std::visit(
        [&](auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, NCond>) {
            k.expr = rename_bool(k.expr, state_rename(st));
          } else if constexpr (std::is_same_v<T, NPost>) {
            k.expr = rename_bool(k.expr, state_rename(st));
          } else if constexpr (std::is_same_v<T, NBlock>) {
            for (auto& a : k.assigns) {
              a.rhs = a.rhs ? rename_int(a.rhs, state_rename(st)) : nullptr;
              if (a.index) a.index = rename_int(a.index, state_rename(st));
              auto it = st.find(a.base);
              int cur = it == st.end() ? -1 : it->second;
              a.version = cur + 1;
              st[a.base] = a.version;
            }
            if (k.trunc_guard) k.trunc_guard = rename_bool(k.trunc_guard, state_rename(st));
          }
        },
        n.kind);
    out_state[static_cast<size_t>(id)] = std::move(st);
  }

  // splice the copy blocks into their edges; copies sharing an edge land in
  // one block
  auto slot_get = [&](NodeId from, BranchKind slot) -> NodeId {
    const Cfg::Out& o = out.out[static_cast<size_t>(from)];
    return slot == BranchKind::Then ? o.then_to
           : slot == BranchKind::Else ? o.else_to
                                      : o.seq_to;
  };
  auto slot_set = [&](NodeId from, BranchKind slot, NodeId to) {
    Cfg::Out& o = out.out[static_cast<size_t>(from)];
    (slot == BranchKind::Then ? o.then_to
     : slot == BranchKind::Else ? o.else_to
                                : o.seq_to) = to;
  };
  for (auto& pc : pending) {
    NodeId orig_target = g.succ(pc.from, pc.slot);
    NodeId current = slot_get(pc.from, pc.slot);
    if (current != orig_target) {  // this edge already has its copy block
      std::get<NBlock>(out.nodes[static_cast<size_t>(current)].kind)
          .assigns.push_back(pc.copy);
      continue;
    }
    NodeId blk = static_cast<NodeId>(out.nodes.size());
    out.nodes.push_back(CfgNode{blk, pc.copy.loc, {NBlock{{pc.copy}, nullptr}}});
    out.out.push_back({});
    out.out[static_cast<size_t>(blk)].seq_to = orig_target;
    slot_set(pc.from, pc.slot, blk);
  }

  return out;
}

// ---------------------------------------------------------------------------
// DOT rendering for debugging
// ---------------------------------------------------------------------------

inline std::string to_dot(const Cfg& g) {
  std::string s = "digraph cfg {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& n : g.nodes) {
    std::string label = n.loc.line > 0 ? n.loc.str() + "\\n" : "";
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, NPre>) label = "PRE";
          else if constexpr (std::is_same_v<T, NPost>) label += "POST: " + expr_str(k.expr);
          else if constexpr (std::is_same_v<T, NCond>) label += expr_str(k.expr);
          else {
            for (const auto& a : k.assigns) label += a.str() + "\\n";
            if (k.trunc_guard) label += "[still? " + expr_str(k.trunc_guard) + "]";
          }
        },
        n.kind);
    std::string shape = n.is_cond() ? "diamond" : "box";
    for (auto& c : label)
      if (c == '"') c = '\'';
    s += "  n" + std::to_string(n.id) + " [shape=" + shape + ", label=\"" + label + "\"];\n";
  }
  for (const auto& n : g.nodes) {
    const Cfg::Out& o = g.out[static_cast<size_t>(n.id)];
    auto edge = [&](NodeId t, const char* lbl) {
      if (t >= 0)
        s += "  n" + std::to_string(n.id) + " -> n" + std::to_string(t) + " [label=\"" +
             lbl + "\"];\n";
    };
    edge(o.then_to, "then");
    edge(o.else_to, "else");
    edge(o.seq_to, "");
  }
  s += "}\n";
  return s;
}

}  // namespace locfaults
