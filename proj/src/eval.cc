// SPDX-License-Identifier: Apache-2.0
#include "nmd/eval.h"

#include <algorithm>
#include <functional>
#include <optional>

#include "nmd/errors.h"
#include "nmd/formula.h"

namespace nmd {

namespace {

const std::set<CellAddress> kNoCells;
const std::vector<ResolvedTarget> kNoTargets;

std::string sheet_or_host(const std::string& sheet, const CellAddress& host) {
  return sheet.empty() ? host.sheet : sheet;
}

void check_sheets(const Expr& e, const Workbook& w, const CellAddress& host) {
  auto check = [&](const std::string& sheet) {
    if (!sheet.empty() && !w.find_sheet(sheet)) {
      throw NameError(NameError::Kind::Unresolved, "unknown sheet '" + sheet + "'");
    }
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CellRef> || std::is_same_v<T, RangeRef>) {
          check(n.sheet);
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          check_sheets(n.lhs, w, host);
          check_sheets(n.rhs, w, host);
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          for (const auto& a : n.args) check_sheets(a, w, host);
        } else if constexpr (std::is_same_v<T, ArrayConditional>) {
          check_sheets(n.value, w, host);
          for (const auto& c : n.conditions) {
            check_sheets(c.range, w, host);
            check_sheets(c.operand, w, host);
          }
        }
      },
      e->v);
}

// Cell in `col` at the host row, when the host row lies in its data region.
std::optional<CellAddress> current_row(const ColumnRange& col, const CellAddress& host) {
  if (host.row < col.first_row || host.row > col.last_row) return std::nullopt;
  return CellAddress{col.sheet, col.column, host.row};
}

ColumnRange range_target(const RangeRef& r, const CellAddress& host) {
  return ColumnRange{to_upper(sheet_or_host(r.sheet, host)), r.column, r.first_row,
                     r.last_row};
}

CellAddress cell_target(const CellRef& r, const CellAddress& host) {
  return CellAddress{to_upper(sheet_or_host(r.sheet, host)), r.column, r.row};
}

// Walks an expression, reporting each reference with the context it is
// read in (`as_range` true for aggregate arguments and array columns).
void collect(const Expr& e, bool as_range, const Workbook& w, const CellAddress& host,
             std::vector<ResolvedTarget>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CellRef>) {
          out.push_back(cell_target(n, host));
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          out.push_back(range_target(n, host));
        } else if constexpr (std::is_same_v<T, NameRef>) {
          ResolvedTarget t = resolve_name(w, n.name);
          if (const auto* col = std::get_if<ColumnRange>(&t); col && !as_range) {
            if (auto c = current_row(*col, host)) out.push_back(*c);
          } else {
            out.push_back(t);
          }
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          collect(n.lhs, false, w, host, out);
          collect(n.rhs, false, w, host, out);
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          bool agg = as_aggregator(n.fn).has_value();
          for (const auto& a : n.args) collect(a, agg, w, host, out);
        } else if constexpr (std::is_same_v<T, ArrayConditional>) {
          for (const auto& c : n.conditions) {
            collect(c.range, true, w, host, out);
            collect(c.operand, false, w, host, out);
          }
          collect(n.value, true, w, host, out);
        }
      },
      e->v);
}

}  // namespace

Expr parse_cell_formula(const Workbook& w, const CellAddress& cell, const std::string& text) {
  const Sheet* s = w.find_sheet(cell.sheet);
  if (!s) throw NotFoundError("no sheet '" + cell.sheet + "'");
  try {
    Expr resolved = resolve_names(parse_formula(text), w, &s->name);
    check_sheets(resolved, w, cell);
    return resolved;
  } catch (const ParseError& e) {
    throw FormulaError(cell.to_string(), e.what());
  } catch (const NameError& e) {
    throw FormulaError(cell.to_string(), e.what());
  }
}

std::vector<ResolvedTarget> references_of(const Expr& resolved, const Workbook& w,
                                          const CellAddress& host) {
  std::vector<ResolvedTarget> out;
  collect(resolved, false, w, host, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<CellAddress> expand_target(const Workbook& w, const ResolvedTarget& t) {
  if (const auto* c = std::get_if<CellAddress>(&t)) return {*c};
  const auto& r = std::get<ColumnRange>(t);
  std::vector<CellAddress> out;
  const Sheet* s = w.find_sheet(r.sheet);
  if (!s) return out;
  for (const auto& [key, content] : s->cells) {
    auto rc = parse_cell_a1(key);
    if (!rc) continue;
    CellAddress a{r.sheet, rc->first, rc->second};
    if (r.contains(a)) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- graph --------------------------------------------------------------------

const std::set<CellAddress>& DependencyGraph::precedents(const CellAddress& cell) const {
  auto it = precedents_.find(cell);
  return it == precedents_.end() ? kNoCells : it->second;
}

const std::set<CellAddress>& DependencyGraph::dependents(const CellAddress& cell) const {
  auto it = dependents_.find(cell);
  return it == dependents_.end() ? kNoCells : it->second;
}

const std::vector<ResolvedTarget>& DependencyGraph::references(const CellAddress& cell) const {
  auto it = references_.find(cell);
  return it == references_.end() ? kNoTargets : it->second;
}

const Expr* DependencyGraph::formula(const CellAddress& cell) const {
  auto it = formulas_.find(cell);
  return it == formulas_.end() ? nullptr : &it->second;
}

std::vector<std::pair<CellAddress, CellAddress>> DependencyGraph::edges() const {
  std::vector<std::pair<CellAddress, CellAddress>> out;
  for (const auto& [p, deps] : dependents_) {
    for (const auto& d : deps) out.emplace_back(p, d);
  }
  return out;
}

std::size_t DependencyGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [p, deps] : dependents_) n += deps.size();
  return n;
}

void DependencyGraph::finish() {
  // Tarjan, iterative so long chains do not exhaust the stack.
  std::map<CellAddress, int> index, low;
  std::set<CellAddress> on_stack;
  std::vector<CellAddress> stack;
  int counter = 0;
  for (const auto& root : nodes_) {
    if (index.count(root)) continue;
    struct Frame {
      CellAddress node;
      std::set<CellAddress>::const_iterator next;
    };
    std::vector<Frame> frames;
    auto push = [&](const CellAddress& v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack.insert(v);
      frames.push_back({v, precedents(v).begin()});
    };
    push(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& succ = precedents(f.node);
      if (f.next != succ.end()) {
        CellAddress w = *f.next++;
        if (!index.count(w)) {
          push(w);
        } else if (on_stack.count(w)) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      CellAddress v = f.node;
      frames.pop_back();
      if (!frames.empty()) {
        low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      }
      if (low[v] != index[v]) continue;
      std::vector<CellAddress> component;
      CellAddress x;
      do {
        x = stack.back();
        stack.pop_back();
        on_stack.erase(x);
        component.push_back(x);
      } while (x != v);
      if (component.size() > 1 || precedents(v).count(v)) {
        std::sort(component.begin(), component.end());
        cycles_.push_back(std::move(component));
      }
    }
  }
  std::sort(cycles_.begin(), cycles_.end());

  topo_order_.clear();
  if (!cycles_.empty()) return;
  std::map<CellAddress, std::size_t> indegree;
  std::set<CellAddress> ready;
  for (const auto& n : nodes_) {
    indegree[n] = precedents(n).size();
    if (indegree[n] == 0) ready.insert(n);
  }
  while (!ready.empty()) {
    CellAddress n = *ready.begin();
    ready.erase(ready.begin());
    topo_order_.push_back(n);
    for (const auto& d : dependents(n)) {
      if (--indegree[d] == 0) ready.insert(d);
    }
  }
}

DependencyGraph build_graph_lenient(const Workbook& w, std::vector<FormulaProblem>* problems) {
  DependencyGraph g;
  for (const auto& sheet : w.sheets) {
    std::string upper = sheet.upper_name();
    for (const auto& [key, content] : sheet.cells) {
      auto rc = parse_cell_a1(key);
      if (!rc) continue;
      CellAddress addr{upper, rc->first, rc->second};
      g.nodes_.insert(addr);
      if (!content.is_formula()) continue;
      Expr ast;
      try {
        ast = parse_cell_formula(w, addr, content.formula_text);
      } catch (const FormulaError& e) {
        if (!problems) throw;
        bool unresolved = true;
        try {
          parse_formula(content.formula_text);
        } catch (const ParseError&) {
          unresolved = false;
        }
        problems->push_back(FormulaProblem{addr, e.what(), unresolved});
        continue;
      }
      auto refs = references_of(ast, w, addr);
      for (const auto& t : refs) {
        std::vector<CellAddress> cells;
        if (const auto* c = std::get_if<CellAddress>(&t)) {
          cells.push_back(*c);
        } else {
          cells = expand_target(w, t);
        }
        for (const auto& p : cells) {
          g.nodes_.insert(p);
          g.precedents_[addr].insert(p);
          g.dependents_[p].insert(addr);
        }
      }
      g.references_[addr] = std::move(refs);
      g.formulas_[addr] = std::move(ast);
    }
  }
  g.finish();
  return g;
}

DependencyGraph build_graph(const Workbook& w) { return build_graph_lenient(w, nullptr); }

// --- evaluation ---------------------------------------------------------------

namespace {

CellValue value_error() { return CellValue::error(error_code::kValue); }

// Arithmetic operand: Blank reads as 0; anything else non-numeric is an error.
std::optional<Decimal> arithmetic_operand(const CellValue& v) {
  if (v.is_number()) return v.as_number();
  if (v.is_blank()) return Decimal(0);
  return std::nullopt;
}

CellValue arithmetic(BinaryOperator op, const CellValue& a, const CellValue& b) {
  if (a.is_error()) return a;
  if (b.is_error()) return b;
  auto x = arithmetic_operand(a);
  auto y = arithmetic_operand(b);
  if (!x || !y) return value_error();
  switch (op) {
    case BinaryOperator::Add: return CellValue::number(*x + *y);
    case BinaryOperator::Sub: return CellValue::number(*x - *y);
    case BinaryOperator::Mul: return CellValue::number(*x * *y);
    default:
      if (y->is_zero()) return CellValue::error(error_code::kDivZero);
      return CellValue::number(*x / *y);
  }
}

std::optional<int> three_way(const CellValue& a0, const CellValue& b0) {
  CellValue a = a0, b = b0;
  // Blank takes the other side's type.
  if (a.is_blank() && b.is_blank()) return 0;
  if (a.is_blank()) {
    a = b.is_number() ? CellValue::number(0)
        : b.is_text() ? CellValue::text("")
                      : CellValue::boolean(false);
  }
  if (b.is_blank()) {
    b = a.is_number() ? CellValue::number(0)
        : a.is_text() ? CellValue::text("")
                      : CellValue::boolean(false);
  }
  if (a.kind() != b.kind()) return std::nullopt;
  if (a.is_number()) {
    auto c = a.as_number() <=> b.as_number();
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.is_boolean()) return int(a.as_boolean()) - int(b.as_boolean());
  int c = to_upper(a.as_text()).compare(to_upper(b.as_text()));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

CellValue compare(BinaryOperator op, const CellValue& a, const CellValue& b) {
  if (a.is_error()) return a;
  if (b.is_error()) return b;
  auto c = three_way(a, b);
  if (!c) return value_error();
  switch (op) {
    case BinaryOperator::Eq: return CellValue::boolean(*c == 0);
    case BinaryOperator::Ne: return CellValue::boolean(*c != 0);
    case BinaryOperator::Lt: return CellValue::boolean(*c < 0);
    case BinaryOperator::Gt: return CellValue::boolean(*c > 0);
    case BinaryOperator::Le: return CellValue::boolean(*c <= 0);
    default: return CellValue::boolean(*c >= 0);
  }
}

// Truth of an IF condition, or the error value it produces.
std::variant<bool, CellValue> truth(const CellValue& v) {
  switch (v.kind()) {
    case CellValue::Kind::Boolean: return v.as_boolean();
    case CellValue::Kind::Number: return !v.as_number().is_zero();
    case CellValue::Kind::Blank: return false;
    case CellValue::Kind::Error: return v;
    default: return value_error();
  }
}

class Accumulator {
 public:
  explicit Accumulator(Aggregator agg) : agg_(agg) {}

  // Numbers count; blank, text and booleans are skipped.
  void add(const CellValue& v) {
    if (error_ || !v.is_number()) {
      if (v.is_error() && !error_) error_ = v;
      return;
    }
    const Decimal& d = v.as_number();
    if (count_ == 0) {
      acc_ = d;
    } else if (agg_ == Aggregator::Sum) {
      acc_ = acc_ + d;
    } else if (agg_ == Aggregator::Max) {
      acc_ = std::max(acc_, d);
    } else if (agg_ == Aggregator::Min) {
      acc_ = std::min(acc_, d);
    }
    ++count_;
  }
  bool failed() const { return error_.has_value(); }

  CellValue result() const {
    if (error_) return *error_;
    if (agg_ == Aggregator::Count) return CellValue::number(Decimal(count_));
    if (count_ == 0) return CellValue::number(0);
    return CellValue::number(acc_);
  }

 private:
  Aggregator agg_;
  Decimal acc_;
  std::int64_t count_ = 0;
  std::optional<CellValue> error_;
};

class Evaluator {
 public:
  Evaluator(const Workbook& w, std::function<CellValue(const CellAddress&)> lookup)
      : w_(w), lookup_(std::move(lookup)) {}

  CellValue eval(const Expr& e, const CellAddress& host) {
    return std::visit([&](const auto& n) { return node(n, host); }, e->v);
  }

 private:
  CellValue node(const NumberLit& n, const CellAddress&) { return CellValue::number(n.value); }
  CellValue node(const BoolLit& n, const CellAddress&) { return CellValue::boolean(n.value); }
  CellValue node(const TextLit& n, const CellAddress&) { return CellValue::text(n.value); }
  CellValue node(const CellRef& r, const CellAddress& host) {
    return lookup_(cell_target(r, host));
  }
  CellValue node(const RangeRef&, const CellAddress&) { return value_error(); }
  CellValue node(const NameRef& n, const CellAddress& host) {
    ResolvedTarget t = resolve_name(w_, n.name);
    if (const auto* c = std::get_if<CellAddress>(&t)) return lookup_(*c);
    auto cur = current_row(std::get<ColumnRange>(t), host);
    return cur ? lookup_(*cur) : value_error();
  }
  CellValue node(const BinaryOp& b, const CellAddress& host) {
    CellValue l = eval(b.lhs, host);
    CellValue r = eval(b.rhs, host);
    return is_comparison(b.op) ? compare(b.op, l, r) : arithmetic(b.op, l, r);
  }
  CellValue node(const FunctionCall& f, const CellAddress& host) {
    if (f.fn == Function::If) {
      auto t = truth(eval(f.args[0], host));
      if (auto* err = std::get_if<CellValue>(&t)) return *err;
      if (std::get<bool>(t)) return eval(f.args[1], host);
      return f.args.size() > 2 ? eval(f.args[2], host) : CellValue::boolean(false);
    }
    Accumulator acc(*as_aggregator(f.fn));
    for (const auto& a : f.args) {
      if (auto range = range_of(a, host)) {
        for (int row = range->first_row; row <= range->last_row && !acc.failed(); ++row) {
          acc.add(lookup_(CellAddress{range->sheet, range->column, row}));
        }
      } else {
        acc.add(eval(a, host));
      }
    }
    return acc.result();
  }
  CellValue node(const ArrayConditional& ac, const CellAddress& host) {
    auto value = range_of(ac.value, host);
    std::vector<ColumnRange> ranges;
    std::vector<CellValue> operands;
    for (const auto& c : ac.conditions) {
      auto r = range_of(c.range, host);
      if (!r) return value_error();
      ranges.push_back(*r);
      operands.push_back(eval(c.operand, host));
    }
    if (!value) return value_error();
    int rows = value->last_row - value->first_row + 1;
    for (const auto& r : ranges) {
      if (r.last_row - r.first_row + 1 != rows) return value_error();
    }
    Accumulator acc(ac.aggregator);
    for (int i = 0; i < rows && !acc.failed(); ++i) {
      bool selected = true;
      for (std::size_t k = 0; k < ranges.size() && selected; ++k) {
        CellValue cell = lookup_(CellAddress{ranges[k].sheet, ranges[k].column,
                                             ranges[k].first_row + i});
        auto t = truth(compare(ac.conditions[k].op, cell, operands[k]));
        if (auto* err = std::get_if<CellValue>(&t)) {
          acc.add(*err);
          selected = false;
        } else {
          selected = std::get<bool>(t);
        }
      }
      if (selected) {
        acc.add(lookup_(CellAddress{value->sheet, value->column, value->first_row + i}));
      }
    }
    return acc.result();
  }

  // The column range an aggregate argument denotes, if it is one.
  std::optional<ColumnRange> range_of(const Expr& e, const CellAddress& host) {
    if (const auto* r = as<RangeRef>(e)) return range_target(*r, host);
    if (const auto* n = as<NameRef>(e)) {
      ResolvedTarget t = resolve_name(w_, n->name);
      if (const auto* col = std::get_if<ColumnRange>(&t)) return *col;
    }
    return std::nullopt;
  }

  const Workbook& w_;
  std::function<CellValue(const CellAddress&)> lookup_;
};

CellValue stored_value(const Workbook& w, const CellAddress& a) {
  const CellContent* c = w.cell(a);
  if (!c || c->is_formula()) return CellValue::blank();
  return c->literal_value;
}

}  // namespace

EvalResult recalculate(const Workbook& w) { return recalculate(w, build_graph(w)); }

EvalResult recalculate(const Workbook& w, const DependencyGraph& graph) {
  if (!graph.acyclic()) {
    std::string msg = "circular dependency:";
    for (const auto& c : graph.cycles().front()) msg += " " + c.to_string();
    throw CycleError(msg);
  }
  std::map<CellAddress, CellValue> computed;
  Evaluator ev(w, [&](const CellAddress& a) {
    auto it = computed.find(a);
    return it != computed.end() ? it->second : stored_value(w, a);
  });
  EvalResult out;
  for (const auto& cell : graph.topo_order()) {
    const Expr* f = graph.formula(cell);
    if (!f) continue;
    CellValue v = ev.eval(*f, cell);
    if (v.is_blank()) v = CellValue::number(0);
    computed[cell] = v;
    if (v.is_error()) {
      out.errors[cell] = v.error_code();
    } else {
      out.values[cell] = v;
    }
  }
  return out;
}

CellValue value_of(const Workbook& w, const EvalResult& eval, const CellAddress& cell) {
  if (auto it = eval.values.find(cell); it != eval.values.end()) return it->second;
  if (auto it = eval.errors.find(cell); it != eval.errors.end()) {
    return CellValue::error(it->second);
  }
  return stored_value(w, cell);
}

CellAddress resolve_override_target(const Workbook& w, const std::string& key) {
  std::optional<CellAddress> target;
  if (key.find('!') != std::string::npos) {
    target = parse_cell_address(key);
  } else {
    try {
      ResolvedTarget t = resolve_name(w, resolve_name_text(w, key, nullptr));
      if (!std::holds_alternative<CellAddress>(t)) {
        throw PreconditionError("override target '" + key + "' is a column, not a cell");
      }
      target = std::get<CellAddress>(t);
    } catch (const NameError&) {
      std::vector<CellAddress> found;
      for (const auto& s : w.sheets) {
        if (s.role != SheetRole::Input) continue;
        auto it = s.named_cells.find(key);
        if (it == s.named_cells.end()) continue;
        auto rc = parse_cell_a1(it->second);
        if (rc) found.push_back(CellAddress{s.upper_name(), rc->first, rc->second});
      }
      if (found.empty()) throw NotFoundError("unknown override target '" + key + "'");
      if (found.size() > 1) {
        throw PreconditionError("override target '" + key +
                                "' is defined on more than one input sheet");
      }
      target = found.front();
    }
  }
  const Sheet* s = w.find_sheet(target->sheet);
  if (!s) throw NotFoundError("no sheet '" + target->sheet + "'");
  if (s->role != SheetRole::Input) {
    throw PreconditionError("override target " + target->to_string() + " is on " +
                            std::string(role_name(s->role)) +
                            " sheet; only input cells may be overridden (R1)");
  }
  return *target;
}

std::vector<ValueChange> what_if(const Workbook& w,
                                 const std::map<std::string, CellValue>& overrides) {
  Workbook changed = w;
  for (const auto& [key, value] : overrides) {
    CellAddress target = resolve_override_target(w, key);
    Sheet* s = changed.find_sheet(target.sheet);
    if (value.is_blank()) {
      s->cells.erase(target.a1());
    } else {
      s->cells[target.a1()] = CellContent::literal(value);
    }
  }
  EvalResult before = recalculate(w);
  EvalResult after = recalculate(changed);
  std::set<CellAddress> cells;
  for (const auto* r : {&before, &after}) {
    for (const auto& [a, v] : r->values) cells.insert(a);
    for (const auto& [a, v] : r->errors) cells.insert(a);
  }
  std::vector<ValueChange> out;
  for (const auto& a : cells) {
    CellValue b = value_of(w, before, a);
    CellValue c = value_of(changed, after, a);
    if (!(b == c)) out.push_back(ValueChange{a, b, c});
  }
  return out;
}

}  // namespace nmd
