// SPDX-License-Identifier: Apache-2.0
#include "support.h"

#include <algorithm>
#include <functional>
#include <set>

#include "nmd/errors.h"

#ifndef NMD_TEST_DATA
#define NMD_TEST_DATA "tests/data"
#endif

namespace nmd::testing {

std::string data_path(const std::string& file) { return std::string(NMD_TEST_DATA) + "/" + file; }

Workbook fixture(const std::string& file) { return load_workbook_file(data_path(file)); }

Workbook naming_context() {
  Workbook w = fixture("fix_a_extended.nmd.json");
  Workbook secdi = fixture("walker_secdi.nmd.json");
  w.sheets.push_back(secdi.sheets.front());
  return w;
}

namespace {

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

Decimal random_decimal(Rng& rng) {
  static const std::vector<std::string> pool = {"0", "1", "2", "3", "5", "10", "0.5", "1.25",
                                                "-1", "-2.5", "100", "0.001", "7", "42"};
  return Decimal::parse(pick(rng, pool));
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pool = {"", "a", "B", "abc", "x y", "say \"hi\"",
                                                "O'Neil", "AND", "1"};
  return pick(rng, pool);
}

Expr random_literal(Rng& rng) {
  switch (uniform(rng, 0, 5)) {
    case 0: return make_text(random_text(rng));
    case 1: return make_bool(chance(rng, 0.5));
    default: return make_number(random_decimal(rng));
  }
}

const std::vector<BinaryOperator> kAllOps = {
    BinaryOperator::Add, BinaryOperator::Sub, BinaryOperator::Mul, BinaryOperator::Div,
    BinaryOperator::Eq,  BinaryOperator::Lt,  BinaryOperator::Gt,  BinaryOperator::Le,
    BinaryOperator::Ge,  BinaryOperator::Ne};
const std::vector<BinaryOperator> kComparisons = {BinaryOperator::Eq, BinaryOperator::Lt,
                                                  BinaryOperator::Gt, BinaryOperator::Le,
                                                  BinaryOperator::Ge, BinaryOperator::Ne};
const std::vector<Function> kFunctions = {Function::If, Function::Sum, Function::Max,
                                          Function::Min, Function::Count};
const std::vector<Aggregator> kAggregators = {Aggregator::Sum, Aggregator::Max,
                                              Aggregator::Min, Aggregator::Count};

bool range_like(const Expr& e) { return as<RangeRef>(e) || as<NameRef>(e); }
bool scalar_operand(const Expr& e) { return as<CellRef>(e) || as<NameRef>(e) || is_literal(e); }

// True when the parser would read this call back as a nested-IF aggregate.
bool reads_as_conditional(const FunctionCall& f) {
  if (!as_aggregator(f.fn) || f.args.size() != 1) return false;
  Expr cur = f.args.front();
  for (;;) {
    const auto* call = as<FunctionCall>(cur);
    if (!call || call->fn != Function::If || call->args.size() != 2) return false;
    const auto* cond = as<BinaryOp>(call->args[0]);
    if (!cond || !is_comparison(cond->op) || !range_like(cond->lhs) || !scalar_operand(cond->rhs)) {
      return false;
    }
    if (range_like(call->args[1])) return true;
    cur = call->args[1];
  }
}

const std::vector<std::string> kA1Sheets = {"", "SECDI", "SEC_GTEEADJ", "MY SHEET", "2024", "O'NEIL"};

CellRef random_cell_ref(Rng& rng) {
  CellRef r;
  r.sheet = pick(rng, kA1Sheets);
  r.column = chance(rng, 0.8) ? uniform(rng, 1, 26) : uniform(rng, 27, kMaxColumn);
  r.row = chance(rng, 0.9) ? uniform(rng, 1, 800) : uniform(rng, 1, kMaxRow);
  r.abs_column = chance(rng, 0.5);
  r.abs_row = chance(rng, 0.5);
  return r;
}

RangeRef random_range_ref(Rng& rng, int rows = -1) {
  RangeRef r;
  r.sheet = pick(rng, kA1Sheets);
  r.column = uniform(rng, 1, 30);
  r.first_row = uniform(rng, 1, 50);
  r.last_row = rows >= 0 ? r.first_row + rows : r.first_row + uniform(rng, 0, 800);
  r.abs_column_first = chance(rng, 0.6);
  r.abs_row_first = chance(rng, 0.6);
  r.abs_column_last = chance(rng, 0.6);
  r.abs_row_last = chance(rng, 0.6);
  return r;
}

Expr a1_conditional(Rng& rng) {
  int rows = uniform(rng, 0, 100);
  ArrayConditional ac{pick(rng, kAggregators), {}, make_range(random_range_ref(rng, rows))};
  int k = uniform(rng, 1, 3);
  for (int i = 0; i < k; ++i) {
    Expr operand = chance(rng, 0.5) ? make_cell(random_cell_ref(rng)) : random_literal(rng);
    ac.conditions.push_back({make_range(random_range_ref(rng, rows)), pick(rng, kComparisons), operand});
  }
  return make_array_conditional(std::move(ac));
}

template <typename Leaf, typename Conditional>
Expr random_expr(Rng& rng, int depth, Leaf leaf, Conditional conditional) {
  if (depth <= 0 || chance(rng, 0.25)) return leaf();
  switch (uniform(rng, 0, 9)) {
    case 0:
    case 1:
    case 2:
    case 3: {
      return make_binary(pick(rng, kAllOps), random_expr(rng, depth - 1, leaf, conditional),
                         random_expr(rng, depth - 1, leaf, conditional));
    }
    case 4:
    case 5:
    case 6: {
      for (;;) {
        Function fn = pick(rng, kFunctions);
        std::size_t n = fn == Function::If ? static_cast<std::size_t>(uniform(rng, 2, 3))
                                           : static_cast<std::size_t>(uniform(rng, 1, 3));
        std::vector<Expr> args;
        for (std::size_t i = 0; i < n; ++i) {
          args.push_back(random_expr(rng, depth - 1, leaf, conditional));
        }
        FunctionCall f{fn, args};
        if (!reads_as_conditional(f)) return make_call(fn, std::move(args));
      }
    }
    case 7: return conditional();
    default: return leaf();
  }
}

struct NameEntry {
  QualifiedName name;
  bool column;
};

std::vector<NameEntry> names_of(const Workbook& w) {
  std::vector<NameEntry> out;
  for (const auto& s : w.sheets) {
    for (const auto& c : s.columns) {
      if (c.name) out.push_back({{s.name, *c.name}, true});
    }
    for (const auto& [n, a] : s.named_cells) out.push_back({{s.name, n}, false});
  }
  return out;
}

std::vector<QualifiedName> column_names(const Workbook& w) {
  std::vector<QualifiedName> out;
  for (const auto& e : names_of(w)) {
    if (e.column) out.push_back(e.name);
  }
  return out;
}

}  // namespace

Expr random_a1_expr(Rng& rng, int depth) {
  auto leaf = [&]() -> Expr {
    switch (uniform(rng, 0, 4)) {
      case 0: return make_cell(random_cell_ref(rng));
      case 1: return make_range(random_range_ref(rng));
      default: return random_literal(rng);
    }
  };
  return random_expr(rng, depth, leaf, [&] { return a1_conditional(rng); });
}

ConditionalAggregate random_conditional(Rng& rng, const Workbook& context, bool match_types) {
  auto columns = column_names(context);
  ConditionalAggregate c;
  c.aggregator = pick(rng, kAggregators);
  c.value_column = pick(rng, columns);
  auto span = [&](const QualifiedName& q) {
    auto r = std::get<ColumnRange>(resolve_name(context, q));
    return std::pair{r.first_row, r.last_row};
  };
  // Kind of the first populated cell, standing for the column's type.
  auto kind_of = [&](const QualifiedName& q) {
    auto r = std::get<ColumnRange>(resolve_name(context, q));
    for (int row = r.first_row; row <= r.last_row; ++row) {
      if (const CellContent* cell = context.cell({r.sheet, r.column, row})) return cell->literal_value.kind();
    }
    return CellValue::Kind::Blank;
  };
  std::vector<QualifiedName> aligned;
  for (const auto& q : columns) {
    if (span(q) == span(c.value_column)) aligned.push_back(q);
  }
  int k = uniform(rng, 1, 3);
  for (int i = 0; i < k; ++i) {
    Condition cond;
    cond.lhs = pick(rng, aligned);
    cond.op = pick(rng, kComparisons);
    if (chance(rng, 0.5)) {
      std::vector<QualifiedName> operands = columns;
      if (match_types && chance(rng, 0.9)) {
        operands.clear();
        for (const auto& q : columns) {
          if (kind_of(q) == kind_of(cond.lhs)) operands.push_back(q);
        }
      }
      cond.rhs = CurrentRowCell{pick(rng, operands)};
    } else if (match_types && chance(rng, 0.9)) {
      auto r = std::get<ColumnRange>(resolve_name(context, cond.lhs));
      const CellContent* cell = context.cell({r.sheet, r.column, uniform(rng, r.first_row, r.last_row)});
      cond.rhs = cell ? cell->literal_value : CellValue::number(1);
    } else {
      Expr lit = random_literal(rng);
      if (const auto* n = as<NumberLit>(lit)) cond.rhs = CellValue::number(n->value);
      if (const auto* b = as<BoolLit>(lit)) cond.rhs = CellValue::boolean(b->value);
      if (const auto* t = as<TextLit>(lit)) cond.rhs = CellValue::text(t->value);
    }
    c.conditions.push_back(std::move(cond));
  }
  return c;
}

Expr random_named_expr(Rng& rng, const Workbook& context, int depth) {
  auto names = names_of(context);
  auto leaf = [&]() -> Expr {
    if (chance(rng, 0.6)) return make_name(pick(rng, names).name);
    return random_literal(rng);
  };
  return random_expr(rng, depth, leaf, [&] { return to_expr(random_conditional(rng, context)); });
}

// --- random workbooks ---------------------------------------------------------

namespace {

CellValue random_cell_value(Rng& rng, double text_rate) {
  if (chance(rng, text_rate)) return CellValue::text(pick(rng, std::vector<std::string>{"a", "B", ""}));
  if (chance(rng, 0.05)) return CellValue::boolean(chance(rng, 0.5));
  return CellValue::number(random_decimal(rng));
}

struct Builder {
  Rng& rng;
  Workbook w;
  std::vector<CellAddress> literal_cells;
  std::vector<CellAddress> formula_cells;
  std::vector<QualifiedName> named_literals;
  std::vector<QualifiedName> named_formulas;
  std::vector<std::pair<std::string, int>> named_columns;  // sheet index via name

  Expr cell_expr(const CellAddress& a, const std::string& host_sheet) {
    CellRef r;
    r.sheet = (a.sheet == to_upper(host_sheet) && chance(rng, 0.5)) ? "" : a.sheet;
    r.column = a.column;
    r.row = a.row;
    r.abs_column = chance(rng, 0.5);
    r.abs_row = chance(rng, 0.5);
    return make_cell(r);
  }

  Expr leaf(const std::string& host_sheet, std::size_t formula_limit) {
    int choice = uniform(rng, 0, 9);
    if (choice <= 1) return random_literal(rng);
    if (choice <= 4 && !literal_cells.empty()) return cell_expr(pick(rng, literal_cells), host_sheet);
    if (choice <= 6 && formula_limit > 0) {
      std::size_t i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(formula_limit) - 1));
      return cell_expr(formula_cells[i], host_sheet);
    }
    if (choice == 7 && !named_literals.empty()) return make_name(pick(rng, named_literals));
    if (choice == 8) {
      std::vector<QualifiedName> earlier;
      for (std::size_t i = 0; i < formula_limit; ++i) {
        if (auto q = name_for_cell(w, formula_cells[i])) earlier.push_back(*q);
      }
      if (!earlier.empty()) return make_name(pick(rng, earlier));
    }
    // Column name; in scalar context it reads the host row.
    const Sheet& s = pick(rng, w.sheets);
    std::vector<QualifiedName> cols;
    for (const auto& c : s.columns) {
      if (c.name) cols.push_back({s.name, *c.name});
    }
    if (!cols.empty()) return make_name(pick(rng, cols));
    return random_literal(rng);
  }

  Expr range_expr(const Sheet& s) {
    if (chance(rng, 0.5)) {
      std::vector<QualifiedName> cols;
      for (const auto& c : s.columns) {
        if (c.name) cols.push_back({s.name, *c.name});
      }
      if (!cols.empty()) return make_name(pick(rng, cols));
    }
    RangeRef r;
    r.sheet = s.upper_name();
    r.column = uniform(rng, 2, 6);
    r.first_row = s.first_data_row;
    r.last_row = s.last_data_row;
    r.abs_column_first = r.abs_row_first = r.abs_column_last = r.abs_row_last = true;
    return make_range(r);
  }

  Expr conditional(const std::string& host_sheet, std::size_t limit) {
    const Sheet& s = pick(rng, w.sheets);
    ArrayConditional ac{pick(rng, kAggregators), {}, range_expr(s)};
    int k = uniform(rng, 1, 3);
    for (int i = 0; i < k; ++i) {
      Expr operand = chance(rng, 0.4) ? random_literal(rng) : leaf(host_sheet, limit);
      if (!scalar_operand(operand)) operand = random_literal(rng);
      ac.conditions.push_back({range_expr(s), pick(rng, kComparisons), operand});
    }
    return make_array_conditional(std::move(ac));
  }

  Expr expr(int depth, const std::string& host_sheet, std::size_t limit) {
    if (depth <= 0 || chance(rng, 0.3)) return leaf(host_sheet, limit);
    switch (uniform(rng, 0, 8)) {
      case 0:
      case 1:
      case 2:
        return make_binary(pick(rng, kAllOps), expr(depth - 1, host_sheet, limit),
                           expr(depth - 1, host_sheet, limit));
      case 3: {
        std::vector<Expr> args{expr(depth - 1, host_sheet, limit), expr(depth - 1, host_sheet, limit)};
        if (chance(rng, 0.5)) args.push_back(expr(depth - 1, host_sheet, limit));
        return make_call(Function::If, std::move(args));
      }
      case 4:
      case 5: {
        std::vector<Expr> args;
        int n = uniform(rng, 1, 3);
        for (int i = 0; i < n; ++i) {
          args.push_back(chance(rng, 0.5) ? range_expr(pick(rng, w.sheets))
                                          : expr(depth - 1, host_sheet, limit));
        }
        FunctionCall f{as_function(pick(rng, kAggregators)), args};
        if (reads_as_conditional(f)) return leaf(host_sheet, limit);
        return make_call(f.fn, std::move(args));
      }
      case 6: return conditional(host_sheet, limit);
      default: return leaf(host_sheet, limit);
    }
  }
};

}  // namespace

Workbook random_workbook(Rng& rng, const RandomWorkbookOptions& opts) {
  Builder b{rng, {}, {}, {}, {}, {}, {}};
  b.w.name = "random";
  double text_rate = chance(rng, 0.3) ? 0.1 : 0.0;
  int sheets = uniform(rng, 1, opts.max_sheets);
  for (int i = 0; i < sheets; ++i) {
    Sheet s;
    s.name = "Data" + column_letters(i + 1) + (chance(rng, 0.3) ? "_x" : "");
    s.role = SheetRole::Calculation;
    s.first_data_row = uniform(rng, 2, 6);
    s.last_data_row = s.first_data_row + uniform(rng, 0, 8);
    for (int col = 2; col <= 6; ++col) {
      ColumnDef c{column_letters(col), std::nullopt};
      if (chance(rng, 0.6)) c.name = "Col" + column_letters(col);
      if (c.name || chance(rng, 0.3)) s.columns.push_back(c);
      for (int row = s.first_data_row; row <= s.last_data_row; ++row) {
        if (chance(rng, 0.2)) continue;  // blank
        CellAddress a{to_upper(s.name), col, row};
        s.cells[a.a1()] = CellContent::literal(random_cell_value(rng, text_rate));
        b.literal_cells.push_back(a);
        if (chance(rng, 0.05)) {
          std::string n = "Lit_" + std::to_string(b.named_literals.size());
          s.named_cells[n] = a.a1();
          b.named_literals.push_back({s.name, n});
        }
      }
    }
    b.w.sheets.push_back(std::move(s));
  }

  int formulas = uniform(rng, 1, opts.max_formulas);
  std::set<CellAddress> taken;
  for (int i = 0; i < formulas; ++i) {
    Sheet& s = b.w.sheets[static_cast<std::size_t>(uniform(rng, 0, sheets - 1))];
    CellAddress a;
    do {
      // Outside the literal columns so ranges never cover formulas.
      a = CellAddress{s.upper_name(), uniform(rng, 8, 11), uniform(rng, 1, 40)};
    } while (taken.count(a));
    taken.insert(a);
    std::string host = s.name;
    Expr e = b.expr(3, host, b.formula_cells.size());
    s.cells[a.a1()] = CellContent::formula(print_a1(e), as<ArrayConditional>(e) != nullptr);
    if (chance(rng, 0.2)) {
      std::string n = "Calc_" + std::to_string(i);
      s.named_cells[n] = a.a1();
    }
    b.formula_cells.push_back(a);
  }
  check_invariants(b.w);
  return b.w;
}

// --- naive interpreter --------------------------------------------------------

namespace {

CellValue vx() { return CellValue::error(error_code::kValue); }

class Naive {
 public:
  explicit Naive(const Workbook& w) : w_(w) {}

  CellValue cell(const CellAddress& a) {
    if (auto it = memo_.find(a); it != memo_.end()) return it->second;
    const CellContent* c = w_.cell(a);
    if (!c) return CellValue::blank();
    if (!c->is_formula()) return c->literal_value;
    Expr e = parse_cell_formula(w_, a, c->formula_text);
    CellValue v = eval(e, a);
    if (v.is_blank()) v = CellValue::number(0);
    memo_[a] = v;
    return v;
  }

 private:
  std::string sheet_of(const std::string& s, const CellAddress& host) {
    return s.empty() ? host.sheet : to_upper(s);
  }

  std::optional<ColumnRange> as_range(const Expr& e, const CellAddress& host) {
    if (const auto* r = as<RangeRef>(e)) {
      return ColumnRange{sheet_of(r->sheet, host), r->column, r->first_row, r->last_row};
    }
    if (const auto* n = as<NameRef>(e)) {
      auto t = resolve_name(w_, n->name);
      if (const auto* c = std::get_if<ColumnRange>(&t)) return *c;
    }
    return std::nullopt;
  }

  static CellValue arith(BinaryOperator op, CellValue a, CellValue b) {
    if (a.is_error()) return a;
    if (b.is_error()) return b;
    if (a.is_blank()) a = CellValue::number(0);
    if (b.is_blank()) b = CellValue::number(0);
    if (!a.is_number() || !b.is_number()) return vx();
    Decimal x = a.as_number(), y = b.as_number();
    if (op == BinaryOperator::Add) return CellValue::number(x + y);
    if (op == BinaryOperator::Sub) return CellValue::number(x - y);
    if (op == BinaryOperator::Mul) return CellValue::number(x * y);
    if (y == Decimal(0)) return CellValue::error(error_code::kDivZero);
    return CellValue::number(x / y);
  }

  static CellValue cmp(BinaryOperator op, CellValue a, CellValue b) {
    if (a.is_error()) return a;
    if (b.is_error()) return b;
    auto blank_like = [](const CellValue& other) {
      if (other.is_number()) return CellValue::number(0);
      if (other.is_text()) return CellValue::text("");
      return CellValue::boolean(false);
    };
    if (a.is_blank() && b.is_blank()) {
      a = CellValue::number(0);
      b = CellValue::number(0);
    }
    if (a.is_blank()) a = blank_like(b);
    if (b.is_blank()) b = blank_like(a);
    int order;
    if (a.is_number() && b.is_number()) {
      order = a.as_number() < b.as_number() ? -1 : (b.as_number() < a.as_number() ? 1 : 0);
    } else if (a.is_text() && b.is_text()) {
      std::string x = to_upper(a.as_text()), y = to_upper(b.as_text());
      order = x < y ? -1 : (y < x ? 1 : 0);
    } else if (a.is_boolean() && b.is_boolean()) {
      order = int(a.as_boolean()) - int(b.as_boolean());
    } else {
      return vx();
    }
    bool r = false;
    switch (op) {
      case BinaryOperator::Eq: r = order == 0; break;
      case BinaryOperator::Ne: r = order != 0; break;
      case BinaryOperator::Lt: r = order < 0; break;
      case BinaryOperator::Gt: r = order > 0; break;
      case BinaryOperator::Le: r = order <= 0; break;
      default: r = order >= 0; break;
    }
    return CellValue::boolean(r);
  }

  // nullopt: take the branch's error.
  static std::optional<bool> test(const CellValue& v) {
    if (v.is_boolean()) return v.as_boolean();
    if (v.is_number()) return !(v.as_number() == Decimal(0));
    if (v.is_blank()) return false;
    return std::nullopt;
  }

  static CellValue aggregate(Aggregator agg, const std::vector<CellValue>& values) {
    std::vector<Decimal> nums;
    for (const auto& v : values) {
      if (v.is_error()) return v;
      if (v.is_number()) nums.push_back(v.as_number());
    }
    if (agg == Aggregator::Count) return CellValue::number(Decimal(static_cast<std::int64_t>(nums.size())));
    if (nums.empty()) return CellValue::number(0);
    if (agg == Aggregator::Sum) {
      Decimal s = 0;
      for (const auto& d : nums) s = s + d;
      return CellValue::number(s);
    }
    if (agg == Aggregator::Max) return CellValue::number(*std::max_element(nums.begin(), nums.end()));
    return CellValue::number(*std::min_element(nums.begin(), nums.end()));
  }

  CellValue eval(const Expr& e, const CellAddress& host) {
    if (const auto* n = as<NumberLit>(e)) return CellValue::number(n->value);
    if (const auto* b = as<BoolLit>(e)) return CellValue::boolean(b->value);
    if (const auto* t = as<TextLit>(e)) return CellValue::text(t->value);
    if (const auto* c = as<CellRef>(e)) return cell({sheet_of(c->sheet, host), c->column, c->row});
    if (as<RangeRef>(e)) return vx();
    if (const auto* n = as<NameRef>(e)) {
      auto t = resolve_name(w_, n->name);
      if (const auto* c = std::get_if<CellAddress>(&t)) return cell(*c);
      const auto& r = std::get<ColumnRange>(t);
      if (host.row < r.first_row || host.row > r.last_row) return vx();
      return cell({r.sheet, r.column, host.row});
    }
    if (const auto* b = as<BinaryOp>(e)) {
      CellValue l = eval(b->lhs, host), r = eval(b->rhs, host);
      return is_comparison(b->op) ? cmp(b->op, l, r) : arith(b->op, l, r);
    }
    if (const auto* f = as<FunctionCall>(e)) {
      if (f->fn == Function::If) {
        CellValue c = eval(f->args[0], host);
        if (c.is_error()) return c;
        auto t = test(c);
        if (!t) return vx();
        if (*t) return eval(f->args[1], host);
        return f->args.size() == 3 ? eval(f->args[2], host) : CellValue::boolean(false);
      }
      std::vector<CellValue> values;
      for (const auto& a : f->args) {
        if (auto r = as_range(a, host)) {
          for (int row = r->first_row; row <= r->last_row; ++row) values.push_back(cell({r->sheet, r->column, row}));
        } else {
          values.push_back(eval(a, host));
        }
      }
      return aggregate(*as_aggregator(f->fn), values);
    }
    const auto& ac = std::get<ArrayConditional>(e->v);
    auto value = as_range(ac.value, host);
    if (!value) return vx();
    int n = value->last_row - value->first_row + 1;
    std::vector<std::pair<ColumnRange, CellValue>> conds;
    for (const auto& c : ac.conditions) {
      auto r = as_range(c.range, host);
      if (!r || r->last_row - r->first_row + 1 != n) return vx();
      conds.push_back({*r, eval(c.operand, host)});
    }
    std::vector<CellValue> picked;
    for (int i = 0; i < n; ++i) {
      bool keep = true;
      for (std::size_t k = 0; k < conds.size(); ++k) {
        const auto& [r, operand] = conds[k];
        CellValue t = cmp(ac.conditions[k].op, cell({r.sheet, r.column, r.first_row + i}), operand);
        if (t.is_error()) return t;
        auto truth = test(t);
        if (!*truth) {
          keep = false;
          break;
        }
      }
      if (!keep) continue;
      CellValue v = cell({value->sheet, value->column, value->first_row + i});
      if (v.is_error()) return v;
      picked.push_back(v);
    }
    return aggregate(ac.aggregator, picked);
  }

  const Workbook& w_;
  std::map<CellAddress, CellValue> memo_;
};

}  // namespace

std::map<CellAddress, CellValue> naive_values(const Workbook& w) {
  Naive n(w);
  std::map<CellAddress, CellValue> out;
  for (const auto& s : w.sheets) {
    for (const auto& [a1, c] : s.cells) {
      if (!c.is_formula()) continue;
      auto rc = parse_cell_a1(a1);
      CellAddress a{s.upper_name(), rc->first, rc->second};
      out[a] = n.cell(a);
    }
  }
  return out;
}

CellValue brute_force(const Workbook& w, const ConditionalAggregate& c, const CellAddress& host) {
  auto column = [&](const QualifiedName& q) { return std::get<ColumnRange>(resolve_name(w, q)); };
  auto stored = [&](const CellAddress& a) {
    const CellContent* content = w.cell(a);
    return content && !content->is_formula() ? content->literal_value : CellValue::blank();
  };
  ColumnRange value = column(c.value_column);
  std::vector<CellValue> selected;
  for (int row = value.first_row; row <= value.last_row; ++row) {
    int offset = row - value.first_row;
    bool all = true;
    for (const auto& cond : c.conditions) {
      ColumnRange lhs = column(cond.lhs);
      CellValue left = stored({lhs.sheet, lhs.column, lhs.first_row + offset});
      CellValue right;
      if (const auto* cur = std::get_if<CurrentRowCell>(&cond.rhs)) {
        ColumnRange r = column(cur->column);
        right = stored({r.sheet, r.column, host.row});
      } else {
        right = std::get<CellValue>(cond.rhs);
      }
      // Spelled out again rather than shared with the engine.
      if (left.is_blank()) {
        left = right.is_text() ? CellValue::text("") : right.is_boolean() ? CellValue::boolean(false) : CellValue::number(0);
      }
      if (right.is_blank()) {
        right = left.is_text() ? CellValue::text("") : left.is_boolean() ? CellValue::boolean(false) : CellValue::number(0);
      }
      if (left.kind() != right.kind()) return CellValue::error(error_code::kValue);
      int order = 0;
      if (left.is_number()) {
        order = left.as_number() == right.as_number() ? 0 : (left.as_number() < right.as_number() ? -1 : 1);
      } else if (left.is_text()) {
        order = to_upper(left.as_text()).compare(to_upper(right.as_text()));
      } else {
        order = int(left.as_boolean()) - int(right.as_boolean());
      }
      bool ok = cond.op == BinaryOperator::Eq   ? order == 0
                : cond.op == BinaryOperator::Ne ? order != 0
                : cond.op == BinaryOperator::Lt ? order < 0
                : cond.op == BinaryOperator::Gt ? order > 0
                : cond.op == BinaryOperator::Le ? order <= 0
                                                : order >= 0;
      if (!ok) {
        all = false;
        break;
      }
    }
    if (all) selected.push_back(stored({value.sheet, value.column, row}));
  }
  Decimal acc = 0;
  std::int64_t count = 0;
  for (const auto& v : selected) {
    if (!v.is_number()) continue;
    const Decimal& d = v.as_number();
    if (count == 0) {
      acc = d;
    } else if (c.aggregator == Aggregator::Sum) {
      acc = acc + d;
    } else if (c.aggregator == Aggregator::Max && acc < d) {
      acc = d;
    } else if (c.aggregator == Aggregator::Min && d < acc) {
      acc = d;
    }
    ++count;
  }
  if (c.aggregator == Aggregator::Count) return CellValue::number(Decimal(count));
  return CellValue::number(count == 0 ? Decimal(0) : acc);
}

}  // namespace nmd::testing

namespace nmd::testing {

Workbook random_table_workbook(Rng& rng, int max_rows) {
  Workbook w;
  w.name = "tables";
  int rows = uniform(rng, 1, max_rows);
  int first = 5, last = first + rows - 1;
  int tables = uniform(rng, 1, 2);
  // Columns are mostly of one type; a few mix types to reach the #VALUE! paths.
  enum class Kind { Numeric, Text, Boolean, Mixed };
  auto column_kind = [&] {
    int r = uniform(rng, 0, 19);
    return r < 14 ? Kind::Numeric : r < 17 ? Kind::Text : r < 19 ? Kind::Boolean : Kind::Mixed;
  };
  auto value = [&](Kind kind) -> std::optional<CellValue> {
    if (chance(rng, 0.05)) return std::nullopt;
    if (kind == Kind::Mixed) kind = static_cast<Kind>(uniform(rng, 0, 2));
    if (kind == Kind::Text) return CellValue::text(pick(rng, std::vector<std::string>{"a", "B", "c", ""}));
    if (kind == Kind::Boolean) return CellValue::boolean(chance(rng, 0.5));
    return CellValue::number(Decimal(uniform(rng, 0, 4)) + (chance(rng, 0.2) ? Decimal::parse("0.5") : Decimal(0)));
  };
  for (int t = 0; t < tables; ++t) {
    Sheet s;
    s.name = t == 0 ? "SecDI" : "SecDI1";
    s.first_data_row = first;
    s.last_data_row = last;
    int columns = uniform(rng, 2, 4);
    for (int c = 0; c < columns; ++c) {
      int col = 2 + c * 3;
      s.columns.push_back({column_letters(col), "Tab" + column_letters(t + 1) + "Col" + column_letters(c + 1)});
      Kind kind = column_kind();
      for (int row = first; row <= last; ++row) {
        if (auto v = value(kind)) s.cells[CellAddress{"", col, row}.a1()] = CellContent::literal(*v);
      }
    }
    w.sheets.push_back(std::move(s));
  }
  Sheet host;
  host.name = "HOST";
  host.first_data_row = first;
  host.last_data_row = last;
  host.columns.push_back({"B", "Anchor"});
  Kind anchor_kind = column_kind();
  for (int row = first; row <= last; ++row) {
    if (auto v = value(anchor_kind)) host.cells[CellAddress{"", 2, row}.a1()] = CellContent::literal(*v);
  }
  w.sheets.push_back(std::move(host));
  check_invariants(w);
  return w;
}

Workbook random_role_workbook(Rng& rng) {
  Workbook w = random_workbook(rng, {4, 20});
  for (auto& s : w.sheets) {
    int r = uniform(rng, 0, 2);
    s.role = r == 0 ? SheetRole::Input : r == 1 ? SheetRole::Output : SheetRole::Calculation;
  }
  return w;
}

Mutation random_mutation(Rng& rng, const Workbook& w) {
  Mutation m{w, "", ""};
  for (;;) {
    Workbook after = w;
    Sheet& s = after.sheets[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(after.sheets.size()) - 1))];
    m.sheet = s.name;
    int kind = uniform(rng, 0, 8);
    std::string where = CellAddress{"", uniform(rng, 1, 14), uniform(rng, 1, 16)}.a1();
    switch (kind) {
      case 0: {  // literal value
        auto it = s.cells.find(where);
        if (it == s.cells.end() || it->second.is_formula()) continue;
        CellValue v = it->second.literal_value;
        it->second.literal_value = v.is_number() ? CellValue::number(v.as_number() + Decimal(1)) : CellValue::number(7);
        m.what = "literal " + where;
        break;
      }
      case 1: {  // formula text
        auto it = s.cells.find(where);
        if (it == s.cells.end() || !it->second.is_formula()) continue;
        it->second.formula_text = "=" + std::to_string(uniform(rng, 0, 99)) + "+0.5";
        it->second.is_array = false;
        m.what = "formula " + where;
        break;
      }
      case 2: {  // new cell
        if (s.cells.count(where)) continue;
        s.cells[where] = chance(rng, 0.5) ? CellContent::literal(CellValue::number(uniform(rng, 0, 9)))
                                          : CellContent::formula("=1+" + std::to_string(uniform(rng, 0, 9)));
        m.what = "add " + where;
        break;
      }
      case 3: {  // cell removed
        if (s.cells.empty()) continue;
        auto it = s.cells.begin();
        std::advance(it, uniform(rng, 0, static_cast<int>(s.cells.size()) - 1));
        bool named = false;
        for (const auto& [n, a] : s.named_cells) named = named || a == it->first;
        if (named) continue;
        m.what = "remove " + it->first;
        s.cells.erase(it);
        break;
      }
      case 4: {  // new named cell
        bool used = false;
        for (const auto& [n, a] : s.named_cells) used = used || a == where;
        std::string name = "Added_" + std::to_string(uniform(rng, 0, 999));
        if (used || s.named_cells.count(name) || s.column_by_name(name)) continue;
        s.named_cells[name] = where;
        m.what = "name " + name;
        break;
      }
      case 5: {  // named cell retargeted
        if (s.named_cells.empty()) continue;
        auto it = s.named_cells.begin();
        std::advance(it, uniform(rng, 0, static_cast<int>(s.named_cells.size()) - 1));
        bool used = it->second == where;
        for (const auto& [n, a] : s.named_cells) used = used || a == where;
        if (used) continue;
        it->second = where;
        m.what = "retarget " + it->first;
        break;
      }
      case 6: {  // data region
        s.last_data_row += uniform(rng, 1, 3);
        m.what = "data region";
        break;
      }
      case 7: {  // role
        SheetRole r = static_cast<SheetRole>(uniform(rng, 0, 2));
        if (r == s.role) continue;
        s.role = r;
        m.what = "role";
        break;
      }
      default: {  // new sheet
        Sheet n;
        n.name = "Extra" + column_letters(uniform(rng, 1, 26));
        if (after.find_sheet(n.name)) continue;
        int r = uniform(rng, 0, 2);
        n.role = r == 0 ? SheetRole::Input : r == 1 ? SheetRole::Output : SheetRole::Calculation;
        m.sheet = n.name;
        m.what = "sheet " + n.name;
        after.sheets.push_back(std::move(n));
        break;
      }
    }
    m.after = std::move(after);
    return m;
  }
}

}  // namespace nmd::testing

namespace nmd::testing {

const std::vector<ScriptedCommit>& model_history_script() {
  static const std::vector<ScriptedCommit> script = {
      {true, "Anomalies & overrides further changes - had to save as new version due to ...", "429660", "09/04/2009 14:34"},
      {true, "Anomalies & Overrides further changes.", "429660", "09/04/2009 15:53"},
      {true, "Anomalies & Overrides further changes.", "429660", "09/04/2009 16:55"},
      {true, "Anomalies & Overrides further changes.", "429660", "17/04/2009 12:41"},
      {false, "Anomalies & Overrides further change.", "429660", "20/04/2009 12:48"},
      {false, "Further Anomalies & Overrides.", "429660", "21/04/2009 16:53"},
      {false, "Further Anomalies and Overrides.", "429660", "22/04/2009 12:00"},
      {true, "Fix for Input bindings on DI input sheet.", "429660", "28/04/2009 13:02"},
      {false, "Further change for Anomalies and Overrides.", "429660", "28/04/2009 16:05"},
      {false, "Update to Security Type OID lookup to include Other.", "429660", "18/05/2009 09:59"},
      {false, "A&D UAT Unit Test Folder added", "921024", "20/05/2009 15:41"},
      {false, "Removal of spurious validation on input_security sheet", "427240", "21/05/2009 16:07"},
      {false, "R17 Version passed to CIT 26 05 2009", "427240", "26/05/2009 10:50"},
      {true, "R17 Version passed to CIT 26 05 2009", "427240", "26/05/2009 10:55"},
  };
  return script;
}

const char* const kModelHistoryReport =
    "Revision\tName\tModified By\tModified On\n"
    "Version 87\t\t\t\n"
    "1\tAnomalies & overrides further changes - had to save as new version due to ...\t429660\t09/04/2009 14:34\n"
    "Version 88\t\t\t\n"
    "1\tAnomalies & Overrides further changes.\t429660\t09/04/2009 15:53\n"
    "Version 89\t\t\t\n"
    "1\tAnomalies & Overrides further changes.\t429660\t09/04/2009 16:55\n"
    "Version 90\t\t\t\n"
    "1\tAnomalies & Overrides further changes.\t429660\t17/04/2009 12:41\n"
    "2\tAnomalies & Overrides further change.\t429660\t20/04/2009 12:48\n"
    "3\tFurther Anomalies & Overrides.\t429660\t21/04/2009 16:53\n"
    "4\tFurther Anomalies and Overrides.\t429660\t22/04/2009 12:00\n"
    "Version 91\t\t\t\n"
    "1\tFix for Input bindings on DI input sheet.\t429660\t28/04/2009 13:02\n"
    "2\tFurther change for Anomalies and Overrides.\t429660\t28/04/2009 16:05\n"
    "3\tUpdate to Security Type OID lookup to include Other.\t429660\t18/05/2009 09:59\n"
    "4\tA&D UAT Unit Test Folder added\t921024\t20/05/2009 15:41\n"
    "5\tRemoval of spurious validation on input_security sheet\t427240\t21/05/2009 16:07\n"
    "6\tR17 Version passed to CIT 26 05 2009\t427240\t26/05/2009 10:50\n"
    "Version 92\t\t\t\n"
    "1\tR17 Version passed to CIT 26 05 2009\t427240\t26/05/2009 10:55\n";

Workbook replay_model_history(AuditLog& log, Workbook base, bool archive_last) {
  const auto& script = model_history_script();
  Workbook current = std::move(base);
  int n = 0;
  for (const auto& step : script) {
    ++n;
    Workbook next = current;
    // Input edits change the version, calculation edits the revision.
    SheetRole wanted = step.version_change ? SheetRole::Input : SheetRole::Calculation;
    Sheet* target = nullptr;
    for (auto& s : next.sheets) {
      if (s.role == wanted) target = &s;
    }
    if (!target) throw PreconditionError("base workbook lacks a sheet to edit");
    target->cells["Z" + std::to_string(n)] = CellContent::literal(CellValue::number(n));
    bool archive = archive_last && n == static_cast<int>(script.size());
    current = log.commit(current, next, step.user, Timestamp::parse(step.when), step.description, archive).workbook;
  }
  return current;
}

}  // namespace nmd::testing
