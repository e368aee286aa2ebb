// SPDX-License-Identifier: Apache-2.0
// Recursive-descent parser for both surface syntaxes.
//
//   formula    := ['='] comparison
//   comparison := additive (CMP additive)*
//   additive   := term (('+' | '-') term)*
//   term       := primary (('*' | '/') primary)*
//   primary    := number | '-' number | string | TRUE | FALSE
//               | FN '(' args ')' | AGG '(' name '[' cond (AND cond)* ']' ')'
//               | ref | name | '(' comparison ')'
#include <cctype>

#include "nmd/errors.h"
#include "nmd/formula.h"

namespace nmd {

namespace {

bool is_word_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

class Parser {
 public:
  Parser(std::string_view src, bool allow_names)
      : src_(src), allow_names_(allow_names) {}

  Expr parse() {
    skip_ws();
    if (peek() == '=') ++pos_;
    Expr e = parse_comparison();
    skip_ws();
    if (!at_end()) error("unexpected '" + std::string(1, peek()) + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const { throw ParseError(pos_, msg); }
  [[noreturn]] void error_at(std::size_t at, const std::string& msg) const {
    throw ParseError(at, msg);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (at_end()) error(std::string("unexpected end of formula, expected '") + c + "'");
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::optional<BinaryOperator> take_comparison() {
    skip_ws();
    char a = peek(), b = peek(1);
    if (a == '<' && b == '=') { pos_ += 2; return BinaryOperator::Le; }
    if (a == '>' && b == '=') { pos_ += 2; return BinaryOperator::Ge; }
    if (a == '<' && b == '>') { pos_ += 2; return BinaryOperator::Ne; }
    if (a == '=') { ++pos_; return BinaryOperator::Eq; }
    if (a == '<') { ++pos_; return BinaryOperator::Lt; }
    if (a == '>') { ++pos_; return BinaryOperator::Gt; }
    return std::nullopt;
  }

  Expr parse_comparison() {
    Expr lhs = parse_additive();
    while (auto op = take_comparison()) {
      Expr rhs = parse_additive();
      lhs = make_binary(*op, lhs, rhs);
    }
    return lhs;
  }

  Expr parse_additive() {
    Expr lhs = parse_term();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      Expr rhs = parse_term();
      lhs = make_binary(c == '+' ? BinaryOperator::Add : BinaryOperator::Sub, lhs, rhs);
    }
  }

  Expr parse_term() {
    Expr lhs = parse_primary();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      Expr rhs = parse_primary();
      lhs = make_binary(c == '*' ? BinaryOperator::Mul : BinaryOperator::Div, lhs, rhs);
    }
  }

  Decimal read_number() {
    std::size_t start = pos_;
    while (is_digit(peek())) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
      pos_ += 2;
      while (is_digit(peek())) ++pos_;
    }
    auto d = Decimal::try_parse(src_.substr(start, pos_ - start));
    if (!d) error_at(start, "malformed number");
    return *d;
  }

  std::string read_string() {
    std::size_t start = pos_;
    ++pos_;  // opening quote
    std::string out;
    for (;;) {
      if (at_end()) error_at(start, "unterminated string literal");
      char c = src_[pos_++];
      if (c == '"') {
        if (peek() == '"') {
          out += '"';
          ++pos_;
          continue;
        }
        return out;
      }
      out += c;
    }
  }

  std::string read_quoted_sheet() {
    std::size_t start = pos_;
    ++pos_;
    std::string out;
    for (;;) {
      if (at_end()) error_at(start, "unterminated sheet name");
      char c = src_[pos_++];
      if (c == '\'') {
        if (peek() == '\'') {
          out += '\'';
          ++pos_;
          continue;
        }
        if (out.empty()) error_at(start, "empty sheet name");
        return out;
      }
      out += c;
    }
  }

  std::string read_word() {
    std::size_t start = pos_;
    while (is_word_char(peek())) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  struct A1Part {
    int column;
    int row;
    bool abs_column;
    bool abs_row;
  };

  // Matches `$?[A-Za-z]{1,2}$?[0-9]+` not followed by a word character,
  // '(' or '!'. Leaves pos_ untouched when there is no match.
  std::optional<A1Part> try_a1_part() {
    std::size_t p = pos_;
    auto at = [&](std::size_t i) { return i < src_.size() ? src_[i] : '\0'; };
    A1Part part{};
    if (at(p) == '$') { part.abs_column = true; ++p; }
    std::size_t letters_start = p;
    while (std::isalpha(static_cast<unsigned char>(at(p)))) ++p;
    auto col = column_index(src_.substr(letters_start, p - letters_start));
    if (!col) return std::nullopt;
    if (at(p) == '$') { part.abs_row = true; ++p; }
    std::size_t digits_start = p;
    long row = 0;
    while (is_digit(at(p))) {
      row = row * 10 + (at(p) - '0');
      if (row > kMaxRow) return std::nullopt;
      ++p;
    }
    if (p == digits_start || row < 1 || at(digits_start) == '0') return std::nullopt;
    char next = at(p);
    if (is_word_char(next) || next == '(' || next == '!' || next == '\'') return std::nullopt;
    part.column = *col;
    part.row = static_cast<int>(row);
    pos_ = p;
    return part;
  }

  Expr parse_reference(std::string sheet, std::size_t start) {
    auto first = try_a1_part();
    if (!first) error_at(start, "malformed cell reference");
    if (peek() != ':') {
      return make_cell(CellRef{std::move(sheet), first->column, first->row,
                               first->abs_column, first->abs_row});
    }
    ++pos_;
    auto last = try_a1_part();
    if (!last) error("malformed range end");
    if (last->column != first->column) {
      error_at(start, "only single-column ranges are supported");
    }
    if (last->row < first->row) error_at(start, "range rows are reversed");
    RangeRef r;
    r.sheet = std::move(sheet);
    r.column = first->column;
    r.first_row = first->row;
    r.last_row = last->row;
    r.abs_column_first = first->abs_column;
    r.abs_row_first = first->abs_row;
    r.abs_column_last = last->abs_column;
    r.abs_row_last = last->abs_row;
    return make_range(r);
  }

  Expr name_ref(QualifiedName q, std::size_t start) {
    if (!allow_names_) {
      error_at(start, "defined name '" + (q.sheet.empty() ? q.name : q.sheet + "." + q.name) +
                          "' is not allowed in A1 form");
    }
    return make_name(std::move(q));
  }

  Expr parse_primary() {
    skip_ws();
    std::size_t start = pos_;
    if (at_end()) error("unexpected end of formula");
    char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_comparison();
      expect(')');
      return inner;
    }
    if (c == '"') return make_text(read_string());
    if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return make_number(read_number());
    if (c == '-') {
      ++pos_;
      skip_ws();
      if (is_digit(peek()) || (peek() == '.' && is_digit(peek(1)))) {
        return make_number(-read_number());
      }
      error_at(start, "unary minus applies to numeric literals only");
    }
    if (c == '\'') {
      std::string sheet = read_quoted_sheet();
      if (peek() == '!') {
        ++pos_;
        return parse_reference(to_upper(sheet), start);
      }
      if (peek() == '.' && is_word_start(peek(1))) {
        ++pos_;
        std::string name = read_word();
        if (name.back() == '.') error_at(start, "malformed name");
        return name_ref(QualifiedName{std::move(sheet), std::move(name)}, start);
      }
      error("expected '!' or '.' after sheet name");
    }
    if (c == '$') return parse_reference("", start);
    if (!is_word_start(c)) error("unexpected '" + std::string(1, c) + "'");

    if (auto part = try_a1_part()) {
      pos_ = start;
      return parse_reference("", start);
    }
    std::string word = read_word();
    if (peek() == '!') {
      if (word.find('.') != std::string::npos) {
        error_at(start, "sheet names containing '.' must be quoted");
      }
      ++pos_;
      return parse_reference(to_upper(word), start);
    }
    std::size_t after_word = pos_;
    skip_ws();
    if (peek() == '(') {
      auto fn = parse_function_name(word);
      if (!fn) error_at(start, "unknown function '" + word + "'");
      ++pos_;
      return parse_call(*fn, start);
    }
    pos_ = after_word;
    if (iequals(word, "TRUE")) return make_bool(true);
    if (iequals(word, "FALSE")) return make_bool(false);
    if (word.back() == '.') error_at(start, "malformed name '" + word + "'");
    return name_ref(QualifiedName{"", word}, start);
  }

  Expr parse_call(Function fn, std::size_t start) {
    std::vector<Expr> args;
    skip_ws();
    if (peek() == ')') {
      ++pos_;
    } else {
      for (;;) {
        args.push_back(parse_comparison());
        skip_ws();
        if (at_end()) error("unexpected end of formula, expected ',' or ')'");
        if (peek() == '[' && args.size() == 1 && as_aggregator(fn) && allow_names_) {
          return parse_bracket_clause(*as_aggregator(fn), args.front(), start);
        }
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        error("expected ',' or ')'");
      }
    }
    if (fn == Function::If && (args.size() < 2 || args.size() > 3)) {
      error_at(start, "IF takes 2 or 3 arguments");
    }
    if (fn != Function::If && args.empty()) {
      error_at(start, std::string(function_name(fn)) + " takes at least 1 argument");
    }
    if (auto agg = as_aggregator(fn)) {
      if (auto ac = recognize(*agg, args)) return make_array_conditional(std::move(*ac));
    }
    return make_call(fn, std::move(args));
  }

  static bool is_range_like(const Expr& e) { return as<RangeRef>(e) || as<NameRef>(e); }
  static bool is_scalar_operand(const Expr& e) {
    return as<CellRef>(e) || as<NameRef>(e) || is_literal(e);
  }

  // AGG(IF(range CMP scalar, IF(..., range))) becomes an ArrayConditional.
  static std::optional<ArrayConditional> recognize(Aggregator agg,
                                                   const std::vector<Expr>& args) {
    if (args.size() != 1) return std::nullopt;
    ArrayConditional ac{agg, {}, nullptr};
    Expr cur = args.front();
    for (;;) {
      const auto* call = as<FunctionCall>(cur);
      if (!call || call->fn != Function::If || call->args.size() != 2) return std::nullopt;
      const auto* cond = as<BinaryOp>(call->args[0]);
      if (!cond || !is_comparison(cond->op) || !is_range_like(cond->lhs) ||
          !is_scalar_operand(cond->rhs)) {
        return std::nullopt;
      }
      ac.conditions.push_back(ArrayCondition{cond->lhs, cond->op, cond->rhs});
      const Expr& next = call->args[1];
      if (is_range_like(next)) {
        ac.value = next;
        return ac;
      }
      cur = next;
    }
  }

  Expr parse_bracket_clause(Aggregator agg, const Expr& value, std::size_t start) {
    if (!as<NameRef>(value)) {
      error_at(start, "a bracketed condition must follow a column name");
    }
    ++pos_;  // '['
    ArrayConditional ac{agg, {}, value};
    for (;;) {
      skip_ws();
      std::size_t cond_start = pos_;
      Expr lhs = parse_primary();
      if (!as<NameRef>(lhs)) error_at(cond_start, "condition must start with a column name");
      auto op = take_comparison();
      if (!op) {
        skip_ws();
        std::size_t word_start = pos_;
        std::string word = is_word_start(peek()) ? read_word() : "";
        if (!word.empty()) {
          error_at(word_start, "unsupported connective '" + word + "': only AND is accepted");
        }
        error("expected a comparison operator");
      }
      skip_ws();
      std::size_t rhs_start = pos_;
      Expr rhs = parse_primary();
      if (!as<NameRef>(rhs) && !is_literal(rhs)) {
        error_at(rhs_start, "condition operand must be a column name or a literal");
      }
      ac.conditions.push_back(ArrayCondition{lhs, *op, rhs});
      skip_ws();
      if (at_end()) error("unexpected end of formula, expected ']'");
      if (peek() == ']') {
        ++pos_;
        break;
      }
      std::size_t word_start = pos_;
      std::string word = is_word_start(peek()) ? read_word() : "";
      if (iequals(word, "AND")) continue;
      if (!word.empty()) {
        error_at(word_start, "unsupported connective '" + word + "': only AND is accepted");
      }
      error("expected AND or ']'");
    }
    expect(')');
    return make_array_conditional(std::move(ac));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  bool allow_names_;
};

}  // namespace

Expr parse_a1(std::string_view text) { return Parser(text, false).parse(); }

Expr parse_formula(std::string_view text) { return Parser(text, true).parse(); }

namespace {

Expr resolve(const Expr& e, const Workbook& w, const std::string* host) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NameRef>) {
          if (!n.name.sheet.empty()) {
            const Sheet* s = w.find_sheet(n.name.sheet);
            QualifiedName q{s ? s->name : n.name.sheet, n.name.name};
            resolve_name(w, q);
            return make_name(std::move(q));
          }
          return make_name(resolve_name_text(w, n.name.name, host));
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          return make_binary(n.op, resolve(n.lhs, w, host), resolve(n.rhs, w, host));
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          std::vector<Expr> args;
          for (const auto& a : n.args) args.push_back(resolve(a, w, host));
          return make_call(n.fn, std::move(args));
        } else if constexpr (std::is_same_v<T, ArrayConditional>) {
          ArrayConditional ac{n.aggregator, {}, resolve(n.value, w, host)};
          for (const auto& c : n.conditions) {
            ac.conditions.push_back(
                ArrayCondition{resolve(c.range, w, host), c.op, resolve(c.operand, w, host)});
          }
          return make_array_conditional(std::move(ac));
        } else {
          return e;
        }
      },
      e->v);
}

}  // namespace

Expr resolve_names(const Expr& ast, const Workbook& w, const std::string* host_sheet) {
  return resolve(ast, w, host_sheet);
}

}  // namespace nmd
