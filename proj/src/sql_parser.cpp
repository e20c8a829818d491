#include "tasql/sql_parser.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

namespace tasql::sql {

namespace {

enum class TokenKind { eof, ident, quoted_ident, string, number_int, number_real, punct };

struct Token {
  TokenKind kind = TokenKind::eof;
  std::string text;  // idents as written, strings unescaped, punct verbatim
  std::size_t pos = 0;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(text[i] == '*' && text[i + 1] == '/')) ++i;
      i = (i + 1 < n) ? i + 2 : n;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      ++i;
      while (i < n && is_ident_char(text[i])) ++i;
      tokens.push_back({TokenKind::ident, text.substr(start, i - start), start});
      continue;
    }
    if (c == '\'') {
      std::string value;
      ++i;
      while (i < n) {
        if (text[i] == '\'') {
          if (i + 1 < n && text[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          break;
        }
        value += text[i++];
      }
      if (i >= n) throw SqlParseError("unterminated string literal", start);
      ++i;  // closing quote
      tokens.push_back({TokenKind::string, value, start});
      continue;
    }
    if (c == '"' || c == '`' || c == '[') {
      const char close = (c == '[') ? ']' : c;
      std::string value;
      ++i;
      while (i < n) {
        if (text[i] == close) {
          if (close != ']' && i + 1 < n && text[i + 1] == close) {
            value += close;
            i += 2;
            continue;
          }
          break;
        }
        value += text[i++];
      }
      if (i >= n) throw SqlParseError("unterminated quoted identifier", start);
      ++i;
      tokens.push_back({TokenKind::quoted_ident, value, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      bool real = false;
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i < n && text[i] == '.') {
        real = true;
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
      if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
          real = true;
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
      }
      tokens.push_back({real ? TokenKind::number_real : TokenKind::number_int,
                        text.substr(start, i - start), start});
      continue;
    }
    // multi-char operators first
    static const char* two_char[] = {"<=", ">=", "!=", "<>", "==", "||"};
    bool matched = false;
    for (const char* op : two_char) {
      if (c == op[0] && i + 1 < n && text[i + 1] == op[1]) {
        tokens.push_back({TokenKind::punct, std::string(op), start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string single_chars = "(),.*/+-%=<>;?&|~";
    if (single_chars.find(c) != std::string::npos) {
      tokens.push_back({TokenKind::punct, std::string(1, c), start});
      ++i;
      continue;
    }
    throw SqlParseError(std::string("unexpected character '") + c + "'", start);
  }
  tokens.push_back({TokenKind::eof, "", n});
  return tokens;
}

// Clause keywords that terminate implicit aliases.
const std::set<std::string>& alias_stoppers() {
  static const std::set<std::string> kw = {
      "where", "group", "order",  "limit", "having", "union", "intersect",
      "except", "join",  "inner", "left",  "right",  "cross", "on",
      "using",  "from",  "select", "as",   "set",    "natural", "full", "offset"};
  return kw;
}

class Parser {
public:
  explicit Parser(const std::string& text) : text_(text), tokens_(tokenize(text)) {}

  SqlAst parse_statement() {
    if (at_keyword("WITH")) {
      throw UnsupportedError("WITH (common table expressions) is outside the supported subset");
    }
    if (!at_keyword("SELECT")) {
      const Token& tok = peek();
      if (tok.kind == TokenKind::ident) {
        static const std::set<std::string> other_statements = {
            "insert", "update", "delete", "create", "drop", "alter",  "pragma",
            "attach", "begin",  "commit", "vacuum", "replace", "explain"};
        if (other_statements.count(ascii_lower(tok.text))) {
          throw UnsupportedError("statement kind '" + ascii_upper(tok.text) +
                                 "' is outside the supported subset");
        }
      }
      throw SqlParseError("expected SELECT", tok.pos);
    }
    SqlAst ast;
    ast.stmt = parse_select_stmt();
    if (at_punct(";")) advance();
    if (peek().kind != TokenKind::eof) {
      throw SqlParseError("trailing input after statement", peek().pos);
    }
    return ast;
  }

private:
  const std::string& text_;
  std::vector<Token> tokens_;
  std::size_t index_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = index_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& advance() { return tokens_[index_ < tokens_.size() - 1 ? index_++ : index_]; }

  bool at_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::punct && tok.text == p;
  }
  bool at_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::ident && iequals(tok.text, kw);
  }
  bool eat_keyword(std::string_view kw) {
    if (!at_keyword(kw)) return false;
    advance();
    return true;
  }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) {
      throw SqlParseError("expected '" + std::string(p) + "'", peek().pos);
    }
    advance();
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) {
      throw SqlParseError("expected " + std::string(kw), peek().pos);
    }
    advance();
  }

  SelectPtr parse_select_stmt() {
    auto stmt = std::make_unique<SelectStmt>();
    stmt->core = parse_select_core();
    while (true) {
      if (at_keyword("UNION")) {
        advance();
        CompoundOp op = CompoundOp::union_;
        if (eat_keyword("ALL")) op = CompoundOp::union_all;
        stmt->compounds.emplace_back(op, parse_select_core());
      } else if (at_keyword("INTERSECT")) {
        advance();
        stmt->compounds.emplace_back(CompoundOp::intersect, parse_select_core());
      } else if (at_keyword("EXCEPT")) {
        advance();
        stmt->compounds.emplace_back(CompoundOp::except, parse_select_core());
      } else {
        break;
      }
    }
    if (eat_keyword("ORDER")) {
      expect_keyword("BY");
      do {
        OrderingTerm term;
        term.expr = parse_expr();
        if (eat_keyword("DESC")) {
          term.descending = true;
        } else {
          eat_keyword("ASC");
        }
        stmt->order_by.push_back(std::move(term));
      } while (at_punct(",") && (advance(), true));
    }
    if (eat_keyword("LIMIT")) {
      stmt->limit = parse_expr();
      if (at_punct(",")) {
        advance();
        // LIMIT offset, count
        stmt->offset = std::move(stmt->limit);
        stmt->limit = parse_expr();
      } else if (eat_keyword("OFFSET")) {
        stmt->offset = parse_expr();
      }
    }
    return stmt;
  }

  SelectCore parse_select_core() {
    expect_keyword("SELECT");
    SelectCore core;
    if (eat_keyword("DISTINCT")) {
      core.distinct = true;
    } else {
      eat_keyword("ALL");
    }
    do {
      core.columns.push_back(parse_result_column());
    } while (at_punct(",") && (advance(), true));

    if (eat_keyword("FROM")) {
      core.from = parse_from_clause();
    }
    if (eat_keyword("WHERE")) {
      core.where = parse_expr();
    }
    if (at_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      do {
        core.group_by.push_back(parse_expr());
      } while (at_punct(",") && (advance(), true));
    }
    if (eat_keyword("HAVING")) {
      core.having = parse_expr();
    }
    return core;
  }

  ResultColumn parse_result_column() {
    ResultColumn column;
    if (at_punct("*")) {
      advance();
      column.expr = make_expr<StarExpr>();
      return column;
    }
    if ((peek().kind == TokenKind::ident || peek().kind == TokenKind::quoted_ident) &&
        at_punct(".", 1) && at_punct("*", 2)) {
      std::string table = advance().text;
      advance();
      advance();
      column.expr = make_expr<StarExpr>(std::move(table));
      return column;
    }
    column.expr = parse_expr();
    if (eat_keyword("AS")) {
      column.alias = parse_alias_name();
    } else if (implicit_alias_ahead()) {
      column.alias = advance().text;
    }
    return column;
  }

  bool implicit_alias_ahead() const {
    const Token& tok = peek();
    if (tok.kind == TokenKind::quoted_ident) return true;
    if (tok.kind != TokenKind::ident) return false;
    return alias_stoppers().count(ascii_lower(tok.text)) == 0;
  }

  std::string parse_alias_name() {
    const Token& tok = peek();
    if (tok.kind == TokenKind::ident || tok.kind == TokenKind::quoted_ident ||
        tok.kind == TokenKind::string) {
      return advance().text;
    }
    throw SqlParseError("expected alias name", tok.pos);
  }

  std::vector<FromItem> parse_from_clause() {
    std::vector<FromItem> items;
    FromItem first;
    first.ref = parse_table_or_subquery();
    items.push_back(std::move(first));
    while (true) {
      FromItem item;
      if (at_punct(",")) {
        advance();
        item.join = JoinKind::comma;
      } else if (at_keyword("JOIN")) {
        advance();
        item.join = JoinKind::inner;
      } else if (at_keyword("INNER")) {
        advance();
        expect_keyword("JOIN");
        item.join = JoinKind::inner;
      } else if (at_keyword("LEFT")) {
        advance();
        eat_keyword("OUTER");
        expect_keyword("JOIN");
        item.join = JoinKind::left;
      } else if (at_keyword("CROSS")) {
        advance();
        expect_keyword("JOIN");
        item.join = JoinKind::cross;
      } else {
        break;
      }
      item.ref = parse_table_or_subquery();
      if (eat_keyword("ON")) {
        item.on = parse_expr();
      } else if (eat_keyword("USING")) {
        expect_punct("(");
        do {
          item.using_columns.push_back(parse_alias_name());
        } while (at_punct(",") && (advance(), true));
        expect_punct(")");
      }
      items.push_back(std::move(item));
    }
    return items;
  }

  TableRef parse_table_or_subquery() {
    TableRef ref;
    if (at_punct("(")) {
      advance();
      if (!at_keyword("SELECT")) {
        throw SqlParseError("expected SELECT in derived table", peek().pos);
      }
      ref.subquery = parse_select_stmt();
      expect_punct(")");
    } else {
      const Token& tok = peek();
      if (tok.kind != TokenKind::ident && tok.kind != TokenKind::quoted_ident) {
        throw SqlParseError("expected table name", tok.pos);
      }
      ref.table = advance().text;
    }
    if (eat_keyword("AS")) {
      ref.alias = parse_alias_name();
    } else if (implicit_alias_ahead()) {
      ref.alias = advance().text;
    }
    return ref;
  }

  // ---- expressions ----

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    auto lhs = parse_and();
    while (at_keyword("OR")) {
      advance();
      auto rhs = parse_and();
      lhs = make_expr<BinaryExpr>("OR", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_and() {
    auto lhs = parse_not();
    while (at_keyword("AND")) {
      advance();
      auto rhs = parse_not();
      lhs = make_expr<BinaryExpr>("AND", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at_keyword("NOT") && !at_keyword("EXISTS", 1)) {
      advance();
      return make_expr<UnaryExpr>("NOT", parse_not());
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    auto lhs = parse_additive();
    while (true) {
      if (at_punct("=") || at_punct("==") || at_punct("!=") || at_punct("<>") || at_punct("<") ||
          at_punct("<=") || at_punct(">") || at_punct(">=")) {
        std::string op = advance().text;
        auto rhs = parse_additive();
        lhs = make_expr<BinaryExpr>(std::move(op), std::move(lhs), std::move(rhs));
        continue;
      }
      if (at_keyword("IS")) {
        advance();
        bool negated = eat_keyword("NOT");
        if (eat_keyword("NULL")) {
          lhs = make_expr<IsNullExpr>(std::move(lhs), negated);
        } else {
          auto rhs = parse_additive();
          lhs = make_expr<BinaryExpr>(negated ? "IS NOT" : "IS", std::move(lhs), std::move(rhs));
        }
        continue;
      }
      bool negated = false;
      std::size_t mark = index_;
      if (at_keyword("NOT")) {
        advance();
        negated = true;
      }
      if (at_keyword("BETWEEN")) {
        advance();
        auto low = parse_additive();
        expect_keyword("AND");
        auto high = parse_additive();
        lhs = make_expr<BetweenExpr>(std::move(lhs), negated, std::move(low), std::move(high));
        continue;
      }
      if (at_keyword("IN")) {
        advance();
        expect_punct("(");
        InExpr in;
        in.lhs = std::move(lhs);
        in.negated = negated;
        if (at_keyword("SELECT")) {
          in.subquery = parse_select_stmt();
        } else if (!at_punct(")")) {
          do {
            in.list.push_back(parse_expr());
          } while (at_punct(",") && (advance(), true));
        }
        expect_punct(")");
        lhs = make_expr<InExpr>(std::move(in));
        continue;
      }
      if (at_keyword("LIKE") || at_keyword("GLOB")) {
        std::string op = ascii_upper(advance().text);
        if (negated) op = "NOT " + op;
        auto rhs = parse_additive();
        lhs = make_expr<BinaryExpr>(std::move(op), std::move(lhs), std::move(rhs));
        continue;
      }
      if (negated) {
        index_ = mark;  // bare NOT belongs to parse_not
      }
      break;
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (at_punct("+") || at_punct("-")) {
      std::string op = advance().text;
      auto rhs = parse_multiplicative();
      lhs = make_expr<BinaryExpr>(std::move(op), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    auto lhs = parse_concat();
    while (at_punct("*") || at_punct("/") || at_punct("%")) {
      std::string op = advance().text;
      auto rhs = parse_concat();
      lhs = make_expr<BinaryExpr>(std::move(op), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_concat() {
    auto lhs = parse_unary();
    while (at_punct("||")) {
      advance();
      auto rhs = parse_unary();
      lhs = make_expr<BinaryExpr>("||", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_punct("-") || at_punct("+")) {
      std::string op = advance().text;
      return make_expr<UnaryExpr>(std::move(op), parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::number_int: {
        advance();
        return make_expr<Literal>(Literal{Literal::Kind::integer, tok.text});
      }
      case TokenKind::number_real: {
        advance();
        return make_expr<Literal>(Literal{Literal::Kind::real, tok.text});
      }
      case TokenKind::string: {
        advance();
        return make_expr<Literal>(Literal{Literal::Kind::text, tok.text});
      }
      case TokenKind::punct: {
        if (tok.text == "(") {
          advance();
          if (at_keyword("SELECT")) {
            auto select = parse_select_stmt();
            expect_punct(")");
            return make_expr<SubqueryExpr>(std::move(select));
          }
          auto inner = parse_expr();
          expect_punct(")");
          return inner;
        }
        if (tok.text == "*") {
          advance();
          return make_expr<StarExpr>();
        }
        break;
      }
      case TokenKind::quoted_ident:
      case TokenKind::ident: {
        if (tok.kind == TokenKind::ident) {
          if (iequals(tok.text, "NULL")) {
            advance();
            return make_expr<Literal>(Literal{Literal::Kind::null_, "NULL"});
          }
          if (iequals(tok.text, "CASE")) return parse_case();
          if (iequals(tok.text, "CAST")) return parse_cast();
          if (iequals(tok.text, "EXISTS") || (iequals(tok.text, "NOT") && at_keyword("EXISTS", 1))) {
            bool negated = false;
            if (iequals(tok.text, "NOT")) {
              advance();
              negated = true;
            }
            advance();  // EXISTS
            expect_punct("(");
            auto select = parse_select_stmt();
            expect_punct(")");
            return make_expr<ExistsExpr>(std::move(select), negated);
          }
        }
        std::string first = advance().text;
        if (at_punct("(")) {
          return parse_function_call(std::move(first));
        }
        if (at_punct(".") && (peek(1).kind == TokenKind::ident ||
                              peek(1).kind == TokenKind::quoted_ident)) {
          advance();
          std::string column = advance().text;
          return make_expr<ColumnExpr>(std::move(first), std::move(column));
        }
        return make_expr<ColumnExpr>(std::string(), std::move(first));
      }
      default:
        break;
    }
    throw SqlParseError("unexpected token '" + tok.text + "'", tok.pos);
  }

  ExprPtr parse_function_call(std::string name) {
    expect_punct("(");
    FunctionCall call;
    call.name = std::move(name);
    if (at_punct("*")) {
      advance();
      call.star_arg = true;
    } else if (!at_punct(")")) {
      if (eat_keyword("DISTINCT")) call.distinct = true;
      do {
        call.args.push_back(parse_expr());
      } while (at_punct(",") && (advance(), true));
    }
    expect_punct(")");
    return make_expr<FunctionCall>(std::move(call));
  }

  ExprPtr parse_case() {
    expect_keyword("CASE");
    CaseExpr case_expr;
    if (!at_keyword("WHEN")) {
      case_expr.base = parse_expr();
    }
    while (eat_keyword("WHEN")) {
      auto condition = parse_expr();
      expect_keyword("THEN");
      auto value = parse_expr();
      case_expr.whens.emplace_back(std::move(condition), std::move(value));
    }
    if (case_expr.whens.empty()) {
      throw SqlParseError("CASE requires at least one WHEN", peek().pos);
    }
    if (eat_keyword("ELSE")) {
      case_expr.else_expr = parse_expr();
    }
    expect_keyword("END");
    return make_expr<CaseExpr>(std::move(case_expr));
  }

  ExprPtr parse_cast() {
    expect_keyword("CAST");
    expect_punct("(");
    auto operand = parse_expr();
    expect_keyword("AS");
    std::string type_name;
    while (peek().kind == TokenKind::ident) {
      if (!type_name.empty()) type_name += " ";
      type_name += advance().text;
    }
    if (type_name.empty()) {
      throw SqlParseError("expected type name in CAST", peek().pos);
    }
    if (at_punct("(")) {
      advance();
      type_name += "(";
      bool first = true;
      while (!at_punct(")")) {
        if (!first) type_name += ",";
        first = false;
        type_name += advance().text;
        if (at_punct(",")) advance();
      }
      advance();
      type_name += ")";
    }
    expect_punct(")");
    return make_expr<CastExpr>(std::move(operand), std::move(type_name));
  }
};

}  // namespace

SqlAst parse_sql(const std::string& text) {
  Parser parser(text);
  return parser.parse_statement();
}

}  // namespace tasql::sql
