#include "tasql/symbolic_plan.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

namespace tasql::talog {

namespace {

const std::set<std::string>& call_names() {
  static const std::set<std::string> names = {"where", "orderby", "limit",
                                              "groupby", "select", "count"};
  return names;
}

const std::set<std::string>& agg_names() {
  static const std::set<std::string> names = {"count", "sum", "avg", "min", "max"};
  return names;
}

struct PlanToken {
  enum class Kind { eof, ident, number, string, punct };
  Kind kind = Kind::eof;
  std::string text;
  std::size_t pos = 0;
};

std::vector<PlanToken> tokenize_line(const std::string& line) {
  std::vector<PlanToken> tokens;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      ++i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
      tokens.push_back({PlanToken::Kind::ident, line.substr(start, i - start), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
      ++i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.')) ++i;
      tokens.push_back({PlanToken::Kind::number, line.substr(start, i - start), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      const char quote = c;
      std::string value;
      ++i;
      while (i < n) {
        if (line[i] == quote) {
          if (i + 1 < n && line[i + 1] == quote) {
            value += quote;
            i += 2;
            continue;
          }
          break;
        }
        value += line[i++];
      }
      if (i >= n) throw SymbolicParseError("unterminated literal in plan line");
      ++i;
      tokens.push_back({PlanToken::Kind::string, value, start});
      continue;
    }
    static const char* two_char[] = {"==", "!=", "<>", ">=", "<="};
    bool matched = false;
    for (const char* op : two_char) {
      if (c == op[0] && i + 1 < n && line[i + 1] == op[1]) {
        tokens.push_back({PlanToken::Kind::punct, op, start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string singles = "=.(),+-*/<>";
    if (singles.find(c) != std::string::npos) {
      tokens.push_back({PlanToken::Kind::punct, std::string(1, c), start});
      ++i;
      continue;
    }
    throw SymbolicParseError(std::string("unexpected character '") + c + "' in plan line");
  }
  tokens.push_back({PlanToken::Kind::eof, "", n});
  return tokens;
}

class LineParser {
public:
  explicit LineParser(const std::string& line) : tokens_(tokenize_line(line)) {}

  Step parse() {
    Step step;
    step.binding = expect_ident("binding name");
    expect_punct("=");
    step.source = expect_ident("source frame");
    if (!at_punct(".")) throw SymbolicParseError("expected '.' after source frame");
    while (at_punct(".")) {
      advance();
      step.ops.push_back(parse_call());
    }
    if (peek().kind != PlanToken::Kind::eof) {
      throw SymbolicParseError("trailing input after plan line");
    }
    return step;
  }

private:
  std::vector<PlanToken> tokens_;
  std::size_t index_ = 0;

  const PlanToken& peek(std::size_t ahead = 0) const {
    const std::size_t i = index_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const PlanToken& advance() { return tokens_[index_ < tokens_.size() - 1 ? index_++ : index_]; }
  bool at_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == PlanToken::Kind::punct && peek(ahead).text == p;
  }
  bool at_ident(std::string_view word, std::size_t ahead = 0) const {
    return peek(ahead).kind == PlanToken::Kind::ident && iequals(peek(ahead).text, word);
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != PlanToken::Kind::ident) {
      throw SymbolicParseError("expected " + what);
    }
    return advance().text;
  }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) throw SymbolicParseError("expected '" + std::string(p) + "'");
    advance();
  }

  StepOp parse_call() {
    std::string name = ascii_lower(expect_ident("function name"));
    if (!call_names().count(name)) throw UnknownFunctionError(name);
    expect_punct("(");
    StepOp op = [&]() -> StepOp {
      if (name == "where") return parse_where();
      if (name == "orderby") return parse_orderby();
      if (name == "limit") return parse_limit();
      if (name == "groupby") return parse_groupby();
      if (name == "select") return parse_select();
      return CountOp{};
    }();
    expect_punct(")");
    return op;
  }

  WhereOp parse_where() {
    WhereOp where;
    if (at_ident("element") && at_punct("=", 1)) {
      advance();
      advance();
    }
    where.element = parse_column_ref();
    expect_punct(",");
    if (at_ident("filter") && at_punct("=", 1)) {
      advance();
      advance();
    }
    where.filter = parse_comparison();
    return where;
  }

  Comparison parse_comparison() {
    Comparison cmp;
    if (peek().kind == PlanToken::Kind::punct && peek().text != ")" && peek().text != ",") {
      static const std::set<std::string> ops = {"=", "==", "!=", "<>", ">", ">=", "<", "<="};
      if (!ops.count(peek().text)) {
        throw SymbolicParseError("expected comparison operator in filter");
      }
      cmp.op = advance().text;
      if (cmp.op == "==") cmp.op = "=";
    }
    cmp.value = parse_literal();
    return cmp;
  }

  PlanLiteral parse_literal() {
    const PlanToken& tok = peek();
    if (tok.kind == PlanToken::Kind::string) {
      advance();
      return PlanLiteral{PlanLiteral::Kind::text, tok.text};
    }
    if (tok.kind == PlanToken::Kind::number) {
      advance();
      return PlanLiteral{PlanLiteral::Kind::number, tok.text};
    }
    if (at_punct("-") && peek(1).kind == PlanToken::Kind::number) {
      advance();
      return PlanLiteral{PlanLiteral::Kind::number, "-" + advance().text};
    }
    if (tok.kind == PlanToken::Kind::ident && iequals(tok.text, "null")) {
      advance();
      return PlanLiteral{PlanLiteral::Kind::null_, "null"};
    }
    if (tok.kind == PlanToken::Kind::ident) {
      // tolerate unquoted single-word values the model sometimes emits
      advance();
      return PlanLiteral{PlanLiteral::Kind::text, tok.text};
    }
    throw SymbolicParseError("expected literal value");
  }

  ColumnRef parse_column_ref() {
    std::string table = expect_ident("table name");
    expect_punct(".");
    std::string column = expect_ident("column name");
    return ColumnRef{std::move(table), std::move(column)};
  }

  bool at_column_ref() const {
    return peek().kind == PlanToken::Kind::ident && at_punct(".", 1) &&
           peek(2).kind == PlanToken::Kind::ident && !at_punct("(", 3);
  }

  bool at_agg() const {
    // frame.func( ...  or bare func( with an aggregate name
    if (peek().kind == PlanToken::Kind::ident && at_punct(".", 1) &&
        peek(2).kind == PlanToken::Kind::ident && at_punct("(", 3)) {
      return agg_names().count(ascii_lower(peek(2).text)) > 0;
    }
    if (peek().kind == PlanToken::Kind::ident && at_punct("(", 1)) {
      return agg_names().count(ascii_lower(peek().text)) > 0;
    }
    return false;
  }

  AggExpr parse_agg() {
    AggExpr agg;
    if (at_punct(".", 1)) {
      agg.frame = advance().text;
      advance();  // '.'
    }
    agg.func = ascii_lower(expect_ident("aggregate name"));
    if (!agg_names().count(agg.func)) throw UnknownFunctionError(agg.func);
    expect_punct("(");
    if (at_punct("*")) {
      advance();
    } else if (!at_punct(")")) {
      agg.arg = parse_column_ref();
    }
    expect_punct(")");
    return agg;
  }

  OrderByOp parse_orderby() {
    OrderByOp order;
    if (at_ident("by") && at_punct("=", 1)) {
      advance();
      advance();
    }
    if (at_agg()) {
      order.by = parse_agg();
    } else {
      order.by = parse_column_ref();
    }
    if (at_punct(",")) {
      advance();
      if (at_ident("desc")) {
        advance();
        order.descending = true;
      } else if (at_ident("asc")) {
        advance();
      } else {
        throw SymbolicParseError("expected asc or desc in orderby");
      }
    } else if (at_ident("desc")) {
      advance();
      order.descending = true;
    } else if (at_ident("asc")) {
      advance();
    }
    return order;
  }

  LimitOp parse_limit() {
    if (peek().kind != PlanToken::Kind::number) {
      throw SymbolicParseError("limit expects a positive integer");
    }
    LimitOp limit;
    limit.n = std::stol(advance().text);
    if (limit.n <= 0) throw SymbolicParseError("limit expects a positive integer");
    return limit;
  }

  GroupByOp parse_groupby() {
    GroupByOp group;
    if (at_ident("by") && at_punct("=", 1)) {
      advance();
      advance();
    }
    group.keys.push_back(parse_column_ref());
    while (at_punct(",")) {
      advance();
      group.keys.push_back(parse_column_ref());
    }
    return group;
  }

  SelectOp parse_select() {
    SelectOp select;
    select.items.push_back(parse_item());
    while (at_punct(",")) {
      advance();
      select.items.push_back(parse_item());
    }
    if (select.items.empty()) throw SymbolicParseError("select requires items");
    return select;
  }

  ItemPtr parse_item() { return parse_additive(); }

  ItemPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (at_punct("+") || at_punct("-")) {
      char op = advance().text[0];
      auto rhs = parse_multiplicative();
      auto node = make_item<ItemBinary>();
      auto& binary = std::get<ItemBinary>(node->node);
      binary.op = op;
      binary.lhs = std::move(lhs);
      binary.rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  ItemPtr parse_multiplicative() {
    auto lhs = parse_factor();
    while (at_punct("*") || at_punct("/")) {
      char op = advance().text[0];
      auto rhs = parse_factor();
      auto node = make_item<ItemBinary>();
      auto& binary = std::get<ItemBinary>(node->node);
      binary.op = op;
      binary.lhs = std::move(lhs);
      binary.rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  ItemPtr parse_factor() {
    if (at_punct("(")) {
      advance();
      auto inner = parse_item();
      expect_punct(")");
      return inner;
    }
    if (peek().kind == PlanToken::Kind::number) {
      return make_item<ItemNumber>(advance().text);
    }
    if (at_punct("-") && peek(1).kind == PlanToken::Kind::number) {
      advance();
      return make_item<ItemNumber>("-" + advance().text);
    }
    if (at_ident("cast") && at_punct("(", 1)) {
      advance();
      advance();
      auto node = make_item<ItemCast>();
      auto& cast = std::get<ItemCast>(node->node);
      cast.operand = parse_item();
      expect_punct(",");
      cast.type = ascii_lower(expect_ident("cast type"));
      if (cast.type != "real") {
        throw SymbolicParseError("cast supports only real");
      }
      expect_punct(")");
      return node;
    }
    if (at_ident("case_when") && at_punct("(", 1)) {
      advance();
      advance();
      ItemCaseWhen case_when;
      case_when.predicate.column = parse_column_ref();
      Comparison cmp = parse_comparison();
      case_when.predicate.op = cmp.op;
      case_when.predicate.value = cmp.value;
      expect_punct(",");
      case_when.then_value = parse_literal();
      expect_punct(",");
      case_when.else_value = parse_literal();
      expect_punct(")");
      return make_item<ItemCaseWhen>(std::move(case_when));
    }
    if (at_agg()) {
      return make_item<ItemAgg>(parse_agg());
    }
    if (at_column_ref()) {
      return make_item<ItemColumn>(parse_column_ref());
    }
    if (peek().kind == PlanToken::Kind::ident && at_punct("(", 1)) {
      throw UnknownFunctionError(peek().text);
    }
    if (peek().kind == PlanToken::Kind::ident && at_punct(".", 1) &&
        peek(2).kind == PlanToken::Kind::ident && at_punct("(", 3)) {
      throw UnknownFunctionError(peek(2).text);
    }
    throw SymbolicParseError("expected select item");
  }
};

// A line is plan-shaped when it starts with `ident = ident.`; such lines are
// parsed for real (so unknown functions surface as typed errors) while
// other lines count as surrounding prose.
bool plan_shaped(const std::string& line) {
  std::size_t i = 0;
  const std::size_t n = line.size();
  auto skip_ws = [&] { while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i; };
  auto skip_ident = [&]() -> bool {
    if (i >= n || !(std::isalpha(static_cast<unsigned char>(line[i])) || line[i] == '_')) {
      return false;
    }
    while (i < n && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
    return true;
  };
  skip_ws();
  if (!skip_ident()) return false;
  skip_ws();
  if (i >= n || line[i] != '=') return false;
  ++i;
  skip_ws();
  if (!skip_ident()) return false;
  return i < n && line[i] == '.';
}

int paren_balance(const std::string& line) {
  int balance = 0;
  bool in_string = false;
  char quote = 0;
  for (char c : line) {
    if (in_string) {
      if (c == quote) in_string = false;
      continue;
    }
    if (c == '\'' || c == '"') {
      in_string = true;
      quote = c;
    } else if (c == '(') {
      ++balance;
    } else if (c == ')') {
      --balance;
    }
  }
  return balance;
}

}  // namespace

SymbolicPlan parse_symbolic(const std::string& text) {
  SymbolicPlan plan;
  const std::vector<std::string> raw_lines = split_lines(text);

  // rejoin physical lines while parentheses stay open
  std::vector<std::string> lines;
  std::string pending;
  int balance = 0;
  for (const std::string& raw : raw_lines) {
    if (pending.empty()) {
      pending = raw;
      balance = paren_balance(raw);
    } else {
      pending += " " + raw;
      balance += paren_balance(raw);
    }
    if (balance <= 0) {
      lines.push_back(pending);
      pending.clear();
      balance = 0;
    }
  }
  if (!pending.empty()) lines.push_back(pending);

  std::set<std::string> bindings;
  std::string first_error;
  bool skipped_leading = false;
  std::vector<std::string> trailing;
  bool done = false;

  for (const std::string& line : lines) {
    if (trim(line).empty()) continue;
    if (done) {
      trailing.push_back(line);
      continue;
    }
    if (!plan_shaped(line)) {
      if (plan.steps.empty()) {
        skipped_leading = true;
      } else {
        done = true;
        trailing.push_back(line);
      }
      continue;
    }
    Step step;
    try {
      step = LineParser(line).parse();
    } catch (const UnknownFunctionError&) {
      throw;
    } catch (const SymbolicParseError& e) {
      if (plan.steps.empty()) {
        if (first_error.empty()) first_error = e.what();
        skipped_leading = true;
      } else {
        done = true;
        trailing.push_back(line);
      }
      continue;
    }
    if (bindings.count(step.binding)) {
      throw SymbolicParseError("binding '" + step.binding + "' defined twice");
    }
    bindings.insert(step.binding);
    const bool is_res = step.binding == "res";
    plan.steps.push_back(std::move(step));
    if (is_res) done = true;
  }

  if (plan.steps.empty()) {
    throw SymbolicParseError(first_error.empty() ? "no symbolic plan lines found" : first_error);
  }
  if (plan.steps.back().binding != "res") {
    throw SymbolicParseError("plan has no final res binding");
  }
  if (skipped_leading) {
    plan.warnings.push_back("skipped prose before the first plan line");
  }
  if (!trailing.empty()) {
    plan.trailing_text = join(trailing, "\n");
    plan.warnings.push_back("ignored trailing text after the res line");
  }
  return plan;
}

namespace {

std::string render_literal(const PlanLiteral& lit) {
  switch (lit.kind) {
    case PlanLiteral::Kind::text: {
      std::string out = "'";
      for (char c : lit.lexeme) {
        if (c == '\'') out += "''";
        else out += c;
      }
      return out + "'";
    }
    case PlanLiteral::Kind::number:
      return lit.lexeme;
    case PlanLiteral::Kind::null_:
      return "null";
  }
  return lit.lexeme;
}

std::string render_agg(const AggExpr& agg) {
  std::string out;
  if (!agg.frame.empty()) out += agg.frame + ".";
  out += agg.func + "(";
  if (agg.arg) out += agg.arg->display();
  out += ")";
  return out;
}

int item_precedence(const ItemExpr& item) {
  if (const auto* binary = std::get_if<ItemBinary>(&item.node)) {
    return (binary->op == '+' || binary->op == '-') ? 1 : 2;
  }
  return 3;
}

std::string render_item_impl(const ItemExpr& item) {
  return std::visit(
      [&](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ItemColumn>) {
          return node.ref.display();
        } else if constexpr (std::is_same_v<T, ItemNumber>) {
          return node.lexeme;
        } else if constexpr (std::is_same_v<T, ItemAgg>) {
          return render_agg(node.agg);
        } else if constexpr (std::is_same_v<T, ItemBinary>) {
          const int prec = (node.op == '+' || node.op == '-') ? 1 : 2;
          std::string lhs = render_item_impl(*node.lhs);
          std::string rhs = render_item_impl(*node.rhs);
          if (item_precedence(*node.lhs) < prec) lhs = "(" + lhs + ")";
          if (item_precedence(*node.rhs) <= prec && std::get_if<ItemBinary>(&node.rhs->node)) {
            rhs = "(" + rhs + ")";
          }
          return lhs + " " + node.op + " " + rhs;
        } else if constexpr (std::is_same_v<T, ItemCast>) {
          return "cast(" + render_item_impl(*node.operand) + ", " + node.type + ")";
        } else {
          return "case_when(" + node.predicate.column.display() + " " + node.predicate.op + " " +
                 render_literal(node.predicate.value) + ", " + render_literal(node.then_value) +
                 ", " + render_literal(node.else_value) + ")";
        }
      },
      item.node);
}

std::string render_op(const StepOp& op) {
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, WhereOp>) {
          std::string filter = node.filter.op == "="
                                   ? render_literal(node.filter.value)
                                   : node.filter.op + " " + render_literal(node.filter.value);
          return "where(element = " + node.element.display() + ", filter = " + filter + ")";
        } else if constexpr (std::is_same_v<T, OrderByOp>) {
          std::string by = std::holds_alternative<ColumnRef>(node.by)
                               ? std::get<ColumnRef>(node.by).display()
                               : render_agg(std::get<AggExpr>(node.by));
          return "orderby(by = " + by + (node.descending ? ", desc)" : ", asc)");
        } else if constexpr (std::is_same_v<T, LimitOp>) {
          return "limit(" + std::to_string(node.n) + ")";
        } else if constexpr (std::is_same_v<T, GroupByOp>) {
          std::vector<std::string> keys;
          for (const auto& key : node.keys) keys.push_back(key.display());
          return "groupby(" + join(keys, ", ") + ")";
        } else if constexpr (std::is_same_v<T, SelectOp>) {
          std::vector<std::string> items;
          for (const auto& item : node.items) items.push_back(render_item_impl(*item));
          return "select(" + join(items, ", ") + ")";
        } else {
          return "count()";
        }
      },
      op);
}

}  // namespace

std::string render_item(const ItemExpr& item) { return render_item_impl(item); }

std::string render_symbolic(const SymbolicPlan& plan) {
  std::ostringstream out;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const Step& step = plan.steps[i];
    if (i) out << "\n";
    out << step.binding << " = " << step.source;
    for (const StepOp& op : step.ops) out << "." << render_op(op);
  }
  return out.str();
}

}  // namespace tasql::talog
