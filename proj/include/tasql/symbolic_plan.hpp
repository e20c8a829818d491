#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tasql/schema_catalog.hpp"

namespace tasql::talog {

// Literal inside a plan: text (lexeme holds the unquoted content), a numeric
// lexeme as written, or null.
struct PlanLiteral {
  enum class Kind { text, number, null_ };
  Kind kind = Kind::text;
  std::string lexeme;

  bool operator==(const PlanLiteral&) const = default;
};

// Comparison applied to a where element; op defaults to "=" when the filter
// argument is a bare literal.
struct Comparison {
  std::string op = "=";
  PlanLiteral value;

  bool operator==(const Comparison&) const = default;
};

// Full predicate for case_when: column op literal.
struct Predicate {
  ColumnRef column;
  std::string op = "=";
  PlanLiteral value;
};

// Aggregate over a frame. frame empty means "the enclosing step's frame";
// arg empty means `*`.
struct AggExpr {
  std::string func;  // count | sum | avg | min | max, lowercase
  std::string frame;
  std::optional<ColumnRef> arg;
};

struct ItemExpr;
using ItemPtr = std::unique_ptr<ItemExpr>;

struct ItemColumn {
  ColumnRef ref;
};
struct ItemNumber {
  std::string lexeme;
};
struct ItemAgg {
  AggExpr agg;
};
struct ItemBinary {
  char op;  // + - * /
  ItemPtr lhs;
  ItemPtr rhs;
};
struct ItemCast {
  ItemPtr operand;
  std::string type;  // "real"
};
struct ItemCaseWhen {
  Predicate predicate;
  PlanLiteral then_value;
  PlanLiteral else_value;
};

struct ItemExpr {
  std::variant<ItemColumn, ItemNumber, ItemAgg, ItemBinary, ItemCast, ItemCaseWhen> node;
};

template <typename T, typename... Args>
ItemPtr make_item(Args&&... args) {
  return std::make_unique<ItemExpr>(ItemExpr{T{std::forward<Args>(args)...}});
}

struct WhereOp {
  ColumnRef element;
  Comparison filter;
};
struct OrderByOp {
  std::variant<ColumnRef, AggExpr> by;
  bool descending = false;
};
struct LimitOp {
  long n = 0;
};
struct GroupByOp {
  std::vector<ColumnRef> keys;
};
struct SelectOp {
  std::vector<ItemPtr> items;
};
struct CountOp {};

using StepOp = std::variant<WhereOp, OrderByOp, LimitOp, GroupByOp, SelectOp, CountOp>;

// One plan line: `binding = source.call(...).call(...)`. A chained call
// sequence stays within one step.
struct Step {
  std::string binding;
  std::string source;
  std::vector<StepOp> ops;
};

// Parsed symbolic plan. The final step binds `res`; bindings are unique.
// warnings and trailing_text carry diagnostics about skipped prose around
// the plan lines (for example a pseudo-SQL trailer after `res`).
struct SymbolicPlan {
  std::vector<Step> steps;
  std::vector<std::string> warnings;
  std::string trailing_text;
};

// Parses plan text per the closed grammar:
//   line    := ident "=" source ("." call)+
//   call    := where(element = T.C, filter = [cmp] LITERAL)
//            | orderby(by = T.C | AGG [, asc|desc])
//            | limit(N) | groupby(T.C [, T.C]*) | select(ITEM [, ITEM]*)
//            | count()
//   ITEM    := arithmetic over T.C, numbers, AGG, cast(item, real),
//              case_when(T.C cmp LITERAL, VALUE, VALUE)
// Prose before the first plan line and anything after the `res` line is
// skipped with a warning. Throws SymbolicParseError when no line parses or
// the plan lacks a `res` binding; an unknown call name throws
// UnknownFunctionError.
SymbolicPlan parse_symbolic(const std::string& text);

// Canonical textual form; parse_symbolic(render_symbolic(p)) reproduces p.
std::string render_symbolic(const SymbolicPlan& plan);
std::string render_item(const ItemExpr& item);

}  // namespace tasql::talog
