#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tasql::sql {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
struct SelectStmt;
using SelectPtr = std::unique_ptr<SelectStmt>;

struct Literal {
  enum class Kind { integer, real, text, null_ };
  Kind kind = Kind::null_;
  std::string lexeme;  // text literals hold the unescaped content
};

struct ColumnExpr {
  std::string table;  // may be empty
  std::string column;
};

struct StarExpr {
  std::string table;  // empty for bare `*`
};

struct UnaryExpr {
  std::string op;  // "-", "+", "NOT"
  ExprPtr operand;
};

struct BinaryExpr {
  std::string op;  // arithmetic, comparison, AND/OR, ||, LIKE/GLOB variants
  ExprPtr lhs;
  ExprPtr rhs;
};

struct InExpr {
  ExprPtr lhs;
  bool negated = false;
  std::vector<ExprPtr> list;  // used when subquery is null
  SelectPtr subquery;
};

struct BetweenExpr {
  ExprPtr operand;
  bool negated = false;
  ExprPtr low;
  ExprPtr high;
};

struct IsNullExpr {
  ExprPtr operand;
  bool negated = false;
};

struct FunctionCall {
  std::string name;
  bool distinct = false;
  bool star_arg = false;
  std::vector<ExprPtr> args;
};

struct CastExpr {
  ExprPtr operand;
  std::string type_name;
};

struct CaseExpr {
  ExprPtr base;  // may be null (searched CASE)
  std::vector<std::pair<ExprPtr, ExprPtr>> whens;
  ExprPtr else_expr;  // may be null
};

struct SubqueryExpr {
  SelectPtr select;
};

struct ExistsExpr {
  SelectPtr select;
  bool negated = false;
};

struct Expr {
  std::variant<Literal, ColumnExpr, StarExpr, UnaryExpr, BinaryExpr, InExpr, BetweenExpr,
               IsNullExpr, FunctionCall, CastExpr, CaseExpr, SubqueryExpr, ExistsExpr>
      node;
};

template <typename T, typename... Args>
ExprPtr make_expr(Args&&... args) {
  auto expr = std::make_unique<Expr>();
  expr->node = T{std::forward<Args>(args)...};
  return expr;
}

struct ResultColumn {
  ExprPtr expr;  // StarExpr covers `*` and `t.*`
  std::string alias;
};

enum class JoinKind { none, inner, left, cross, comma };

struct TableRef {
  std::string table;  // empty for derived tables
  std::string alias;
  SelectPtr subquery;
};

struct FromItem {
  JoinKind join = JoinKind::none;  // none for the first item
  TableRef ref;
  ExprPtr on;                              // may be null
  std::vector<std::string> using_columns;  // USING(...) join columns
};

struct OrderingTerm {
  ExprPtr expr;
  bool descending = false;
};

enum class CompoundOp { union_, union_all, intersect, except };

struct SelectCore {
  bool distinct = false;
  std::vector<ResultColumn> columns;
  std::vector<FromItem> from;
  ExprPtr where;
  std::vector<ExprPtr> group_by;
  ExprPtr having;
};

/// ORDER BY / LIMIT attach to the whole (possibly compound) statement.
struct SelectStmt {
  SelectCore core;
  std::vector<std::pair<CompoundOp, SelectCore>> compounds;
  std::vector<OrderingTerm> order_by;
  ExprPtr limit;
  ExprPtr offset;
};

struct SqlAst {
  SelectPtr stmt;
};

/// Prints the AST back to executable SQL for the supported dialect subset.
std::string render_sql(const SelectStmt& stmt);
std::string render_sql(const Expr& expr);
inline std::string render_sql(const SqlAst& ast) { return render_sql(*ast.stmt); }

}  // namespace tasql::sql
