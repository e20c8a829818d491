#include <cctype>
#include <set>
#include <sstream>

#include "tasql/sql_ast.hpp"
#include "tasql/strings.hpp"

namespace tasql::sql {

namespace {

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "select", "from",  "where", "group",  "order",  "by",    "having", "limit",
      "offset", "join",  "inner", "left",   "right",  "cross", "outer",  "on",
      "using",  "as",    "and",   "or",     "not",    "in",    "between", "like",
      "glob",   "is",    "null",  "case",   "when",   "then",  "else",   "end",
      "cast",   "exists", "union", "intersect", "except", "all", "distinct", "asc",
      "desc",   "set",   "to",    "with",   "values", "table", "index",  "default"};
  return words;
}

bool needs_quoting(const std::string& name) {
  if (name.empty()) return true;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return true;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return true;
  }
  return reserved_words().count(ascii_lower(name)) > 0;
}

std::string quote_name(const std::string& name) {
  if (!needs_quoting(name)) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out += "``";
    else out += c;
  }
  out += "`";
  return out;
}

std::string quote_string(const std::string& value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += "''";
    else out += c;
  }
  out += "'";
  return out;
}

// Higher binds tighter; used to decide operand parenthesization.
int binary_precedence(const std::string& op) {
  if (op == "OR") return 1;
  if (op == "AND") return 2;
  if (op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" || op == "<=" ||
      op == ">" || op == ">=" || op == "IS" || op == "IS NOT" || op == "LIKE" ||
      op == "NOT LIKE" || op == "GLOB" || op == "NOT GLOB") {
    return 4;
  }
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  if (op == "||") return 7;
  return 4;
}

int expr_precedence(const Expr& expr) {
  if (const auto* binary = std::get_if<BinaryExpr>(&expr.node)) {
    return binary_precedence(binary->op);
  }
  if (std::holds_alternative<UnaryExpr>(expr.node)) {
    const auto& unary = std::get<UnaryExpr>(expr.node);
    return iequals(unary.op, "NOT") ? 3 : 8;
  }
  if (std::holds_alternative<InExpr>(expr.node) || std::holds_alternative<BetweenExpr>(expr.node) ||
      std::holds_alternative<IsNullExpr>(expr.node)) {
    return 4;
  }
  return 9;
}

struct Renderer {
  std::ostringstream out;

  void select_stmt(const SelectStmt& stmt) {
    select_core(stmt.core);
    for (const auto& [op, core] : stmt.compounds) {
      switch (op) {
        case CompoundOp::union_: out << " UNION "; break;
        case CompoundOp::union_all: out << " UNION ALL "; break;
        case CompoundOp::intersect: out << " INTERSECT "; break;
        case CompoundOp::except: out << " EXCEPT "; break;
      }
      select_core(core);
    }
    if (!stmt.order_by.empty()) {
      out << " ORDER BY ";
      for (std::size_t i = 0; i < stmt.order_by.size(); ++i) {
        if (i) out << ", ";
        expr(*stmt.order_by[i].expr);
        if (stmt.order_by[i].descending) out << " DESC";
      }
    }
    if (stmt.limit) {
      out << " LIMIT ";
      expr(*stmt.limit);
      if (stmt.offset) {
        out << " OFFSET ";
        expr(*stmt.offset);
      }
    }
  }

  void select_core(const SelectCore& core) {
    out << "SELECT ";
    if (core.distinct) out << "DISTINCT ";
    for (std::size_t i = 0; i < core.columns.size(); ++i) {
      if (i) out << ", ";
      expr(*core.columns[i].expr);
      if (!core.columns[i].alias.empty()) out << " AS " << quote_name(core.columns[i].alias);
    }
    if (!core.from.empty()) {
      out << " FROM ";
      for (std::size_t i = 0; i < core.from.size(); ++i) {
        const FromItem& item = core.from[i];
        if (i) {
          switch (item.join) {
            case JoinKind::comma: out << ", "; break;
            case JoinKind::inner: out << " INNER JOIN "; break;
            case JoinKind::left: out << " LEFT JOIN "; break;
            case JoinKind::cross: out << " CROSS JOIN "; break;
            case JoinKind::none: out << " INNER JOIN "; break;
          }
        }
        table_ref(item.ref);
        if (item.on) {
          out << " ON ";
          expr(*item.on);
        } else if (!item.using_columns.empty()) {
          out << " USING (";
          for (std::size_t c = 0; c < item.using_columns.size(); ++c) {
            if (c) out << ", ";
            out << quote_name(item.using_columns[c]);
          }
          out << ")";
        }
      }
    }
    if (core.where) {
      out << " WHERE ";
      expr(*core.where);
    }
    if (!core.group_by.empty()) {
      out << " GROUP BY ";
      for (std::size_t i = 0; i < core.group_by.size(); ++i) {
        if (i) out << ", ";
        expr(*core.group_by[i]);
      }
    }
    if (core.having) {
      out << " HAVING ";
      expr(*core.having);
    }
  }

  void table_ref(const TableRef& ref) {
    if (ref.subquery) {
      out << "(";
      select_stmt(*ref.subquery);
      out << ")";
    } else {
      out << quote_name(ref.table);
    }
    if (!ref.alias.empty()) out << " AS " << quote_name(ref.alias);
  }

  void operand(const Expr& child, int parent_prec, bool is_right = false) {
    const int child_prec = expr_precedence(child);
    const bool wrap = child_prec < parent_prec || (is_right && child_prec == parent_prec);
    if (wrap) out << "(";
    expr(child);
    if (wrap) out << ")";
  }

  void expr(const Expr& e) {
    std::visit([this](const auto& node) { render_node(node); }, e.node);
  }

  void render_node(const Literal& lit) {
    switch (lit.kind) {
      case Literal::Kind::integer:
      case Literal::Kind::real: out << lit.lexeme; break;
      case Literal::Kind::text: out << quote_string(lit.lexeme); break;
      case Literal::Kind::null_: out << "NULL"; break;
    }
  }

  void render_node(const ColumnExpr& col) {
    if (!col.table.empty()) out << quote_name(col.table) << ".";
    out << quote_name(col.column);
  }

  void render_node(const StarExpr& star) {
    if (!star.table.empty()) out << quote_name(star.table) << ".";
    out << "*";
  }

  void render_node(const UnaryExpr& unary) {
    if (iequals(unary.op, "NOT")) {
      out << "NOT ";
      operand(*unary.operand, 3);
    } else {
      out << unary.op;
      operand(*unary.operand, 8);
    }
  }

  void render_node(const BinaryExpr& binary) {
    const int prec = binary_precedence(binary.op);
    operand(*binary.lhs, prec);
    const bool wordy = std::isalpha(static_cast<unsigned char>(binary.op[0]));
    out << (wordy ? " " : " ") << binary.op << " ";
    operand(*binary.rhs, prec, true);
  }

  void render_node(const InExpr& in) {
    operand(*in.lhs, 4);
    out << (in.negated ? " NOT IN (" : " IN (");
    if (in.subquery) {
      select_stmt(*in.subquery);
    } else {
      for (std::size_t i = 0; i < in.list.size(); ++i) {
        if (i) out << ", ";
        expr(*in.list[i]);
      }
    }
    out << ")";
  }

  void render_node(const BetweenExpr& between) {
    operand(*between.operand, 4);
    out << (between.negated ? " NOT BETWEEN " : " BETWEEN ");
    operand(*between.low, 5);
    out << " AND ";
    operand(*between.high, 5);
  }

  void render_node(const IsNullExpr& is_null) {
    operand(*is_null.operand, 4);
    out << (is_null.negated ? " IS NOT NULL" : " IS NULL");
  }

  void render_node(const FunctionCall& call) {
    out << call.name << "(";
    if (call.star_arg) {
      out << "*";
    } else {
      if (call.distinct) out << "DISTINCT ";
      for (std::size_t i = 0; i < call.args.size(); ++i) {
        if (i) out << ", ";
        expr(*call.args[i]);
      }
    }
    out << ")";
  }

  void render_node(const CastExpr& cast) {
    out << "CAST(";
    expr(*cast.operand);
    out << " AS " << cast.type_name << ")";
  }

  void render_node(const CaseExpr& case_expr) {
    out << "CASE";
    if (case_expr.base) {
      out << " ";
      expr(*case_expr.base);
    }
    for (const auto& [condition, value] : case_expr.whens) {
      out << " WHEN ";
      expr(*condition);
      out << " THEN ";
      expr(*value);
    }
    if (case_expr.else_expr) {
      out << " ELSE ";
      expr(*case_expr.else_expr);
    }
    out << " END";
  }

  void render_node(const SubqueryExpr& subquery) {
    out << "(";
    select_stmt(*subquery.select);
    out << ")";
  }

  void render_node(const ExistsExpr& exists) {
    if (exists.negated) out << "NOT ";
    out << "EXISTS (";
    select_stmt(*exists.select);
    out << ")";
  }
};

}  // namespace

std::string render_sql(const SelectStmt& stmt) {
  Renderer renderer;
  renderer.select_stmt(stmt);
  return renderer.out.str();
}

std::string render_sql(const Expr& expr) {
  Renderer renderer;
  renderer.expr(expr);
  return renderer.out.str();
}

}  // namespace tasql::sql
