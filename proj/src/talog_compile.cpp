#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "talog_internal.hpp"
#include "tasql/errors.hpp"
#include "tasql/sql_parser.hpp"
#include "tasql/strings.hpp"
#include "tasql/talog.hpp"

namespace tasql::talog {

namespace {

using sql::ExprPtr;
using sql::make_expr;

// Accumulated relational state of one frame binding.
struct FrameState {
  std::vector<WhereOp> filters;
  std::vector<ColumnRef> group_keys;
  std::optional<OrderByOp> order;
  std::optional<long> limit;
};

bool literals_equal(const PlanLiteral& a, const PlanLiteral& b) {
  return a.kind == b.kind && a.lexeme == b.lexeme;
}

bool agg_equal(const AggExpr& a, const AggExpr& b) {
  if (a.func != b.func || a.frame != b.frame) return false;
  if (a.arg.has_value() != b.arg.has_value()) return false;
  return !a.arg || a.arg->canonical() == b.arg->canonical();
}

bool orders_equal(const OrderByOp& a, const OrderByOp& b) {
  if (a.descending != b.descending) return false;
  if (a.by.index() != b.by.index()) return false;
  if (const auto* column = std::get_if<ColumnRef>(&a.by)) {
    return column->canonical() == std::get<ColumnRef>(b.by).canonical();
  }
  return agg_equal(std::get<AggExpr>(a.by), std::get<AggExpr>(b.by));
}

bool states_equal(const FrameState& a, const FrameState& b) {
  if (a.filters.size() != b.filters.size()) return false;
  for (std::size_t i = 0; i < a.filters.size(); ++i) {
    const WhereOp& x = a.filters[i];
    const WhereOp& y = b.filters[i];
    if (x.element.canonical() != y.element.canonical() || x.filter.op != y.filter.op ||
        !literals_equal(x.filter.value, y.filter.value)) {
      return false;
    }
  }
  if (a.group_keys.size() != b.group_keys.size()) return false;
  for (std::size_t i = 0; i < a.group_keys.size(); ++i) {
    if (a.group_keys[i].canonical() != b.group_keys[i].canonical()) return false;
  }
  if (a.order.has_value() != b.order.has_value()) return false;
  if (a.order && !orders_equal(*a.order, *b.order)) return false;
  return a.limit == b.limit;
}

class Compiler {
public:
  Compiler(const SymbolicPlan& plan, const SchemaCatalog& catalog, const JoinGraph& graph)
      : plan_(plan), catalog_(catalog), graph_(graph) {}

  CompiledQuery run() {
    build_states();
    collect_tables();
    choose_final();

    sql::SelectStmt stmt = build_statement();
    CompiledQuery result;
    result.sql = sql::render_sql(stmt);
    JoinPath path = infer_join_path(all_tables_, graph_);
    result.tables = path.tables();
    try {
      sql::parse_sql(result.sql);
    } catch (const Error& e) {
      throw CompileError("compiled SQL failed the self-parse check: " + std::string(e.what()) +
                         " in: " + result.sql);
    }
    return result;
  }

private:
  const SymbolicPlan& plan_;
  const SchemaCatalog& catalog_;
  const JoinGraph& graph_;
  std::map<std::string, FrameState> states_;
  std::vector<std::string> all_tables_;
  FrameState final_state_;
  const SelectOp* select_op_ = nullptr;
  bool count_op_ = false;

  ColumnRef normalize(const ColumnRef& ref) const {
    const TableDef* table = catalog_.find_table(ref.table);
    const ColumnDef* column = table ? table->find_column(ref.column) : nullptr;
    if (!column) {
      throw CompileError("column " + ref.display() + " is not in the schema");
    }
    return ColumnRef{table->name, column->name};
  }

  void fold(FrameState& state, const StepOp& op) const {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, WhereOp>) {
            WhereOp normalized = node;
            normalized.element = normalize(node.element);
            state.filters.push_back(std::move(normalized));
          } else if constexpr (std::is_same_v<T, OrderByOp>) {
            OrderByOp normalized = node;
            if (const auto* column = std::get_if<ColumnRef>(&node.by)) {
              normalized.by = normalize(*column);
            } else {
              AggExpr agg = std::get<AggExpr>(node.by);
              if (agg.arg) agg.arg = normalize(*agg.arg);
              normalized.by = std::move(agg);
            }
            state.order = std::move(normalized);
          } else if constexpr (std::is_same_v<T, LimitOp>) {
            state.limit = node.n;
          } else if constexpr (std::is_same_v<T, GroupByOp>) {
            for (const ColumnRef& key : node.keys) state.group_keys.push_back(normalize(key));
          }
        },
        op);
  }

  void build_states() {
    states_["df"] = FrameState{};
    for (const Step& step : plan_.steps) {
      auto source = states_.find(step.source);
      if (source == states_.end()) {
        throw CompileError("step '" + step.binding + "' uses undefined frame '" + step.source +
                           "'");
      }
      FrameState state = source->second;
      for (const StepOp& op : step.ops) {
        if (std::holds_alternative<SelectOp>(op) || std::holds_alternative<CountOp>(op)) {
          if (step.binding == "res") {
            if (const auto* select = std::get_if<SelectOp>(&op)) {
              select_op_ = select;
            } else {
              count_op_ = true;
            }
          }
          continue;
        }
        fold(state, op);
      }
      states_[step.binding] = std::move(state);
    }
  }

  void collect_tables() {
    std::set<std::string, CiLess> tables;
    walk_plan(
        plan_, [&](const ColumnRef& ref) { tables.insert(normalize(ref).table); },
        [](const AggExpr&) {});
    all_tables_.assign(tables.begin(), tables.end());
    if (all_tables_.empty()) {
      throw CompileError("plan references no tables; nothing to select from");
    }
  }

  void choose_final() {
    const Step& res = plan_.steps.back();
    bool has_pre_ops = false;
    for (const StepOp& op : res.ops) {
      if (!std::holds_alternative<SelectOp>(op) && !std::holds_alternative<CountOp>(op)) {
        has_pre_ops = true;
      }
    }
    if (res.source == "df" && !has_pre_ops && select_op_) {
      // a bare `res = df.select(...)` inherits the most-derived frame its
      // items aggregate over (Case 2 shape)
      std::vector<std::string> referenced;
      for (const ItemPtr& item : select_op_->items) {
        collect_frames(*item, referenced);
      }
      const FrameState* best = nullptr;
      for (const std::string& frame : referenced) {
        auto it = states_.find(frame);
        if (it == states_.end()) {
          throw CompileError("aggregate over undefined frame '" + frame + "'");
        }
        if (!best || it->second.filters.size() > best->filters.size()) {
          best = &it->second;
        }
      }
      final_state_ = best ? *best : FrameState{};
      return;
    }
    FrameState state = states_.at(res.source);
    for (const StepOp& op : res.ops) {
      if (std::holds_alternative<SelectOp>(op) || std::holds_alternative<CountOp>(op)) continue;
      fold(state, op);
    }
    final_state_ = std::move(state);
  }

  static void collect_frames(const ItemExpr& item, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ItemAgg>) {
            if (!node.agg.frame.empty() && node.agg.frame != "df") out.push_back(node.agg.frame);
          } else if constexpr (std::is_same_v<T, ItemBinary>) {
            collect_frames(*node.lhs, out);
            collect_frames(*node.rhs, out);
          } else if constexpr (std::is_same_v<T, ItemCast>) {
            collect_frames(*node.operand, out);
          }
        },
        item.node);
  }

  // ---- SQL construction ----

  static ExprPtr literal_expr(const PlanLiteral& lit) {
    switch (lit.kind) {
      case PlanLiteral::Kind::text:
        return make_expr<sql::Literal>(sql::Literal{sql::Literal::Kind::text, lit.lexeme});
      case PlanLiteral::Kind::number: {
        const bool real = lit.lexeme.find('.') != std::string::npos ||
                          lit.lexeme.find('e') != std::string::npos ||
                          lit.lexeme.find('E') != std::string::npos;
        return make_expr<sql::Literal>(sql::Literal{
            real ? sql::Literal::Kind::real : sql::Literal::Kind::integer, lit.lexeme});
      }
      case PlanLiteral::Kind::null_:
        return make_expr<sql::Literal>(sql::Literal{sql::Literal::Kind::null_, "NULL"});
    }
    return make_expr<sql::Literal>(sql::Literal{sql::Literal::Kind::null_, "NULL"});
  }

  static ExprPtr column_expr(const ColumnRef& ref) {
    return make_expr<sql::ColumnExpr>(ref.table, ref.column);
  }

  static ExprPtr filter_expr(const WhereOp& filter) {
    std::string op = filter.filter.op;
    if (op == "<>") op = "!=";
    if (filter.filter.value.kind == PlanLiteral::Kind::null_) {
      if (op == "=") return make_expr<sql::IsNullExpr>(column_expr(filter.element), false);
      if (op == "!=") return make_expr<sql::IsNullExpr>(column_expr(filter.element), true);
      throw CompileError("null filter supports only = and !=");
    }
    return make_expr<sql::BinaryExpr>(op, column_expr(filter.element),
                                      literal_expr(filter.filter.value));
  }

  ExprPtr where_expr(const FrameState& state) const {
    ExprPtr out;
    for (const WhereOp& filter : state.filters) {
      ExprPtr next = filter_expr(filter);
      out = out ? make_expr<sql::BinaryExpr>("AND", std::move(out), std::move(next))
                : std::move(next);
    }
    return out;
  }

  std::vector<sql::FromItem> from_items(const std::vector<std::string>& tables) const {
    JoinPath path = infer_join_path(tables, graph_);
    std::vector<sql::FromItem> items;
    sql::FromItem anchor;
    anchor.ref.table = path.anchor;
    items.push_back(std::move(anchor));
    for (const JoinEdge& edge : path.edges) {
      sql::FromItem item;
      item.join = sql::JoinKind::inner;
      item.ref.table = edge.table;
      item.on = make_expr<sql::BinaryExpr>("=", column_expr(edge.link.from),
                                           column_expr(edge.link.to));
      items.push_back(std::move(item));
    }
    return items;
  }

  std::vector<std::string> frame_tables(const FrameState& state) const {
    std::set<std::string, CiLess> tables;
    for (const WhereOp& filter : state.filters) tables.insert(filter.element.table);
    for (const ColumnRef& key : state.group_keys) tables.insert(key.table);
    if (state.order) {
      if (const auto* column = std::get_if<ColumnRef>(&state.order->by)) {
        tables.insert(column->table);
      } else if (const auto* agg = std::get_if<AggExpr>(&state.order->by); agg && agg->arg) {
        tables.insert(agg->arg->table);
      }
    }
    if (tables.empty()) return all_tables_;
    return {tables.begin(), tables.end()};
  }

  static ExprPtr agg_call(const std::string& func, std::optional<ColumnRef> arg) {
    sql::FunctionCall call;
    call.name = ascii_upper(func);
    if (arg) {
      call.args.push_back(column_expr(*arg));
    } else {
      call.star_arg = true;
    }
    return make_expr<sql::FunctionCall>(std::move(call));
  }

  // Scalar subquery replicating a frame's FROM and WHERE around one
  // aggregate; a row limit forces a derived-table wrapper so the aggregate
  // ranges over the limited rows.
  ExprPtr aggregate_subquery(const AggExpr& agg, const FrameState& state) const {
    if (!state.group_keys.empty()) {
      throw CompileError("aggregate over the grouped frame '" + agg.frame +
                         "' has no scalar meaning");
    }
    std::vector<std::string> tables = frame_tables(state);
    if (state.limit) {
      auto inner = std::make_unique<sql::SelectStmt>();
      std::string alias;
      if (agg.arg) {
        alias = "v";
        sql::ResultColumn column;
        column.expr = column_expr(*agg.arg);
        column.alias = alias;
        inner->core.columns.push_back(std::move(column));
      } else {
        sql::ResultColumn column;
        column.expr = make_expr<sql::StarExpr>();
        inner->core.columns.push_back(std::move(column));
      }
      inner->core.from = from_items(tables);
      inner->core.where = where_expr(state);
      apply_order_limit(*inner, state);

      auto outer = std::make_unique<sql::SelectStmt>();
      sql::FunctionCall call;
      call.name = ascii_upper(agg.func);
      if (agg.arg) {
        call.args.push_back(make_expr<sql::ColumnExpr>("", alias));
      } else {
        call.star_arg = true;
      }
      sql::ResultColumn column;
      column.expr = make_expr<sql::FunctionCall>(std::move(call));
      outer->core.columns.push_back(std::move(column));
      sql::FromItem from;
      from.ref.subquery = std::move(inner);
      outer->core.from.push_back(std::move(from));
      return make_expr<sql::SubqueryExpr>(std::move(outer));
    }
    auto select = std::make_unique<sql::SelectStmt>();
    sql::ResultColumn column;
    column.expr = agg_call(agg.func, agg.arg);
    select->core.columns.push_back(std::move(column));
    select->core.from = from_items(tables);
    select->core.where = where_expr(state);
    return make_expr<sql::SubqueryExpr>(std::move(select));
  }

  void apply_order_limit(sql::SelectStmt& stmt, const FrameState& state) const {
    if (state.order) {
      sql::OrderingTerm term;
      term.expr = order_expr(*state.order);
      term.descending = state.order->descending;
      stmt.order_by.push_back(std::move(term));
    }
    if (state.limit) {
      stmt.limit = make_expr<sql::Literal>(
          sql::Literal{sql::Literal::Kind::integer, std::to_string(*state.limit)});
    }
  }

  ExprPtr order_expr(const OrderByOp& order) const {
    if (const auto* column = std::get_if<ColumnRef>(&order.by)) {
      return column_expr(*column);
    }
    const AggExpr& agg = std::get<AggExpr>(order.by);
    return agg_expr(agg, nullptr);
  }

  // remap, when set, rewrites column references to bare aliases of a
  // wrapping derived table
  using AliasMap = std::map<std::string, std::string>;

  ExprPtr agg_expr(const AggExpr& agg, const AliasMap* remap) const {
    const FrameState* state = &final_state_;
    if (!agg.frame.empty()) {
      auto it = states_.find(agg.frame);
      if (it == states_.end()) {
        throw CompileError("aggregate over undefined frame '" + agg.frame + "'");
      }
      state = &it->second;
    }
    if (states_equal(*state, final_state_)) {
      std::optional<ColumnRef> arg = agg.arg ? std::optional(normalize(*agg.arg)) : std::nullopt;
      if (arg && remap) {
        auto alias = remap->find(arg->canonical());
        if (alias != remap->end()) {
          sql::FunctionCall call;
          call.name = ascii_upper(agg.func);
          call.args.push_back(make_expr<sql::ColumnExpr>("", alias->second));
          return make_expr<sql::FunctionCall>(std::move(call));
        }
      }
      return agg_call(agg.func, arg);
    }
    AggExpr normalized = agg;
    if (normalized.arg) normalized.arg = normalize(*normalized.arg);
    return aggregate_subquery(normalized, *state);
  }

  ExprPtr item_expr(const ItemExpr& item, const AliasMap* remap) const {
    return std::visit(
        [&](const auto& node) -> ExprPtr {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ItemColumn>) {
            ColumnRef ref = normalize(node.ref);
            if (remap) {
              auto alias = remap->find(ref.canonical());
              if (alias != remap->end()) return make_expr<sql::ColumnExpr>("", alias->second);
            }
            return column_expr(ref);
          } else if constexpr (std::is_same_v<T, ItemNumber>) {
            return literal_expr(PlanLiteral{PlanLiteral::Kind::number, node.lexeme});
          } else if constexpr (std::is_same_v<T, ItemAgg>) {
            return agg_expr(node.agg, remap);
          } else if constexpr (std::is_same_v<T, ItemBinary>) {
            return make_expr<sql::BinaryExpr>(std::string(1, node.op),
                                              item_expr(*node.lhs, remap),
                                              item_expr(*node.rhs, remap));
          } else if constexpr (std::is_same_v<T, ItemCast>) {
            return make_expr<sql::CastExpr>(item_expr(*node.operand, remap), "REAL");
          } else {
            ColumnRef ref = normalize(node.predicate.column);
            ExprPtr lhs = remap && remap->count(ref.canonical())
                              ? make_expr<sql::ColumnExpr>("", remap->at(ref.canonical()))
                              : column_expr(ref);
            std::string op = node.predicate.op == "<>" ? "!=" : node.predicate.op;
            sql::CaseExpr case_expr;
            case_expr.whens.emplace_back(
                make_expr<sql::BinaryExpr>(op, std::move(lhs),
                                           literal_expr(node.predicate.value)),
                literal_expr(node.then_value));
            case_expr.else_expr = literal_expr(node.else_value);
            return make_expr<sql::CaseExpr>(std::move(case_expr));
          }
        },
        item.node);
  }

  bool item_has_final_aggregate(const ItemExpr& item) const {
    return std::visit(
        [&](const auto& node) -> bool {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ItemAgg>) {
            if (node.agg.frame.empty()) return true;
            auto it = states_.find(node.agg.frame);
            return it != states_.end() && states_equal(it->second, final_state_);
          } else if constexpr (std::is_same_v<T, ItemBinary>) {
            return item_has_final_aggregate(*node.lhs) || item_has_final_aggregate(*node.rhs);
          } else if constexpr (std::is_same_v<T, ItemCast>) {
            return item_has_final_aggregate(*node.operand);
          } else {
            return false;
          }
        },
        item.node);
  }

  void collect_passthrough(const ItemExpr& item, std::vector<ColumnRef>& out) const {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ItemColumn>) {
            out.push_back(normalize(node.ref));
          } else if constexpr (std::is_same_v<T, ItemAgg>) {
            if (node.agg.arg) out.push_back(normalize(*node.agg.arg));
          } else if constexpr (std::is_same_v<T, ItemBinary>) {
            collect_passthrough(*node.lhs, out);
            collect_passthrough(*node.rhs, out);
          } else if constexpr (std::is_same_v<T, ItemCast>) {
            collect_passthrough(*node.operand, out);
          } else if constexpr (std::is_same_v<T, ItemCaseWhen>) {
            out.push_back(normalize(node.predicate.column));
          }
        },
        item.node);
  }

  sql::SelectStmt build_statement() {
    const bool needs_wrap = select_op_ && final_state_.limit && final_state_.group_keys.empty() &&
                            std::any_of(select_op_->items.begin(), select_op_->items.end(),
                                        [&](const ItemPtr& item) {
                                          return item_has_final_aggregate(*item);
                                        });
    if (needs_wrap) return build_wrapped();

    sql::SelectStmt stmt;
    if (select_op_) {
      for (const ItemPtr& item : select_op_->items) {
        sql::ResultColumn column;
        column.expr = item_expr(*item, nullptr);
        stmt.core.columns.push_back(std::move(column));
      }
    } else if (count_op_) {
      sql::ResultColumn column;
      sql::FunctionCall call;
      call.name = "COUNT";
      call.star_arg = true;
      column.expr = make_expr<sql::FunctionCall>(std::move(call));
      stmt.core.columns.push_back(std::move(column));
    } else {
      sql::ResultColumn column;
      column.expr = make_expr<sql::StarExpr>();
      stmt.core.columns.push_back(std::move(column));
    }
    stmt.core.from = from_items(all_tables_);
    stmt.core.where = where_expr(final_state_);
    for (const ColumnRef& key : final_state_.group_keys) {
      stmt.core.group_by.push_back(column_expr(key));
    }
    apply_order_limit(stmt, final_state_);
    return stmt;
  }

  // `orderby(...).limit(n)` followed by aggregation: SQL applies LIMIT after
  // aggregates, dataframes before, so the limited rows become a derived
  // table and the aggregates move outside.
  sql::SelectStmt build_wrapped() {
    std::vector<ColumnRef> needed;
    for (const ItemPtr& item : select_op_->items) collect_passthrough(*item, needed);
    AliasMap aliases;
    auto inner = std::make_unique<sql::SelectStmt>();
    for (const ColumnRef& ref : needed) {
      if (aliases.count(ref.canonical())) continue;
      std::string alias = "c" + std::to_string(aliases.size());
      aliases[ref.canonical()] = alias;
      sql::ResultColumn column;
      column.expr = column_expr(ref);
      column.alias = alias;
      inner->core.columns.push_back(std::move(column));
    }
    if (inner->core.columns.empty()) {
      sql::ResultColumn column;
      column.expr = make_expr<sql::StarExpr>();
      inner->core.columns.push_back(std::move(column));
    }
    inner->core.from = from_items(all_tables_);
    inner->core.where = where_expr(final_state_);
    apply_order_limit(*inner, final_state_);

    sql::SelectStmt outer;
    for (const ItemPtr& item : select_op_->items) {
      sql::ResultColumn column;
      column.expr = item_expr(*item, &aliases);
      outer.core.columns.push_back(std::move(column));
    }
    sql::FromItem from;
    from.ref.subquery = std::move(inner);
    outer.core.from.push_back(std::move(from));
    return outer;
  }
};

}  // namespace

CompiledQuery compile_plan(const SymbolicPlan& plan, const SchemaCatalog& catalog,
                           const JoinGraph& graph) {
  if (plan.steps.empty()) throw CompileError("empty plan");
  return Compiler(plan, catalog, graph).run();
}

}  // namespace tasql::talog
