#include <algorithm>
#include <functional>
#include <set>

#include "talog_internal.hpp"
#include "tasql/talog.hpp"

namespace tasql::talog {

namespace {

void walk_item(const ItemExpr& item, const std::function<void(const ColumnRef&)>& on_column,
               const std::function<void(const AggExpr&)>& on_agg) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ItemColumn>) {
          on_column(node.ref);
        } else if constexpr (std::is_same_v<T, ItemAgg>) {
          on_agg(node.agg);
          if (node.agg.arg) on_column(*node.agg.arg);
        } else if constexpr (std::is_same_v<T, ItemBinary>) {
          walk_item(*node.lhs, on_column, on_agg);
          walk_item(*node.rhs, on_column, on_agg);
        } else if constexpr (std::is_same_v<T, ItemCast>) {
          walk_item(*node.operand, on_column, on_agg);
        } else if constexpr (std::is_same_v<T, ItemCaseWhen>) {
          on_column(node.predicate.column);
        }
      },
      item.node);
}

}  // namespace

void walk_plan(const SymbolicPlan& plan, const std::function<void(const ColumnRef&)>& on_column,
               const std::function<void(const AggExpr&)>& on_agg) {
  for (const Step& step : plan.steps) {
    for (const StepOp& op : step.ops) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, WhereOp>) {
              on_column(node.element);
            } else if constexpr (std::is_same_v<T, OrderByOp>) {
              if (const auto* column = std::get_if<ColumnRef>(&node.by)) {
                on_column(*column);
              } else {
                const auto& agg = std::get<AggExpr>(node.by);
                on_agg(agg);
                if (agg.arg) on_column(*agg.arg);
              }
            } else if constexpr (std::is_same_v<T, GroupByOp>) {
              for (const ColumnRef& key : node.keys) on_column(key);
            } else if constexpr (std::is_same_v<T, SelectOp>) {
              for (const ItemPtr& item : node.items) walk_item(*item, on_column, on_agg);
            }
          },
          op);
    }
  }
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& issue) {
    return issue.severity == ValidationIssue::Severity::error;
  });
}

std::vector<ValidationIssue> validate_plan(const SymbolicPlan& plan, const LinkedSchema& linked,
                                           const SchemaCatalog& catalog) {
  std::vector<ValidationIssue> issues;
  auto error = [&](std::string message) {
    issues.push_back({ValidationIssue::Severity::error, std::move(message)});
  };
  auto warning = [&](std::string message) {
    issues.push_back({ValidationIssue::Severity::warning, std::move(message)});
  };

  std::set<std::string> defined{"df"};
  for (const Step& step : plan.steps) {
    if (!defined.count(step.source)) {
      error("step '" + step.binding + "' uses undefined frame '" + step.source + "'");
    }
    for (const StepOp& op : step.ops) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, OrderByOp>) {
              if (const auto* agg = std::get_if<AggExpr>(&node.by)) {
                if (!agg->frame.empty() && !defined.count(agg->frame)) {
                  error("orderby aggregates over undefined frame '" + agg->frame + "'");
                }
              }
            } else if constexpr (std::is_same_v<T, SelectOp>) {
              for (const ItemPtr& item : node.items) {
                walk_item(
                    *item, [](const ColumnRef&) {},
                    [&](const AggExpr& agg) {
                      if (!agg.frame.empty() && !defined.count(agg.frame)) {
                        error("select aggregates over undefined frame '" + agg.frame + "'");
                      }
                    });
              }
            }
          },
          op);
    }
    defined.insert(step.binding);
  }

  std::set<std::string> reported;
  walk_plan(
      plan,
      [&](const ColumnRef& ref) {
        if (!reported.insert(ref.canonical()).second) return;
        const ColumnDef* column = catalog.find_column(ref);
        const TableDef* table = catalog.find_table(ref.table);
        if (!column || !table) {
          error("column " + ref.display() + " is not in the schema");
          return;
        }
        if (!linked.contains(ColumnRef{table->name, column->name})) {
          warning("column " + ref.display() + " is outside the linked schema");
        }
      },
      [](const AggExpr&) {});

  return issues;
}

}  // namespace tasql::talog
