#pragma once

#include <functional>

#include "tasql/symbolic_plan.hpp"

namespace tasql::talog {

// Visits every column reference and every frame aggregate in the plan,
// in step order.
void walk_plan(const SymbolicPlan& plan, const std::function<void(const ColumnRef&)>& on_column,
               const std::function<void(const AggExpr&)>& on_agg);

}  // namespace tasql::talog
