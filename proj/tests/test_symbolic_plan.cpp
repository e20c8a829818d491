#include "doctest.h"

#include <string>
#include <vector>

#include "tasql/errors.hpp"
#include "tasql/symbolic_plan.hpp"

using namespace tasql;
using namespace tasql::talog;

namespace {

std::string roundtrip(const std::string& text) {
  return render_symbolic(parse_symbolic(text));
}

}  // namespace

TEST_CASE("three-step plan with where, orderby, limit and select") {
  const std::string text =
      "df1 = df.where(element = schools.StatusType, filter = 'Active')\n"
      "df2 = df1.orderby(by = satscores.AvgScrRead, desc).limit(1)\n"
      "res = df2.select(schools.District)";
  const SymbolicPlan plan = parse_symbolic(text);
  REQUIRE(plan.steps.size() == 3);
  CHECK(plan.steps[0].binding == "df1");
  CHECK(plan.steps[0].source == "df");
  REQUIRE(plan.steps[0].ops.size() == 1);
  const auto& where = std::get<WhereOp>(plan.steps[0].ops[0]);
  CHECK(where.element.table == "schools");
  CHECK(where.element.column == "StatusType");
  CHECK(where.filter.op == "=");
  CHECK(where.filter.value.kind == PlanLiteral::Kind::text);
  CHECK(where.filter.value.lexeme == "Active");

  REQUIRE(plan.steps[1].ops.size() == 2);
  const auto& order = std::get<OrderByOp>(plan.steps[1].ops[0]);
  CHECK(order.descending);
  CHECK(std::get<ColumnRef>(order.by).canonical() == "satscores.avgscrread");
  CHECK(std::get<LimitOp>(plan.steps[1].ops[1]).n == 1);

  CHECK(plan.steps[2].binding == "res");
  const auto& select = std::get<SelectOp>(plan.steps[2].ops[0]);
  REQUIRE(select.items.size() == 1);
  CHECK(render_item(*select.items[0]) == "schools.District");
  CHECK(plan.warnings.empty());
  CHECK(plan.trailing_text.empty());
}

TEST_CASE("percentage plan with cast and frame-scoped counts") {
  const std::string text =
      "df1 = df.where(element = transactions_1k.Date, filter = '2012-08-25')\n"
      "df2 = df1.where(element = customers.Currency, filter = 'EUR')\n"
      "res = df.select(cast(df2.count(), real) * 100 / df1.count())";
  const SymbolicPlan plan = parse_symbolic(text);
  REQUIRE(plan.steps.size() == 3);
  const auto& select = std::get<SelectOp>(plan.steps[2].ops[0]);
  REQUIRE(select.items.size() == 1);
  CHECK(render_item(*select.items[0]) == "cast(df2.count(), real) * 100 / df1.count()");
  const auto& divide = std::get<ItemBinary>(select.items[0]->node);
  CHECK(divide.op == '/');
  const auto& right_count = std::get<ItemAgg>(divide.rhs->node);
  CHECK(right_count.agg.func == "count");
  CHECK(right_count.agg.frame == "df1");
  CHECK(!right_count.agg.arg.has_value());
}

TEST_CASE("argument markers are optional") {
  const SymbolicPlan with_markers =
      parse_symbolic("res = df.where(element = t.a, filter = 'x').select(t.b)");
  const SymbolicPlan bare = parse_symbolic("res = df.where(t.a, 'x').select(t.b)");
  CHECK(render_symbolic(with_markers) == render_symbolic(bare));
}

TEST_CASE("where comparison operators") {
  struct Case {
    std::string source_op;
    std::string parsed_op;
  };
  const std::vector<Case> cases = {{"=", "="},   {"==", "="}, {"!=", "!="}, {"<>", "!="},
                                   {">", ">"},   {">=", ">="}, {"<", "<"},  {"<=", "<="}};
  for (const Case& c : cases) {
    CAPTURE(c.source_op);
    const SymbolicPlan plan = parse_symbolic(
        "res = df.where(element = t.a, filter = " + c.source_op + " 10).count()");
    const auto& where = std::get<WhereOp>(plan.steps[0].ops[0]);
    CHECK(where.filter.op == c.parsed_op);
    CHECK(where.filter.value.kind == PlanLiteral::Kind::number);
    CHECK(where.filter.value.lexeme == "10");
  }
  // the comparator also works without the filter marker
  const SymbolicPlan bare = parse_symbolic("res = df.where(t.a, >= 10).count()");
  CHECK(std::get<WhereOp>(bare.steps[0].ops[0]).filter.op == ">=");
}

TEST_CASE("orderby accepts aggregates and bare direction") {
  const SymbolicPlan agg_plan =
      parse_symbolic("res = df.groupby(t.a).orderby(by = count(), desc).limit(3)");
  const auto& order = std::get<OrderByOp>(agg_plan.steps[0].ops[1]);
  CHECK(std::get<AggExpr>(order.by).func == "count");
  CHECK(order.descending);

  const SymbolicPlan bare = parse_symbolic("res = df.orderby(t.a, asc).limit(1)");
  CHECK_FALSE(std::get<OrderByOp>(bare.steps[0].ops[0]).descending);

  const SymbolicPlan trailing = parse_symbolic("res = df.orderby(t.a desc).limit(1)");
  CHECK(std::get<OrderByOp>(trailing.steps[0].ops[0]).descending);
}

TEST_CASE("groupby takes several keys and select mixes item kinds") {
  const SymbolicPlan plan = parse_symbolic(
      "df1 = df.groupby(t.a, u.b)\n"
      "res = df1.select(t.a, count(), sum(t.c), avg(t.c), min(t.c), max(t.c), 42, "
      "case_when(t.c > 5, 1, 0))");
  const auto& group = std::get<GroupByOp>(plan.steps[0].ops[0]);
  REQUIRE(group.keys.size() == 2);
  CHECK(group.keys[1].canonical() == "u.b");
  const auto& select = std::get<SelectOp>(plan.steps[1].ops[0]);
  REQUIRE(select.items.size() == 8);
  CHECK(render_item(*select.items[1]) == "count()");
  CHECK(render_item(*select.items[2]) == "sum(t.c)");
  CHECK(render_item(*select.items[6]) == "42");
  CHECK(render_item(*select.items[7]) == "case_when(t.c > 5, 1, 0)");
}

TEST_CASE("arithmetic precedence in select items") {
  const SymbolicPlan plan = parse_symbolic("res = df.select(t.a + t.b * 2 - t.c / 4)");
  const auto& select = std::get<SelectOp>(plan.steps[0].ops[0]);
  CHECK(render_item(*select.items[0]) == "t.a + t.b * 2 - t.c / 4");
  // top node is the subtraction; multiplication binds tighter
  const auto& minus = std::get<ItemBinary>(select.items[0]->node);
  CHECK(minus.op == '-');
  const auto& plus = std::get<ItemBinary>(minus.lhs->node);
  CHECK(plus.op == '+');
  CHECK(std::get<ItemBinary>(plus.rhs->node).op == '*');
}

TEST_CASE("count with an argument becomes an aggregate of that column") {
  const SymbolicPlan starred = parse_symbolic("res = df.select(count(*))");
  const auto& star_agg = std::get<ItemAgg>(
      std::get<SelectOp>(starred.steps[0].ops[0]).items[0]->node);
  CHECK(!star_agg.agg.arg.has_value());

  const SymbolicPlan with_col = parse_symbolic("res = df.select(count(t.a))");
  const auto& col_agg = std::get<ItemAgg>(
      std::get<SelectOp>(with_col.steps[0].ops[0]).items[0]->node);
  REQUIRE(col_agg.agg.arg.has_value());
  CHECK(col_agg.agg.arg->canonical() == "t.a");
}

TEST_CASE("canonical render round-trips") {
  const std::vector<std::string> plans = {
      "df1 = df.where(element = schools.StatusType, filter = 'Active')\n"
      "df2 = df1.orderby(by = satscores.AvgScrRead, desc).limit(1)\n"
      "res = df2.select(schools.District)",
      "df1 = df.where(element = transactions_1k.Date, filter = '2012-08-25')\n"
      "df2 = df1.where(element = customers.Currency, filter = 'EUR')\n"
      "res = df.select(cast(df2.count(), real) * 100 / df1.count())",
      "df1 = df.groupby(t.a)\n"
      "res = df1.select(t.a, count()).orderby(by = count(), desc).limit(5)",
      "res = df.where(element = t.a, filter = >= 3.5).count()",
      "res = df.select(cast(sum(case_when(t.a = 'x', 1, 0)), real) / count())",
  };
  for (const std::string& text : plans) {
    CAPTURE(text);
    const std::string once = roundtrip(text);
    CHECK(roundtrip(once) == once);
    // canonical text parses to the same structure
    const SymbolicPlan reparsed = parse_symbolic(once);
    CHECK(render_symbolic(reparsed) == once);
  }
}

TEST_CASE("prose before the plan is skipped with a warning") {
  const SymbolicPlan plan = parse_symbolic(
      "Sure, here is the plan you asked for:\n"
      "df1 = df.where(element = t.a, filter = 'x')\n"
      "res = df1.count()");
  REQUIRE(plan.steps.size() == 2);
  CHECK(!plan.warnings.empty());
}

TEST_CASE("text after the res line lands in trailing_text") {
  const SymbolicPlan plan = parse_symbolic(
      "res = df.select(t.a)\n"
      "SELECT a FROM t");
  REQUIRE(plan.steps.size() == 1);
  CHECK(plan.trailing_text.find("SELECT a FROM t") != std::string::npos);
}

TEST_CASE("call split across lines is rejoined on unbalanced parens") {
  const SymbolicPlan plan = parse_symbolic(
      "res = df.where(element = t.a,\n"
      "    filter = 'x').count()");
  REQUIRE(plan.steps.size() == 1);
  REQUIRE(plan.steps[0].ops.size() == 2);
  CHECK(std::get<WhereOp>(plan.steps[0].ops[0]).filter.value.lexeme == "x");
}

TEST_CASE("unknown call names raise UnknownFunctionError") {
  CHECK_THROWS_AS(parse_symbolic("res = df.explode(t.a)"), UnknownFunctionError);
  CHECK_THROWS_AS(parse_symbolic("res = df.select(df.foo(t.a))"), UnknownFunctionError);
}

TEST_CASE("structural errors raise SymbolicParseError") {
  SUBCASE("empty input") { CHECK_THROWS_AS(parse_symbolic(""), SymbolicParseError); }
  SUBCASE("no plan-shaped line") {
    CHECK_THROWS_AS(parse_symbolic("I cannot answer that."), SymbolicParseError);
  }
  SUBCASE("missing res binding") {
    CHECK_THROWS_AS(parse_symbolic("df1 = df.where(element = t.a, filter = 'x')"),
                    SymbolicParseError);
  }
  SUBCASE("duplicate binding") {
    CHECK_THROWS_AS(parse_symbolic("df1 = df.count()\n"
                                   "df1 = df.count()\n"
                                   "res = df1.select(t.a)"),
                    SymbolicParseError);
  }
  SUBCASE("unterminated string") {
    CHECK_THROWS_AS(parse_symbolic("res = df.where(element = t.a, filter = 'x).count()"),
                    SymbolicParseError);
  }
}
