#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tasql/dataset.hpp"
#include "tasql/sql_extract.hpp"

namespace tasql::eval {

// One cell of an execution result. Reals that are exactly integral are
// normalized to integers so 3.0 and 3 compare equal; NULL is its own kind.
struct Value {
  enum class Kind { null_, integer, real, text, blob };
  Kind kind = Kind::null_;
  long long integer_value = 0;
  double real_value = 0.0;
  std::string text_value;  // also blob bytes

  bool operator==(const Value& other) const;
  bool operator<(const Value& other) const;
};

using Row = std::vector<Value>;

struct ExecutionOutcome {
  enum class Status { rows, error, timeout };
  Status status = Status::error;
  std::set<Row> rows;  // present iff status == rows; duplicates collapsed
  std::string error_message;
  std::chrono::milliseconds elapsed{0};
};

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// Read-only execution collecting the result as a set of tuples. Never
// throws for SQL-level problems: errors and timeouts come back as statuses.
ExecutionOutcome execute_sql(const std::string& db_file, const std::string& sql,
                             std::chrono::milliseconds timeout = kDefaultTimeout);

enum class ExVerdict { correct, wrong, gold_invalid };

// Row-set equality between predicted and gold executions. Errors or a
// timeout on the predicted side make the verdict wrong; a gold-side error
// makes it gold_invalid (the example leaves the metric denominator).
ExVerdict execution_verdict(const std::string& pred_sql, const std::string& gold_sql,
                            const std::string& db_file,
                            std::chrono::milliseconds timeout = kDefaultTimeout);

bool execution_accuracy(const std::string& pred_sql, const std::string& gold_sql,
                        const std::string& db_file,
                        std::chrono::milliseconds timeout = kDefaultTimeout);

struct PerExampleScore {
  int indicator = 0;        // 1 iff predicted ⊇ gold
  double p = 0.0;           // |pred ∩ gold| / |pred|, 0 when pred is empty
  std::size_t l_gold = 0;   // |gold|
  std::size_t l_pred = 0;   // |pred|
};

struct SchemaLinkingScore {
  double recall = 0.0;     // mean of indicators
  double precision = 0.0;  // mean of p
  double f1 = 0.0;         // 2PR/(P+R), 0 when P+R = 0
  std::size_t n_examples = 0;
  std::vector<PerExampleScore> per_example;
};

// Scores (predicted, gold) linked-schema pairs over canonical column keys.
// Tables are scored only when include_tables is set (default off: columns
// imply their tables). Throws PreconditionError on empty input.
SchemaLinkingScore schema_linking_scores(
    const std::vector<std::pair<LinkedSchema, LinkedSchema>>& pairs,
    bool include_tables = false);

// Per-example record feeding the corpus report.
struct ExampleResult {
  std::size_t index = 0;
  Difficulty difficulty = Difficulty::unknown;
  ExVerdict verdict = ExVerdict::wrong;
  bool used_fallback = false;
  std::string error;  // pipeline-side failure message, empty when none
};

struct EvalReport {
  struct Bucket {
    std::size_t total = 0;    // examples with a valid gold
    std::size_t correct = 0;
    std::size_t invalid = 0;  // gold-side failures, excluded from total

    double ex_percent() const;  // rounded to one decimal
  };

  Bucket total;
  std::map<Difficulty, Bucket> by_difficulty;
  std::optional<SchemaLinkingScore> schema_linking;
  std::size_t fallback_count = 0;
  std::vector<std::string> errors;

  nlohmann::ordered_json to_json() const;
  std::string render_table() const;
};

EvalReport corpus_report(const std::vector<ExampleResult>& results,
                         const std::optional<SchemaLinkingScore>& linking);

}  // namespace tasql::eval
