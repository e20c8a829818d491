#include "tasql/eval.hpp"

#include <sqlite3.h>

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tasql/errors.hpp"

namespace tasql::eval {

bool Value::operator==(const Value& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::null_: return true;
    case Kind::integer: return integer_value == other.integer_value;
    case Kind::real: return real_value == other.real_value;
    case Kind::text:
    case Kind::blob: return text_value == other.text_value;
  }
  return false;
}

bool Value::operator<(const Value& other) const {
  if (kind != other.kind) return kind < other.kind;
  switch (kind) {
    case Kind::null_: return false;
    case Kind::integer: return integer_value < other.integer_value;
    case Kind::real: return real_value < other.real_value;
    case Kind::text:
    case Kind::blob: return text_value < other.text_value;
  }
  return false;
}

namespace {

Value read_column(sqlite3_stmt* stmt, int col) {
  Value value;
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      value.kind = Value::Kind::null_;
      break;
    case SQLITE_INTEGER:
      value.kind = Value::Kind::integer;
      value.integer_value = sqlite3_column_int64(stmt, col);
      break;
    case SQLITE_FLOAT: {
      const double d = sqlite3_column_double(stmt, col);
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.007199254740992e15) {
        value.kind = Value::Kind::integer;
        value.integer_value = static_cast<long long>(d);
      } else {
        value.kind = Value::Kind::real;
        value.real_value = d;
      }
      break;
    }
    case SQLITE_TEXT: {
      value.kind = Value::Kind::text;
      const unsigned char* text = sqlite3_column_text(stmt, col);
      value.text_value = text ? reinterpret_cast<const char*>(text) : "";
      break;
    }
    case SQLITE_BLOB: {
      value.kind = Value::Kind::blob;
      const void* data = sqlite3_column_blob(stmt, col);
      const int size = sqlite3_column_bytes(stmt, col);
      value.text_value.assign(static_cast<const char*>(data ? data : ""),
                              data ? static_cast<std::size_t>(size) : 0);
      break;
    }
    default:
      value.kind = Value::Kind::null_;
      break;
  }
  return value;
}

struct TimeoutState {
  std::chrono::steady_clock::time_point deadline;
  bool fired = false;
};

int progress_callback(void* raw) {
  auto* state = static_cast<TimeoutState*>(raw);
  if (std::chrono::steady_clock::now() >= state->deadline) {
    state->fired = true;
    return 1;  // interrupt
  }
  return 0;
}

}  // namespace

ExecutionOutcome execute_sql(const std::string& db_file, const std::string& sql,
                             std::chrono::milliseconds timeout) {
  ExecutionOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  auto finish = [&] {
    outcome.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
  };

  sqlite3* db = nullptr;
  if (sqlite3_open_v2(db_file.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    outcome.status = ExecutionOutcome::Status::error;
    outcome.error_message = db ? sqlite3_errmsg(db) : "cannot open database";
    if (db) sqlite3_close(db);
    finish();
    return outcome;
  }

  TimeoutState state{started + timeout, false};
  sqlite3_progress_handler(db, 1000, progress_callback, &state);

  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    outcome.status = ExecutionOutcome::Status::error;
    outcome.error_message = sqlite3_errmsg(db);
    sqlite3_close(db);
    finish();
    return outcome;
  }
  if (!stmt) {  // empty statement text
    outcome.status = ExecutionOutcome::Status::error;
    outcome.error_message = "no SQL statement";
    sqlite3_close(db);
    finish();
    return outcome;
  }

  while (true) {
    const int rc = sqlite3_step(stmt);
    if (rc == SQLITE_ROW) {
      Row row;
      const int columns = sqlite3_column_count(stmt);
      row.reserve(static_cast<std::size_t>(columns));
      for (int col = 0; col < columns; ++col) row.push_back(read_column(stmt, col));
      outcome.rows.insert(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) {
      outcome.status = ExecutionOutcome::Status::rows;
    } else if (state.fired || rc == SQLITE_INTERRUPT) {
      outcome.status = ExecutionOutcome::Status::timeout;
      outcome.error_message = "timed out";
      outcome.rows.clear();
    } else {
      outcome.status = ExecutionOutcome::Status::error;
      outcome.error_message = sqlite3_errmsg(db);
      outcome.rows.clear();
    }
    break;
  }

  sqlite3_finalize(stmt);
  sqlite3_close(db);
  finish();
  return outcome;
}

ExVerdict execution_verdict(const std::string& pred_sql, const std::string& gold_sql,
                            const std::string& db_file, std::chrono::milliseconds timeout) {
  const ExecutionOutcome gold = execute_sql(db_file, gold_sql, timeout);
  if (gold.status != ExecutionOutcome::Status::rows) return ExVerdict::gold_invalid;
  const ExecutionOutcome pred = execute_sql(db_file, pred_sql, timeout);
  if (pred.status != ExecutionOutcome::Status::rows) return ExVerdict::wrong;
  return pred.rows == gold.rows ? ExVerdict::correct : ExVerdict::wrong;
}

bool execution_accuracy(const std::string& pred_sql, const std::string& gold_sql,
                        const std::string& db_file, std::chrono::milliseconds timeout) {
  return execution_verdict(pred_sql, gold_sql, db_file, timeout) == ExVerdict::correct;
}

SchemaLinkingScore schema_linking_scores(
    const std::vector<std::pair<LinkedSchema, LinkedSchema>>& pairs, bool include_tables) {
  if (pairs.empty()) {
    throw PreconditionError("schema_linking_scores requires at least one pair");
  }
  SchemaLinkingScore score;
  score.n_examples = pairs.size();
  double indicator_sum = 0.0;
  double p_sum = 0.0;
  for (const auto& [pred, gold] : pairs) {
    auto keys = [&](const LinkedSchema& schema) {
      std::set<std::string> out;
      for (const ColumnRef& ref : schema.columns) out.insert(ref.canonical());
      if (include_tables) {
        for (const std::string& table : schema.tables) out.insert(ascii_lower(table));
      }
      return out;
    };
    const std::set<std::string> pred_keys = keys(pred);
    const std::set<std::string> gold_keys = keys(gold);

    PerExampleScore per;
    per.l_gold = gold_keys.size();
    per.l_pred = pred_keys.size();
    std::size_t overlap = 0;
    bool superset = true;
    for (const std::string& key : gold_keys) {
      if (pred_keys.count(key)) {
        ++overlap;
      } else {
        superset = false;
      }
    }
    per.indicator = superset ? 1 : 0;
    per.p = pred_keys.empty() ? 0.0
                              : static_cast<double>(overlap) / static_cast<double>(pred_keys.size());
    indicator_sum += per.indicator;
    p_sum += per.p;
    score.per_example.push_back(per);
  }
  const double n = static_cast<double>(score.n_examples);
  score.recall = indicator_sum / n;
  score.precision = p_sum / n;
  score.f1 = (score.precision + score.recall) == 0.0
                 ? 0.0
                 : 2.0 * score.precision * score.recall / (score.precision + score.recall);
  return score;
}

double EvalReport::Bucket::ex_percent() const {
  if (total == 0) return 0.0;
  const double raw = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
  return std::round(raw * 10.0) / 10.0;
}

EvalReport corpus_report(const std::vector<ExampleResult>& results,
                         const std::optional<SchemaLinkingScore>& linking) {
  EvalReport report;
  report.schema_linking = linking;
  for (const ExampleResult& result : results) {
    auto& bucket = report.by_difficulty[result.difficulty];
    if (result.verdict == ExVerdict::gold_invalid) {
      ++bucket.invalid;
      ++report.total.invalid;
    } else {
      ++bucket.total;
      ++report.total.total;
      if (result.verdict == ExVerdict::correct) {
        ++bucket.correct;
        ++report.total.correct;
      }
    }
    if (result.used_fallback) ++report.fallback_count;
    if (!result.error.empty()) {
      report.errors.push_back("example " + std::to_string(result.index) + ": " + result.error);
    }
  }
  return report;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["total_ex"] = total.ex_percent();
  doc["total_correct"] = total.correct;
  doc["total_examples"] = total.total;
  doc["gold_invalid"] = total.invalid;
  nlohmann::ordered_json buckets = nlohmann::ordered_json::object();
  for (const auto& [difficulty, bucket] : by_difficulty) {
    nlohmann::ordered_json entry;
    entry["ex"] = bucket.ex_percent();
    entry["correct"] = bucket.correct;
    entry["examples"] = bucket.total;
    entry["gold_invalid"] = bucket.invalid;
    buckets[data::to_string(difficulty)] = std::move(entry);
  }
  doc["by_difficulty"] = std::move(buckets);
  if (schema_linking) {
    nlohmann::ordered_json block;
    block["recall"] = schema_linking->recall;
    block["precision"] = schema_linking->precision;
    block["f1"] = schema_linking->f1;
    block["n_examples"] = schema_linking->n_examples;
    doc["schema_linking"] = std::move(block);
  }
  doc["fallbacks"] = fallback_count;
  doc["errors"] = errors;
  return doc;
}

std::string EvalReport::render_table() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %8s %8s %8s\n", "difficulty", "count", "correct", "EX");
  out << line;
  for (const auto& [difficulty, bucket] : by_difficulty) {
    std::snprintf(line, sizeof line, "%-14s %8zu %8zu %7.1f%%\n", data::to_string(difficulty),
                  bucket.total, bucket.correct, bucket.ex_percent());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-14s %8zu %8zu %7.1f%%\n", "total", total.total,
                total.correct, total.ex_percent());
  out << line;
  if (total.invalid > 0) {
    out << "gold-invalid examples excluded: " << total.invalid << "\n";
  }
  if (schema_linking) {
    std::snprintf(line, sizeof line, "schema linking: R=%.4f P=%.4f F1=%.4f over %zu examples\n",
                  schema_linking->recall, schema_linking->precision, schema_linking->f1,
                  schema_linking->n_examples);
    out << line;
  }
  if (fallback_count > 0) {
    out << "full-catalog fallbacks: " << fallback_count << "\n";
  }
  for (const std::string& error : errors) {
    out << "error: " << error << "\n";
  }
  return out.str();
}

}  // namespace tasql::eval
