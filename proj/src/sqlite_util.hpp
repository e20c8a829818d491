#pragma once

#include <sqlite3.h>

#include <functional>
#include <string>
#include <vector>

#include "tasql/errors.hpp"

namespace tasql::sqlite {

/// RAII connection. Read-only unless `writable`.
class Db {
public:
  Db(const std::string& path, bool writable = false) {
    const int flags = writable ? (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE) : SQLITE_OPEN_READONLY;
    if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
      std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
      if (db_) sqlite3_close(db_);
      db_ = nullptr;
      throw IoError("cannot open database " + path + ": " + message);
    }
  }

  Db(const Db&) = delete;
  Db& operator=(const Db&) = delete;

  ~Db() {
    if (db_) sqlite3_close(db_);
  }

  sqlite3* handle() const { return db_; }

  void exec(const std::string& sql) {
    char* errmsg = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &errmsg) != SQLITE_OK) {
      std::string message = errmsg ? errmsg : "unknown error";
      sqlite3_free(errmsg);
      throw IoError("sqlite exec failed: " + message + " (sql: " + sql + ")");
    }
  }

private:
  sqlite3* db_ = nullptr;
};

class Statement {
public:
  Statement(Db& db, const std::string& sql) : db_(db.handle()) {
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      throw IoError("sqlite prepare failed: " + std::string(sqlite3_errmsg(db_)) +
                    " (sql: " + sql + ")");
    }
  }

  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  ~Statement() {
    if (stmt_) sqlite3_finalize(stmt_);
  }

  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw IoError("sqlite step failed: " + std::string(sqlite3_errmsg(db_)));
  }

  int column_count() const { return sqlite3_column_count(stmt_); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  long long column_int(int col) const { return sqlite3_column_int64(stmt_, col); }

  std::string column_text(int col) const {
    const unsigned char* text = sqlite3_column_text(stmt_, col);
    return text ? reinterpret_cast<const char*>(text) : "";
  }

  sqlite3_stmt* handle() const { return stmt_; }

private:
  sqlite3* db_ = nullptr;
  sqlite3_stmt* stmt_ = nullptr;
};

/// Quotes an identifier for embedding in a PRAGMA/SELECT.
inline std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  out += "\"";
  return out;
}

}  // namespace tasql::sqlite
