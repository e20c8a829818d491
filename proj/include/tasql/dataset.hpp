#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tasql::data {

enum class Source { bird, spider };
enum class KnowledgeMode { with_knowledge, without_knowledge };

/// Both benchmark difficulty families share one enum; a report groups by
/// whichever family actually appears.
enum class Difficulty {
  simple,
  moderate,
  challenging,
  easy,
  medium,
  hard,
  extra,
  unknown,
};

Source source_from_string(const std::string& text);
KnowledgeMode knowledge_mode_from_string(const std::string& text);
Difficulty difficulty_from_string(const std::string& text);
const char* to_string(Difficulty difficulty);
const char* to_string(Source source);
const char* to_string(KnowledgeMode mode);

struct TaskExample {
  std::string question;
  std::string db_id;
  std::string evidence;  // empty when absent
  std::string gold_sql;
  Difficulty difficulty = Difficulty::unknown;
  std::optional<long long> question_id;
};

struct Corpus {
  std::vector<TaskExample> examples;
  Source source = Source::bird;
  KnowledgeMode knowledge_mode = KnowledgeMode::with_knowledge;
  std::vector<std::string> record_errors;  // skipped records, one message each
};

/// Reads a JSON array in the published benchmark layout. Field aliases
/// (`SQL` vs `query`) are normalized; records missing question/db_id/SQL are
/// skipped into record_errors. Malformed JSON throws ParseError with the
/// byte offset.
Corpus load_corpus(const std::string& path, Source source, KnowledgeMode knowledge_mode);

/// Exhaustive, disjoint, order-preserving.
std::map<Difficulty, std::vector<TaskExample>> partition_by_difficulty(const Corpus& corpus);

}  // namespace tasql::data

namespace tasql {
using data::Corpus;
using data::Difficulty;
using data::KnowledgeMode;
using data::load_corpus;
using data::partition_by_difficulty;
using data::Source;
using data::TaskExample;
}  // namespace tasql
