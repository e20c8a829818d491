#include "tasql/dataset.hpp"

#include <fstream>

#include "json.hpp"

#include "tasql/errors.hpp"
#include "tasql/strings.hpp"

namespace tasql::data {

Source source_from_string(const std::string& text) {
  if (iequals(text, "bird")) return Source::bird;
  if (iequals(text, "spider")) return Source::spider;
  throw ConfigError("unknown source '" + text + "' (expected bird|spider)");
}

KnowledgeMode knowledge_mode_from_string(const std::string& text) {
  if (iequals(text, "with") || iequals(text, "with_knowledge")) return KnowledgeMode::with_knowledge;
  if (iequals(text, "without") || iequals(text, "without_knowledge")) {
    return KnowledgeMode::without_knowledge;
  }
  throw ConfigError("unknown knowledge mode '" + text + "' (expected with|without)");
}

Difficulty difficulty_from_string(const std::string& text) {
  const std::string lower = ascii_lower(trim(text));
  if (lower == "simple") return Difficulty::simple;
  if (lower == "moderate") return Difficulty::moderate;
  if (lower == "challenging") return Difficulty::challenging;
  if (lower == "easy") return Difficulty::easy;
  if (lower == "medium") return Difficulty::medium;
  if (lower == "hard") return Difficulty::hard;
  if (lower == "extra" || lower == "extra hard") return Difficulty::extra;
  return Difficulty::unknown;
}

const char* to_string(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::simple: return "simple";
    case Difficulty::moderate: return "moderate";
    case Difficulty::challenging: return "challenging";
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
    case Difficulty::extra: return "extra";
    case Difficulty::unknown: return "unknown";
  }
  return "?";
}

const char* to_string(Source source) {
  return source == Source::bird ? "bird" : "spider";
}

const char* to_string(KnowledgeMode mode) {
  return mode == KnowledgeMode::with_knowledge ? "with_knowledge" : "without_knowledge";
}

Corpus load_corpus(const std::string& path, Source source, KnowledgeMode knowledge_mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset file " + path);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("dataset ") + path + ": " + e.what(),
                     static_cast<std::size_t>(e.byte));
  }
  if (!doc.is_array()) {
    throw ParseError("dataset " + path + ": top-level value must be an array", 0);
  }

  Corpus corpus;
  corpus.source = source;
  corpus.knowledge_mode = knowledge_mode;

  std::size_t index = 0;
  for (const auto& record : doc) {
    ++index;
    auto fail = [&](const std::string& why) {
      corpus.record_errors.push_back("record " + std::to_string(index) + ": " + why);
    };
    if (!record.is_object()) {
      fail("not an object; skipped");
      continue;
    }
    TaskExample example;
    example.question = trim(record.value("question", ""));
    example.db_id = trim(record.value("db_id", ""));
    if (record.contains("SQL") && record["SQL"].is_string()) {
      example.gold_sql = record["SQL"].get<std::string>();
    } else if (record.contains("query") && record["query"].is_string()) {
      example.gold_sql = record["query"].get<std::string>();
    }
    if (record.contains("evidence") && record["evidence"].is_string()) {
      example.evidence = record["evidence"].get<std::string>();
    }
    example.difficulty = difficulty_from_string(record.value("difficulty", ""));
    if (record.contains("question_id") && record["question_id"].is_number_integer()) {
      example.question_id = record["question_id"].get<long long>();
    }

    if (example.question.empty()) {
      fail("missing question; skipped");
      continue;
    }
    if (example.db_id.empty()) {
      fail("missing db_id; skipped");
      continue;
    }
    if (example.gold_sql.empty()) {
      fail("missing SQL/query; skipped");
      continue;
    }
    corpus.examples.push_back(std::move(example));
  }
  return corpus;
}

std::map<Difficulty, std::vector<TaskExample>> partition_by_difficulty(const Corpus& corpus) {
  std::map<Difficulty, std::vector<TaskExample>> buckets;
  for (const auto& example : corpus.examples) {
    buckets[example.difficulty].push_back(example);
  }
  return buckets;
}

}  // namespace tasql::data
