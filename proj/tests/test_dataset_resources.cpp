#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "tasql/dataset.hpp"
#include "tasql/errors.hpp"
#include "tasql/resources.hpp"
#include "tasql/strings.hpp"

using namespace tasql;

namespace {

std::string write_dataset(const std::string& name, const std::string& content) {
  const std::string path = testsupport::scratch_dir("dataset") + "/" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("corpus loading normalizes aliases and skips broken records") {
  const std::string path = write_dataset("dev.json", R"json([
    {"question": "How many schools?", "db_id": "d1", "SQL": "SELECT 1",
     "difficulty": "simple", "question_id": 7, "evidence": "hint"},
    {"question": "Which county?", "db_id": "d1", "query": "SELECT 2"},
    {"db_id": "d1", "SQL": "SELECT 3"},
    {"question": "No database", "SQL": "SELECT 4"},
    {"question": "No statement", "db_id": "d1"},
    "just a string",
    {"question": "  padded  ", "db_id": " d2 ", "SQL": "SELECT 5",
     "difficulty": "Challenging"}
  ])json");

  const Corpus corpus = load_corpus(path, Source::bird, KnowledgeMode::with_knowledge);
  REQUIRE(corpus.examples.size() == 3);
  CHECK(corpus.examples[0].question == "How many schools?");
  CHECK(corpus.examples[0].evidence == "hint");
  CHECK(corpus.examples[0].gold_sql == "SELECT 1");
  CHECK(corpus.examples[0].difficulty == Difficulty::simple);
  CHECK(corpus.examples[0].question_id == 7);
  CHECK(corpus.examples[1].gold_sql == "SELECT 2");
  CHECK(corpus.examples[1].difficulty == Difficulty::unknown);
  CHECK(corpus.examples[1].question_id == std::nullopt);
  CHECK(corpus.examples[2].question == "padded");
  CHECK(corpus.examples[2].db_id == "d2");
  CHECK(corpus.examples[2].difficulty == Difficulty::challenging);

  REQUIRE(corpus.record_errors.size() == 4);
  CHECK(corpus.record_errors[0] == "record 3: missing question; skipped");
  CHECK(corpus.record_errors[1] == "record 4: missing db_id; skipped");
  CHECK(corpus.record_errors[2] == "record 5: missing SQL/query; skipped");
  CHECK(corpus.record_errors[3] == "record 6: not an object; skipped");
  CHECK(corpus.source == Source::bird);
  CHECK(corpus.knowledge_mode == KnowledgeMode::with_knowledge);
}

TEST_CASE("corpus loading fails loudly on unreadable input") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/dev.json", Source::bird,
                              KnowledgeMode::with_knowledge),
                  IoError);
  const std::string truncated = write_dataset("bad.json", "[{\"question\": ");
  CHECK_THROWS_AS(load_corpus(truncated, Source::bird, KnowledgeMode::with_knowledge), ParseError);
  const std::string object = write_dataset("object.json", "{\"a\": 1}");
  CHECK_THROWS_AS(load_corpus(object, Source::bird, KnowledgeMode::with_knowledge), ParseError);
}

TEST_CASE("difficulty names parse from both benchmark families") {
  CHECK(data::difficulty_from_string("simple") == Difficulty::simple);
  CHECK(data::difficulty_from_string("  Moderate ") == Difficulty::moderate);
  CHECK(data::difficulty_from_string("CHALLENGING") == Difficulty::challenging);
  CHECK(data::difficulty_from_string("easy") == Difficulty::easy);
  CHECK(data::difficulty_from_string("medium") == Difficulty::medium);
  CHECK(data::difficulty_from_string("hard") == Difficulty::hard);
  CHECK(data::difficulty_from_string("extra") == Difficulty::extra);
  CHECK(data::difficulty_from_string("Extra Hard") == Difficulty::extra);
  CHECK(data::difficulty_from_string("whatever") == Difficulty::unknown);
  CHECK(data::difficulty_from_string("") == Difficulty::unknown);

  for (Difficulty d : {Difficulty::simple, Difficulty::moderate, Difficulty::challenging,
                       Difficulty::easy, Difficulty::medium, Difficulty::hard, Difficulty::extra}) {
    CHECK(data::difficulty_from_string(data::to_string(d)) == d);
  }
}

TEST_CASE("source and knowledge mode names are validated") {
  CHECK(data::source_from_string("bird") == Source::bird);
  CHECK(data::source_from_string("Spider") == Source::spider);
  CHECK_THROWS_AS(data::source_from_string("wikisql"), ConfigError);
  CHECK(data::knowledge_mode_from_string("with") == KnowledgeMode::with_knowledge);
  CHECK(data::knowledge_mode_from_string("without_knowledge") == KnowledgeMode::without_knowledge);
  CHECK_THROWS_AS(data::knowledge_mode_from_string("maybe"), ConfigError);
  CHECK(std::string(data::to_string(Source::spider)) == "spider");
  CHECK(std::string(data::to_string(KnowledgeMode::without_knowledge)) == "without_knowledge");
}

TEST_CASE("difficulty partitioning is exhaustive and order preserving") {
  Corpus corpus;
  auto add = [&](const char* q, Difficulty d) {
    TaskExample e;
    e.question = q;
    e.db_id = "d";
    e.gold_sql = "SELECT 1";
    e.difficulty = d;
    corpus.examples.push_back(e);
  };
  add("q1", Difficulty::simple);
  add("q2", Difficulty::challenging);
  add("q3", Difficulty::simple);
  add("q4", Difficulty::unknown);

  const auto buckets = data::partition_by_difficulty(corpus);
  REQUIRE(buckets.size() == 3);
  REQUIRE(buckets.at(Difficulty::simple).size() == 2);
  CHECK(buckets.at(Difficulty::simple)[0].question == "q1");
  CHECK(buckets.at(Difficulty::simple)[1].question == "q3");
  CHECK(buckets.at(Difficulty::challenging).size() == 1);
  CHECK(buckets.at(Difficulty::unknown).size() == 1);
  std::size_t total = 0;
  for (const auto& [d, group] : buckets) total += group.size();
  CHECK(total == corpus.examples.size());
}

TEST_CASE("templates substitute placeholders and drop lines with empty values") {
  const std::string tmpl =
      "Question: {question}\n"
      "evidence = \"{evidence}\"\n"
      "{question} again on line three\n"
      "static tail";

  SUBCASE("all values present") {
    const std::string out = resources::render_template(
        tmpl, {{"question", "How many?"}, {"evidence", "a hint"}});
    CHECK(out ==
          "Question: How many?\n"
          "evidence = \"a hint\"\n"
          "How many? again on line three\n"
          "static tail");
  }
  SUBCASE("an empty value removes every line mentioning it") {
    const std::string out =
        resources::render_template(tmpl, {{"question", "How many?"}, {"evidence", ""}});
    CHECK(out ==
          "Question: How many?\n"
          "How many? again on line three\n"
          "static tail");
  }
  SUBCASE("unknown placeholders stay verbatim") {
    const std::string out = resources::render_template("keep {unknown} text", {{"question", "x"}});
    CHECK(out == "keep {unknown} text");
  }
  SUBCASE("repeated placeholders on one line all substitute") {
    const std::string out = resources::render_template("{x}-{x}-{x}", {{"x", "ab"}});
    CHECK(out == "ab-ab-ab");
  }
}

TEST_CASE("resource root resolution prefers explicit over environment") {
  const std::string dir_a = testsupport::scratch_dir("res_a");
  const std::string dir_b = testsupport::scratch_dir("res_b");
  {
    std::ofstream out(dir_a + "/probe.txt", std::ios::binary);
    out << "from env";
  }
  {
    std::ofstream out(dir_b + "/probe.txt", std::ios::binary);
    out << "from set_root";
  }

  struct Restore {
    ~Restore() {
      tasql::resources::set_root("");
      unsetenv("TASQL_RESOURCES");
    }
  } restore;

  setenv("TASQL_RESOURCES", dir_a.c_str(), 1);
  CHECK(resources::load_text("probe.txt") == "from env");
  resources::set_root(dir_b);
  CHECK(resources::root() == std::filesystem::path(dir_b));
  CHECK(resources::load_text("probe.txt") == "from set_root");
  resources::set_root("");
  CHECK(resources::load_text("probe.txt") == "from env");
  CHECK_THROWS_AS(resources::load_text("missing_file.txt"), IoError);
}

TEST_CASE("the default resource root carries the shipped prompt files") {
  CHECK(resources::load_text("prompts/dummy_sql.txt").find("{question}") != std::string::npos);
  CHECK(!resources::load_text("prompts/symbolic_synthesis.txt").empty());
  CHECK(!resources::load_text("sqlite_functions.txt").empty());
}

TEST_CASE("string helpers behave on edges") {
  CHECK(ascii_lower("MiXeD_09") == "mixed_09");
  CHECK(ascii_upper("MiXeD_09") == "MIXED_09");
  CHECK(iequals("Schools", "sCHOOLS"));
  CHECK_FALSE(iequals("schools", "school"));
  CHECK(trim("  \t body \r\n ") == "body");
  CHECK(trim(" \n\t ").empty());

  CHECK(split_lines("a\r\nb\nc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_lines("tail\n") == std::vector<std::string>{"tail", ""});
  CHECK(split_lines("") == std::vector<std::string>{""});
  CHECK(join({"x", "y", "z"}, ", ") == "x, y, z");
  CHECK(join({}, ", ").empty());

  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
  CHECK(fnv1a64_hex("ab").size() == 16);
}
