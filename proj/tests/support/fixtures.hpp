#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace testsupport {

// Fresh directory under the system temp root; unique per call.
std::string scratch_dir(const std::string& tag);

void create_db(const std::string& db_file, const std::string& script);

void build_california_schools(const std::string& db_file);
void build_debit_card(const std::string& db_file);
void build_mtg(const std::string& db_file);
void build_player(const std::string& db_file);
void build_superhero(const std::string& db_file);
void build_toxicology(const std::string& db_file);
void build_forum(const std::string& db_file);
void build_club(const std::string& db_file);

struct CacheEntry {
  std::string prompt;
  std::string response;
};

// Writes a replay cache in the gateway's JSONL format, keys computed from
// the real prompt bytes with the default decoding config.
void write_cache(const std::string& path, const std::vector<CacheEntry>& entries,
                 const std::string& model_id = "gpt-4");

struct GeneratedExample {
  std::string db_id;
  std::string question;
  std::string evidence;
  std::string gold_sql;
  std::string difficulty;
};

struct GeneratedCorpus {
  std::string dataset_path;
  std::string databases_root;
  std::vector<GeneratedExample> examples;
};

// Deterministic corpus over the california_schools and
// debit_card_specializing fixtures, with databases laid out as
// root/databases/<db_id>/<db_id>.sqlite. Every gold query executes.
GeneratedCorpus generate_corpus(const std::string& root_dir, std::size_t n);

// predictions.jsonl with final_sql = gold_sql for every example.
void write_gold_predictions(const std::string& path, const GeneratedCorpus& corpus);

}  // namespace testsupport
