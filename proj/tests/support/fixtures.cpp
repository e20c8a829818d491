#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "sqlite_util.hpp"
#include "tasql/llm_gateway.hpp"

namespace testsupport {

namespace fs = std::filesystem;

std::string scratch_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const fs::path base = fs::temp_directory_path() / "tasql_tests";
  const fs::path dir =
      base / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

void create_db(const std::string& db_file, const std::string& script) {
  fs::remove(db_file);
  tasql::sqlite::Db db(db_file, true);
  db.exec(script);
}

void build_california_schools(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE schools (
  CDSCode TEXT PRIMARY KEY,
  School TEXT,
  District TEXT,
  County TEXT,
  StatusType TEXT,
  Phone TEXT,
  Charter INTEGER
);
CREATE TABLE satscores (
  cds TEXT PRIMARY KEY REFERENCES schools(CDSCode),
  sname TEXT,
  dname TEXT,
  cname TEXT,
  enroll12 INTEGER,
  NumTstTakr INTEGER,
  AvgScrRead INTEGER,
  AvgScrMath INTEGER,
  NumGE1500 INTEGER
);
CREATE TABLE frpm (
  CDSCode TEXT PRIMARY KEY REFERENCES schools(CDSCode),
  FRPMCount INTEGER,
  Enrollment INTEGER
);
INSERT INTO schools VALUES
  ('s01','Adams High','Unified A','Fresno','Active','555-0001',0),
  ('s02','Burbank Elementary','Unified A','Fresno','Active','555-0002',1),
  ('s03','Chavez Middle','Unified B','Fresno','Closed','555-0003',0),
  ('s04','Dewey High','Unified C','Alameda','Active','555-0004',0),
  ('s05','Euclid Academy','Unified C','Alameda','Active','555-0005',1),
  ('s06','Fulton School','Unified D','Alameda','Closed','555-0006',0),
  ('s07','Galileo High','Unified E','Contra Costa','Active','555-0007',0),
  ('s08','Harte Prep','Unified E','Contra Costa','Active','555-0008',1),
  ('s09','Irving High','Unified F','Los Angeles','Active','555-0009',0),
  ('s10','Jefferson School','Unified F','Los Angeles','Closed','555-0010',0);
INSERT INTO satscores VALUES
  ('s01','Adams High','Unified A','Fresno',120,200,480,500,40),
  ('s02','Burbank Elementary','Unified A','Fresno',60,90,520,515,25),
  ('s03','Chavez Middle','Unified B','Fresno',80,110,430,425,10),
  ('s04','Dewey High','Unified C','Alameda',150,260,610,620,120),
  ('s05','Euclid Academy','Unified C','Alameda',70,120,590,605,80),
  ('s06','Fulton School','Unified D','Alameda',90,140,450,440,15),
  ('s07','Galileo High','Unified E','Contra Costa',130,210,560,575,70),
  ('s08','Harte Prep','Unified E','Contra Costa',50,80,540,530,35),
  ('s09','Irving High','Unified F','Los Angeles',160,280,500,490,55),
  ('s10','Jefferson School','Unified F','Los Angeles',75,100,470,460,20);
INSERT INTO frpm VALUES
  ('s01',90,300),('s02',45,150),('s04',60,400),('s05',30,200),
  ('s07',80,350),('s08',20,140),('s09',150,450),('s10',70,210);
)sql");
}

void build_debit_card(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE customers (CustomerID INTEGER PRIMARY KEY, Segment TEXT, Currency TEXT);
CREATE TABLE gasstations (GasStationID INTEGER PRIMARY KEY, ChainID INTEGER, Country TEXT, Segment TEXT);
CREATE TABLE products (ProductID INTEGER PRIMARY KEY, Description TEXT);
CREATE TABLE transactions_1k (
  TransactionID INTEGER PRIMARY KEY,
  Date TEXT,
  Time TEXT,
  CustomerID INTEGER REFERENCES customers(CustomerID),
  CardID INTEGER,
  GasStationID INTEGER REFERENCES gasstations(GasStationID),
  ProductID INTEGER REFERENCES products(ProductID),
  Amount INTEGER,
  Price REAL
);
CREATE TABLE yearmonth (
  CustomerID INTEGER REFERENCES customers(CustomerID),
  Date TEXT,
  Consumption REAL,
  PRIMARY KEY (CustomerID, Date)
);
INSERT INTO customers VALUES
  (1,'SME','EUR'),(2,'SME','CZK'),(3,'LAM','EUR'),(4,'KAM','CZK'),(5,'LAM','CZK'),(6,'SME','EUR');
INSERT INTO gasstations VALUES
  (10,100,'CZE','Value for money'),(11,100,'SVK','Premium'),(12,200,'CZE','Other');
INSERT INTO products VALUES (1,'Nafta'),(2,'Natural'),(3,'Toll');
INSERT INTO transactions_1k VALUES
  (1000,'2012-08-23','08:15',1,501,10,1,40,28.5),
  (1001,'2012-08-23','09:10',2,502,10,2,25,30.1),
  (1002,'2012-08-24','10:05',3,503,11,1,60,27.9),
  (1003,'2012-08-24','11:30',5,505,12,3,10,12.0),
  (1004,'2012-08-25','07:45',1,501,10,1,35,28.7),
  (1005,'2012-08-25','12:20',2,502,11,2,45,30.4),
  (1006,'2012-08-25','14:55',3,503,12,1,55,27.4),
  (1007,'2012-08-25','16:40',4,504,10,3,15,12.5),
  (1008,'2012-08-26','09:25',6,506,11,1,70,28.2),
  (1009,'2012-08-26','13:10',4,504,12,2,30,29.8),
  (1010,'2012-08-26','15:35',5,505,10,1,20,28.0),
  (1011,'2012-08-26','18:05',1,501,11,3,12,12.3);
INSERT INTO yearmonth VALUES
  (1,'201208',140.5),(2,'201208',95.0),(3,'201208',180.25),
  (4,'201208',55.75),(5,'201208',30.0),(6,'201208',70.5);
)sql");
}

void build_mtg(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE sets (id INTEGER PRIMARY KEY, name TEXT, block TEXT, baseSetSize INTEGER);
CREATE TABLE set_translations (
  id INTEGER PRIMARY KEY,
  setCode INTEGER REFERENCES sets(id),
  language TEXT,
  translation TEXT
);
INSERT INTO sets VALUES
  (1,'Ravnica: City of Guilds','Ravnica',180),
  (2,'Guildpact','Ravnica',165),
  (3,'Коldhеim','Kaldheim',285);
INSERT INTO set_translations VALUES
  (1,1,'Japanese','ラヴニカ'),
  (2,1,'German','Ravnica'),
  (3,2,'French','Le Pacte des Guildes');
)sql");
}

void build_player(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE Player (player_id INTEGER PRIMARY KEY, player_name TEXT, height REAL, weight INTEGER);
INSERT INTO Player VALUES
  (1,'Aaron Appleton',182.88,187),
  (2,'Boris Becker',190.5,200),
  (3,'Carl Court',200.66,210),
  (4,'Dan Drake',175.26,170);
)sql");
}

void build_superhero(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE colour (id INTEGER PRIMARY KEY, colour TEXT);
CREATE TABLE gender (id INTEGER PRIMARY KEY, gender TEXT);
CREATE TABLE superhero (
  id INTEGER PRIMARY KEY,
  superhero_name TEXT,
  race TEXT,
  gender_id INTEGER REFERENCES gender(id),
  hair_colour_id INTEGER REFERENCES colour(id)
);
INSERT INTO colour VALUES (1,'Blue'),(2,'Green'),(3,'Black'),(4,'No Colour');
INSERT INTO gender VALUES (1,'Male'),(2,'Female');
INSERT INTO superhero VALUES
  (1,'Azure Arrow','Human',1,1),
  (2,'Beetle','Alien',2,2),
  (3,'Cobalt','Human',1,3),
  (4,'Dynamo','Android',2,1);
)sql");
}

void build_toxicology(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE molecule (molecule_id TEXT PRIMARY KEY, label TEXT);
CREATE TABLE atom (
  atom_id TEXT PRIMARY KEY,
  molecule_id TEXT REFERENCES molecule(molecule_id),
  element TEXT
);
CREATE TABLE bond (
  bond_id TEXT PRIMARY KEY,
  molecule_id TEXT REFERENCES molecule(molecule_id),
  bond_type TEXT
);
CREATE TABLE connected (
  atom_id TEXT REFERENCES atom(atom_id),
  atom_id2 TEXT REFERENCES atom(atom_id),
  bond_id TEXT REFERENCES bond(bond_id),
  PRIMARY KEY (atom_id, atom_id2)
);
INSERT INTO molecule VALUES ('TR000','+'),('TR001','-'),('TR002','+');
INSERT INTO atom VALUES
  ('TR000_1','TR000','te'),('TR000_2','TR000','c'),
  ('TR001_1','TR001','h'),('TR001_2','TR001','o'),
  ('TR002_1','TR002','cl');
INSERT INTO bond VALUES
  ('TR000_1_2','TR000','-'),('TR001_1_2','TR001','='),('TR002_1_1','TR002','#');
INSERT INTO connected VALUES
  ('TR000_1','TR000_2','TR000_1_2'),
  ('TR001_1','TR001_2','TR001_1_2');
)sql");
}

void build_forum(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE posts (Id INTEGER PRIMARY KEY, Title TEXT, FavoriteCount INTEGER);
CREATE TABLE votes (Id INTEGER PRIMARY KEY, PostId INTEGER REFERENCES posts(Id), UserId INTEGER);
INSERT INTO posts VALUES
  (1,'How to normalize',12),(2,'Index tuning',30),(3,'Join order',7),(4,'Window functions',19);
INSERT INTO votes VALUES
  (100,1,14),(101,2,14),(102,2,15),(103,3,14),(104,4,16);
)sql");
}

void build_club(const std::string& db_file) {
  create_db(db_file, R"sql(
CREATE TABLE member (member_id TEXT PRIMARY KEY, first_name TEXT, position TEXT);
CREATE TABLE income (
  income_id TEXT PRIMARY KEY,
  amount INTEGER,
  link_to_member TEXT REFERENCES member(member_id)
);
INSERT INTO member VALUES
  ('m01','Ada','Member'),('m02','Ben','Member'),('m03','Cleo','President'),('m04','Dev','Member');
INSERT INTO income VALUES
  ('i01',50,'m01'),('i02',60,'m02'),('i03',50,'m03'),('i04',45,'m04'),('i05',50,'m04');
)sql");
}

void write_cache(const std::string& path, const std::vector<CacheEntry>& entries,
                 const std::string& model_id) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write cache " + path);
  tasql::llm::DecodingConfig decoding;
  for (const CacheEntry& entry : entries) {
    nlohmann::ordered_json record;
    record["key"] = tasql::llm::cache_key(entry.prompt, decoding, model_id);
    record["model"] = model_id;
    record["prompt"] = entry.prompt;
    record["response"] = entry.response;
    out << record.dump() << "\n";
  }
}

GeneratedCorpus generate_corpus(const std::string& root_dir, std::size_t n) {
  GeneratedCorpus corpus;
  const fs::path root(root_dir);
  const fs::path databases = root / "databases";
  fs::create_directories(databases / "california_schools");
  fs::create_directories(databases / "debit_card_specializing");
  build_california_schools((databases / "california_schools" / "california_schools.sqlite").string());
  build_debit_card(
      (databases / "debit_card_specializing" / "debit_card_specializing.sqlite").string());
  corpus.databases_root = databases.string();

  const std::vector<std::string> counties = {"Fresno", "Alameda", "Contra Costa", "Los Angeles"};
  const std::vector<std::string> dates = {"2012-08-23", "2012-08-24", "2012-08-25", "2012-08-26"};
  const std::vector<std::string> difficulties = {"simple", "moderate", "challenging"};

  for (std::size_t i = 0; i < n; ++i) {
    GeneratedExample example;
    example.difficulty = difficulties[i % difficulties.size()];
    switch (i % 8) {
      case 0: {
        const std::string& county = counties[i / 8 % counties.size()];
        example.db_id = "california_schools";
        example.question = "List the schools in " + county + ".";
        example.gold_sql = "SELECT School FROM schools WHERE County = '" + county + "'";
        break;
      }
      case 1: {
        example.db_id = "california_schools";
        example.question = "How many schools are currently active?";
        example.gold_sql = "SELECT COUNT(*) FROM schools WHERE StatusType = 'Active'";
        break;
      }
      case 2: {
        const int threshold = 80 + static_cast<int>(i / 8 % 5) * 30;
        example.db_id = "california_schools";
        example.question = "Which schools had more than " + std::to_string(threshold) +
                           " SAT test takers?";
        example.evidence = "test takers are NumTstTakr";
        example.gold_sql = "SELECT sname FROM satscores WHERE NumTstTakr > " +
                           std::to_string(threshold);
        break;
      }
      case 3: {
        const int score = 450 + static_cast<int>(i / 8 % 4) * 40;
        example.db_id = "california_schools";
        example.question = "Name the schools whose average reading score exceeds " +
                           std::to_string(score) + ".";
        example.gold_sql =
            "SELECT schools.School FROM schools INNER JOIN satscores ON satscores.cds = "
            "schools.CDSCode WHERE satscores.AvgScrRead > " +
            std::to_string(score);
        break;
      }
      case 4: {
        const std::string& county = counties[i / 8 % counties.size()];
        example.db_id = "california_schools";
        example.question = "What is the average SAT math score in " + county + "?";
        example.gold_sql = "SELECT AVG(AvgScrMath) FROM satscores WHERE cname = '" + county + "'";
        break;
      }
      case 5: {
        const std::string& date = dates[i / 8 % dates.size()];
        example.db_id = "debit_card_specializing";
        example.question = "Show the transaction amounts on " + date + ".";
        example.gold_sql = "SELECT Amount FROM transactions_1k WHERE Date = '" + date + "'";
        break;
      }
      case 6: {
        example.db_id = "debit_card_specializing";
        example.question = "How many customers per currency?";
        example.gold_sql = "SELECT Currency, COUNT(*) FROM customers GROUP BY Currency";
        break;
      }
      default: {
        example.db_id = "debit_card_specializing";
        example.question = "How many transactions were paid in EUR?";
        example.gold_sql =
            "SELECT COUNT(*) FROM transactions_1k INNER JOIN customers ON "
            "transactions_1k.CustomerID = customers.CustomerID WHERE customers.Currency = 'EUR'";
        break;
      }
    }
    corpus.examples.push_back(std::move(example));
  }

  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const GeneratedExample& example = corpus.examples[i];
    nlohmann::ordered_json record;
    record["question_id"] = i;
    record["db_id"] = example.db_id;
    record["question"] = example.question;
    record["evidence"] = example.evidence;
    record["SQL"] = example.gold_sql;
    record["difficulty"] = example.difficulty;
    doc.push_back(std::move(record));
  }
  const fs::path dataset = root / "dev.json";
  std::ofstream out(dataset, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  corpus.dataset_path = dataset.string();
  return corpus;
}

void write_gold_predictions(const std::string& path, const GeneratedCorpus& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const GeneratedExample& example = corpus.examples[i];
    nlohmann::ordered_json record;
    record["example_id"] = i;
    record["db_id"] = example.db_id;
    record["question"] = example.question;
    record["difficulty"] = example.difficulty;
    record["gold_sql"] = example.gold_sql;
    record["final_sql"] = example.gold_sql;
    record["diagnostics"] = nlohmann::ordered_json::array();
    out << record.dump() << "\n";
  }
}

}  // namespace testsupport
