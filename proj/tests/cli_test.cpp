#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <string>

#include "json.hpp"
#include "test_util.hpp"

namespace {

const std::string kCli = BAYESLEX_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

int count_lines(const std::string& path) {
  auto content = testutil::read_file(path);
  int n = 0;
  for (char c : content)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("sample, fit, predict, eval round trip") {
  testutil::TempDir dir;
  const auto corpus = dir.file("c.jsonl");
  const auto truth = dir.file("truth.jsonl");
  const auto lex0 = dir.file("w0.txt");
  const auto lex1 = dir.file("w1.txt");
  const auto model = dir.file("m.json");
  const auto preds = dir.file("p.jsonl");
  const auto report = dir.file("r.json");

  REQUIRE(run("sample --out " + corpus + " --truth-out " + truth + " --lexicon0-out " + lex0 +
              " --lexicon1-out " + lex1 +
              " --docs 300 --doc-len 40 --vocab 30 --lex-size 3 --gamma 0.6 --seed 11") == 0);
  CHECK(count_lines(corpus) == 300);
  CHECK(count_lines(truth) == 300);

  REQUIRE(run("fit --corpus " + corpus + " --format precounted --lexicon-pos " + lex0 +
              " --lexicon-neg " + lex1 + " --rule weighted --model-out " + model) == 0);
  CHECK(testutil::read_file(model).find("\"rule\": \"weighted\"") != std::string::npos);

  REQUIRE(run("predict --model " + model + " --corpus " + corpus +
              " --format precounted --out " + preds) == 0);
  CHECK(count_lines(preds) == 300);  // one line per input document

  REQUIRE(run("eval --pred " + preds + " --truth " + truth + " --out " + report) == 0);
  auto j = nlohmann::json::parse(testutil::read_file(report));
  CHECK(j["accuracy"].get<double>() > 0.7);
  CHECK(j["evaluated"].get<int>() == 300);

  CHECK(run("inspect --model " + model) == 0);
}

TEST_CASE("prediction lines parse and carry the schema fields") {
  testutil::TempDir dir;
  const auto corpus = dir.file("c.jsonl");
  const auto lex0 = dir.file("w0.txt");
  const auto lex1 = dir.file("w1.txt");
  const auto model = dir.file("m.json");
  const auto preds = dir.file("p.jsonl");

  testutil::write_file(corpus,
                       "{\"id\":\"a\",\"text\":\"good good bad other\"}\n"
                       "{\"id\":\"b\",\"text\":\"good bad\"}\n");
  testutil::write_file(lex0, "good\n");
  testutil::write_file(lex1, "bad\n");

  REQUIRE(run("fit --corpus " + corpus + " --lexicon-pos " + lex0 + " --lexicon-neg " + lex1 +
              " --rule count --model-out " + model) == 0);
  REQUIRE(run("predict --model " + model + " --corpus " + corpus + " --out " + preds) == 0);

  std::istringstream lines(testutil::read_file(preds));
  std::string line;
  REQUIRE(std::getline(lines, line));
  auto a = nlohmann::json::parse(line);
  CHECK(a["id"] == "a");
  CHECK(a["label"] == 0);
  CHECK(a["margin"].get<double>() == 1.0);
  CHECK(a["tie"] == false);
  REQUIRE(std::getline(lines, line));
  auto b = nlohmann::json::parse(line);
  CHECK(b["tie"] == true);
  CHECK(b["label"] == 0);  // default tie class
}

TEST_CASE("fixed seeds give byte-identical outputs") {
  testutil::TempDir dir;
  const auto c1 = dir.file("c1.jsonl");
  const auto c2 = dir.file("c2.jsonl");
  REQUIRE(run("sample --out " + c1 + " --docs 50 --doc-len 20 --vocab 20 --lex-size 2 --seed 7") == 0);
  REQUIRE(run("sample --out " + c2 + " --docs 50 --doc-len 20 --vocab 20 --lex-size 2 --seed 7") == 0);
  CHECK(testutil::read_file(c1) == testutil::read_file(c2));

  const auto lex0 = dir.file("w0.txt");
  const auto lex1 = dir.file("w1.txt");
  const auto m1 = dir.file("m1.json");
  const auto m2 = dir.file("m2.json");
  REQUIRE(run("sample --out " + c1 + " --lexicon0-out " + lex0 + " --lexicon1-out " + lex1 +
              " --docs 200 --doc-len 30 --vocab 25 --lex-size 3 --gamma 0.5 --seed 3") == 0);
  const std::string fit_args = " --corpus " + c1 + " --format precounted --lexicon-pos " + lex0 +
                               " --lexicon-neg " + lex1 +
                               " --rule mixture --components 5 --seed 7 --model-out ";
  REQUIRE(run("fit" + fit_args + m1) == 0);
  REQUIRE(run("fit" + fit_args + m2) == 0);
  CHECK(testutil::read_file(m1) == testutil::read_file(m2));
}

TEST_CASE("exit codes: usage vs data errors") {
  testutil::TempDir dir;
  CHECK(run("bogus-subcommand") == 1);
  CHECK(run("fit --nonsense") == 1);
  CHECK(run("predict --model " + dir.file("missing.json") + " --corpus " +
            dir.file("missing.jsonl")) == 2);

  const auto empty = dir.file("empty.jsonl");
  testutil::write_file(empty, "");
  const auto lex0 = dir.file("w0.txt");
  const auto lex1 = dir.file("w1.txt");
  testutil::write_file(lex0, "good\n");
  testutil::write_file(lex1, "bad\n");
  CHECK(run("fit --corpus " + empty + " --lexicon-pos " + lex0 + " --lexicon-neg " + lex1 +
            " --rule count --model-out " + dir.file("m.json")) == 2);

  // mixture without a seed is a usage error
  const auto c = dir.file("c.jsonl");
  testutil::write_file(c, "{\"id\":\"a\",\"text\":\"good bad\"}\n");
  CHECK(run("fit --corpus " + c + " --lexicon-pos " + lex0 + " --lexicon-neg " + lex1 +
            " --rule mixture --model-out " + dir.file("m.json")) == 1);
}

TEST_CASE("dp rule fits end to end") {
  testutil::TempDir dir;
  const auto corpus = dir.file("c.jsonl");
  const auto lex0 = dir.file("w0.txt");
  const auto lex1 = dir.file("w1.txt");
  const auto model = dir.file("m.json");
  const auto preds = dir.file("p.jsonl");
  REQUIRE(run("sample --out " + corpus + " --lexicon0-out " + lex0 + " --lexicon1-out " + lex1 +
              " --docs 80 --doc-len 30 --vocab 20 --lex-size 2 --gamma 0.5 --seed 19") == 0);
  REQUIRE(run("fit --corpus " + corpus + " --format precounted --lexicon-pos " + lex0 +
              " --lexicon-neg " + lex1 +
              " --rule dp --truncation 6 --gibbs-iters 20 --seed 4 --model-out " + model) == 0);
  REQUIRE(run("predict --model " + model + " --corpus " + corpus + " --format precounted --out " +
              preds) == 0);
  CHECK(count_lines(preds) == 80);
}
