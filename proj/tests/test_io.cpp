#include <doctest.h>

#include <sstream>

#include "momlab/io.hpp"

using namespace momlab;

TEST_CASE("csv quoting round trip") {
  CsvWriter w({"name", "value"});
  w.row({"plain", "1"});
  w.row({"with,comma", "say \"hi\""});
  w.row({"two\r\nlines", ""});
  auto rows = parse_csv(w.str());
  REQUIRE(rows.size() == 4);
  CHECK(rows[2][0] == "with,comma");
  CHECK(rows[2][1] == "say \"hi\"");
  CHECK(rows[3][0] == "two\r\nlines");
  CHECK(rows[3][1] == "");
  CHECK(w.str().substr(0, 12) == "name,value\r\n");
  CHECK_THROWS_AS(w.row({"one"}), ValidationError);
  CHECK_THROWS_AS(parse_csv("\"open"), ValidationError);
}

TEST_CASE("numbers keep full precision") {
  double x = 0.1 + 0.2;
  CHECK(std::stod(csv_number(x)) == x);
  CHECK(csv_number(std::nan("")) == "nan");
}

TEST_CASE("config grammar") {
  std::istringstream in(
      "# comment\n"
      "q = 7\n"
      "eta = selfconv:sech   # trailing\n"
      "[model]\n"
      "label = \"a \\\"quoted\\\" # value\"\n"
      "samples=500\n");
  Config c = Config::parse(in, "cfg");
  CHECK(c.get("q", "") == "7");
  CHECK(c.get("eta", "") == "selfconv:sech");
  CHECK(c.get("model.label", "") == "a \"quoted\" # value");
  CHECK(c.get_double("model.samples", 0) == 500);
  CHECK(c.get("missing", "d") == "d");
  CHECK_THROWS_AS(c.get_double("eta", 0), ValidationError);

  std::istringstream bad1("q 7\n"), bad2("[open\n"), bad3("k = \"x\n");
  CHECK_THROWS_AS(Config::parse(bad1, "b"), ValidationError);
  CHECK_THROWS_AS(Config::parse(bad2, "b"), ValidationError);
  CHECK_THROWS_AS(Config::parse(bad3, "b"), ValidationError);
}

TEST_CASE("non-finite numbers become null") {
  CHECK(num(INFINITY).is_null());
  CHECK(num(1.5) == 1.5);
}
