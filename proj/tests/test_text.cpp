#include <doctest.h>

#include "pilotwave/errors.hpp"
#include "pilotwave/text.hpp"

using namespace pilotwave;

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(1e-8) == "1e-08");
  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(canonical_number(0.1 + 0.2) == 0.3);
  for (double v : {3.14159265358979, -2.5e-7, 1234567.891011}) {
    CHECK(parse_number(format_number(v)) == canonical_number(v));
  }
}

TEST_CASE("parsing") {
  CHECK(parse_number(" +2.5 ") == 2.5);
  CHECK(parse_integer("42") == 42);
  CHECK_THROWS_AS(parse_number("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_number(""), ParseError);
  CHECK_THROWS_AS(parse_integer("4.2"), ParseError);

  const auto [x, y] = parse_point(" -1.5 , 0.25 ");
  CHECK(x == -1.5);
  CHECK(y == 0.25);
  CHECK(format_point(x, y) == "-1.5,0.25");
  CHECK_THROWS(parse_point("1,2,3"));

  CHECK(split("a, b,,c", ',').size() == 4);
  CHECK(split_ws("  a \t b\nc ").size() == 3);
  CHECK(trim("  x ") == "x");
}

TEST_CASE("key-value documents") {
  const auto doc = KeyValueText::parse("# comment\nname = demo\n\nmodes = 0:0 1:0\n");
  CHECK(doc.entries().size() == 2);
  CHECK(doc.at("name") == "demo");
  CHECK(doc.get_or("missing", "x") == "x");
  CHECK_FALSE(doc.contains("missing"));
  CHECK_THROWS_AS(doc.at("missing"), ParseError);
  CHECK(KeyValueText::parse(doc.render()).entries() == doc.entries());
  CHECK(doc.render("# ") == "# name = demo\n# modes = 0:0 1:0\n");

  CHECK_THROWS_AS(KeyValueText::parse("no separator here\n"), ParseError);
  CHECK_THROWS_AS(KeyValueText::parse("a = 1\na = 2\n"), ParseError);

  auto edited = doc;
  edited.set("name", "other");
  CHECK(edited.at("name") == "other");
  CHECK(edited.entries().size() == 2);
}

TEST_CASE("digest") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("abc").size() == 16);
}
