#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "defectbench/arff.hpp"
#include "test_support.hpp"

using namespace defectbench;

namespace {

const char* kBasic =
    "% a comment\n"
    "@relation cm1\n"
    "\n"
    "@attribute loc numeric\n"
    "@attribute v(g) real\n"
    "@attribute defects {false,true}\n"
    "@data\n"
    "1.1,2,false\n"
    "3,4.5,true\n";

}  // namespace

TEST_CASE("basic arff parse") {
  const Dataset d = parse_arff(kBasic);
  CHECK(d.name == "CM1");
  REQUIRE(d.n_instances() == 2);
  REQUIRE(d.n_features() == 2);
  CHECK(d.feature_names[0] == "loc");
  CHECK(d.feature_names[1] == "v(g)");
  CHECK(d.features(0, 0) == 1.1);
  CHECK(d.features(1, 1) == 4.5);
  CHECK(d.labels[0] == 0);
  CHECK(d.labels[1] == 1);
  CHECK_FALSE(d.has_missing());
}

TEST_CASE("crlf, case-insensitive keywords, quoted names") {
  const std::string text =
      "@RELATION 'my data'\r\n"
      "@ATTRIBUTE 'line count' NUMERIC\r\n"
      "@Attribute defects {false,true}\r\n"
      "@DATA\r\n"
      "7,TRUE\r\n";
  const Dataset d = parse_arff(text);
  CHECK(d.name == "MY_DATA");
  CHECK(d.feature_names[0] == "line count");
  CHECK(d.features(0, 0) == 7.0);
  CHECK(d.labels[0] == 1);  // class matching is case-insensitive
}

TEST_CASE("missing markers become NaN and set has_missing") {
  const std::string text =
      "@relation r\n@attribute a numeric\n@attribute defects {false,true}\n@data\n?,false\n1,true\n";
  const Dataset d = parse_arff(text);
  CHECK(d.has_missing());
  CHECK(std::isnan(d.features(0, 0)));
  CHECK(d.features(1, 0) == 1.0);
}

TEST_CASE("class detection priority: name beats position") {
  // 'defects' sits in the middle; the trailing binary nominal is just data.
  const std::string text =
      "@relation r\n"
      "@attribute a numeric\n"
      "@attribute defects {no,yes}\n"
      "@attribute b numeric\n"
      "@data\n"
      "1,yes,2\n"
      "3,no,4\n";
  const Dataset d = parse_arff(text);
  REQUIRE(d.n_features() == 2);
  CHECK(d.feature_names[0] == "a");
  CHECK(d.feature_names[1] == "b");
  CHECK(d.labels[0] == 1);
  CHECK(d.labels[1] == 0);
  CHECK(d.features(0, 1) == 2.0);
}

TEST_CASE("fallback: last binary nominal is the class") {
  const std::string text =
      "@relation r\n"
      "@attribute a numeric\n"
      "@attribute outcome {clean,y}\n"
      "@data\n"
      "1,y\n"
      "2,clean\n";
  const Dataset d = parse_arff(text);
  CHECK(d.labels[0] == 1);  // 'y' is the defective marker
  CHECK(d.labels[1] == 0);
}

TEST_CASE("problems and label names are recognized") {
  const std::string text =
      "@relation kc1_cl\n@attribute x numeric\n@attribute PROBLEMS {_no_,_yes_}\n@data\n"
      "1,_yes_\n2,_no_\n";
  // neither value is truthy -> ambiguous
  CHECK_THROWS_AS(parse_arff(text), ParseError);

  const std::string ok =
      "@relation kc1_cl\n@attribute x numeric\n@attribute PROBLEMS {no,yes}\n@data\n"
      "1,yes\n2,no\n";
  const Dataset d = parse_arff(ok);
  CHECK(d.labels[0] == 1);
}

TEST_CASE("numeric class column accepts only 0/1") {
  const std::string text =
      "@relation r\n@attribute a numeric\n@attribute defects numeric\n@data\n1,0\n2,1\n";
  const Dataset d = parse_arff(text);
  CHECK(d.labels[0] == 0);
  CHECK(d.labels[1] == 1);

  const std::string bad =
      "@relation r\n@attribute a numeric\n@attribute defects numeric\n@data\n1,2\n";
  try {
    parse_arff(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("row arity errors carry the data line number") {
  const std::string text =
      "@relation r\n@attribute a numeric\n@attribute defects {false,true}\n@data\n1,false\n1,2,false\n";
  try {
    parse_arff(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 6);
    CHECK(std::string(e.what()).find("line 6") != std::string::npos);
  }
}

TEST_CASE("non-numeric feature token is rejected with its line") {
  const std::string text =
      "@relation r\n@attribute a numeric\n@attribute defects {false,true}\n@data\nabc,false\n";
  try {
    parse_arff(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("missing class label is an error, not a missing value") {
  const std::string text =
      "@relation r\n@attribute a numeric\n@attribute defects {false,true}\n@data\n1,?\n";
  CHECK_THROWS_AS(parse_arff(text), ParseError);
}

TEST_CASE("declaration errors") {
  // non-class nominal
  const std::string nominal_feature =
      "@relation r\n@attribute a {x,y,z}\n@attribute defects {false,true}\n@data\nx,false\n";
  try {
    parse_arff(nominal_feature);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  // three-valued class
  const std::string triple =
      "@relation r\n@attribute a numeric\n@attribute defects {a,b,c}\n@data\n1,a\n";
  CHECK_THROWS_AS(parse_arff(triple), ParseError);

  // both class values truthy
  const std::string ambiguous =
      "@relation r\n@attribute a numeric\n@attribute defects {yes,true}\n@data\n1,yes\n";
  CHECK_THROWS_AS(parse_arff(ambiguous), ParseError);

  // unsupported type
  CHECK_THROWS_AS(parse_arff("@relation r\n@attribute a string\n@data\nq\n"), ParseError);

  // no class attribute at all
  CHECK_THROWS_AS(parse_arff("@relation r\n@attribute a numeric\n@data\n1\n"), ParseError);

  // duplicate names
  const std::string dup =
      "@relation r\n@attribute a numeric\n@attribute a numeric\n@attribute defects "
      "{false,true}\n@data\n1,2,false\n";
  CHECK_THROWS_AS(parse_arff(dup), ParseError);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(parse_arff(""), ParseError);                            // no @data
  CHECK_THROWS_AS(parse_arff("@relation r\n@attribute a numeric\n"), ParseError);
  CHECK_THROWS_AS(parse_arff("@relation r\n@data\n1\n"), ParseError);     // @data before attrs
  CHECK_THROWS_AS(
      parse_arff("@relation r\n@attribute a numeric\n@attribute defects {false,true}\n@data\n"),
      ParseError);  // empty data section
  CHECK_THROWS_AS(parse_arff("hello\n"), ParseError);                     // junk before header
}

TEST_CASE("name override wins over the relation name") {
  const Dataset d = parse_arff(kBasic, "pc one");
  CHECK(d.name == "PC_ONE");
}

TEST_CASE("round-trip through the test serializer") {
  const Dataset original = testsupport::blob_dataset(30, 3, 2.0, 99, "rt");
  const Dataset parsed = parse_arff(testsupport::to_arff(original, "rt"), "rt");
  REQUIRE(parsed.n_instances() == original.n_instances());
  REQUIRE(parsed.n_features() == original.n_features());
  CHECK(parsed.labels == original.labels);
  for (std::size_t i = 0; i < original.n_instances(); ++i)
    for (std::size_t j = 0; j < original.n_features(); ++j)
      CHECK(parsed.features(i, j) == original.features(i, j));
}
