#include <gtest/gtest.h>

#include <sstream>

#include "cxr_audit/csv.hpp"

using namespace cxr_audit;

TEST(Csv, SplitsPlainAndQuotedFields) {
  EXPECT_EQ(csv::split_record("a,b,,d"), (std::vector<std::string>{"a", "b", "", "d"}));
  EXPECT_EQ(csv::split_record("\"x,y\",\"he said \"\"hi\"\"\",z"),
            (std::vector<std::string>{"x,y", "he said \"hi\"", "z"}));
  EXPECT_EQ(csv::split_record(""), (std::vector<std::string>{""}));
}

TEST(Csv, RejectsBrokenQuoting) {
  EXPECT_FALSE(csv::split_record("\"open,b").has_value());
  EXPECT_FALSE(csv::split_record("\"a\"b,c").has_value());
}

TEST(Csv, JoinRoundTrips) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", ""};
  EXPECT_EQ(csv::split_record(csv::join_record(fields)), fields);
}

TEST(Csv, LineReaderStripsBomAndCarriageReturns) {
  std::istringstream in("\xEF\xBB\xBFh1,h2\r\na,b\r\n");
  csv::line_reader r(in);
  EXPECT_EQ(r.next(), "h1,h2");
  EXPECT_EQ(r.line_number(), 1u);
  EXPECT_EQ(r.next(), "a,b");
  EXPECT_EQ(r.line_number(), 2u);
  EXPECT_FALSE(r.next().has_value());
}

TEST(Csv, NumbersMustConsumeWholeField) {
  EXPECT_EQ(csv::parse_double("12.5"), 12.5);
  EXPECT_EQ(csv::parse_double("+3"), 3.0);
  EXPECT_FALSE(csv::parse_double("12.5x").has_value());
  EXPECT_FALSE(csv::parse_double("").has_value());
  EXPECT_EQ(csv::parse_int("14"), 14);
  EXPECT_FALSE(csv::parse_int("14.0").has_value());
  EXPECT_TRUE(csv::is_missing_number(""));
  EXPECT_TRUE(csv::is_missing_number("nan"));
  EXPECT_FALSE(csv::is_missing_number("0"));
}
