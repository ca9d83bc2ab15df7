#include <doctest.h>

#include "norq/csv.hpp"
#include "norq/dates.hpp"

#include <filesystem>
#include <fstream>

using namespace norq;
namespace fs = std::filesystem;

TEST_CASE("csv writer quotes only when needed and reader round-trips") {
    const fs::path dir = fs::temp_directory_path() / "norq_csv_test";
    fs::create_directories(dir);
    const std::string path = (dir / "t.csv").string();
    {
        CsvWriter out(path);
        out.row({"a", "b", "c"});
        out.row({"plain", "has,comma", "has \"quote\""});
        out.row({"", "multi\nline", "x"});
    }
    const CsvTable t = read_csv(path);
    REQUIRE(t.header.size() == 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "plain");
    CHECK(t.rows[0][1] == "has,comma");
    CHECK(t.rows[0][2] == "has \"quote\"");
    CHECK(t.rows[1][1] == "multi\nline");
    fs::remove_all(dir);
}

TEST_CASE("csv errors are typed") {
    CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), BadInputFile);
    CHECK_THROWS_AS(parse_double("abc"), BadInputFile);
    CHECK_THROWS_AS(parse_long("1.5"), BadInputFile);
    CHECK(parse_double("-1.25e3") == doctest::Approx(-1250.0));
    CHECK_FALSE(parse_double_opt("").has_value());
    CHECK_FALSE(parse_double_opt("NA").has_value());
    CHECK(parse_double_opt("2.5").value() == doctest::Approx(2.5));
}

TEST_CASE("column lookup validates names") {
    CsvTable t;
    t.header = {"x", "y"};
    CHECK(t.col("y") == 1);
    CHECK_THROWS_AS(t.col("z"), BadInputFile);
    CHECK_FALSE(t.find_col("z").has_value());
}

TEST_CASE("dates: parse, format, arithmetic, weekdays") {
    const Date d = Date::parse("2020-07-15");
    CHECK(d.str() == "2020-07-15");
    CHECK(d.year() == 2020);
    CHECK(d.month() == 7);
    CHECK(Date(2020, 7, 29) - d == 14);
    CHECK(d.plus_days(31).str() == "2020-08-15");
    CHECK(Date(1970, 1, 1).weekday() == 4);  // a Thursday
    CHECK(Date(2024, 6, 15).weekday() == 6); // a Saturday
    CHECK_FALSE(Date(2024, 6, 15).is_weekday());
    CHECK(Date(2024, 6, 17).is_weekday());
    CHECK_THROWS_AS(Date::parse("2020/07/15"), Error);
    CHECK_THROWS_AS(Date::parse("2020-13-01"), Error);
}

TEST_CASE("quarters: parse, order, boundaries") {
    const Quarter q = Quarter::parse("2020Q3");
    CHECK(q.str() == "2020Q3");
    CHECK(Quarter::parse("2020q3") == q);
    CHECK(q.prev().str() == "2020Q2");
    CHECK(Quarter(2020, 1).prev().str() == "2019Q4");
    CHECK(q.next().str() == "2020Q4");
    CHECK(Quarter(2020, 4).next().str() == "2021Q1");
    CHECK(q.end_date().str() == "2020-09-30");
    CHECK(Quarter(2020, 1).end_date().str() == "2020-03-31");
    CHECK(Quarter(2019, 4) < Quarter(2020, 1));
    CHECK_THROWS_AS(Quarter::parse("2020Q5"), Error);
    CHECK_THROWS_AS(Quarter::parse("20Q"), Error);
}
