#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ideoscale/csv.hpp"

using namespace ideoscale;

TEST_CASE("format_float rounds half away from zero at fixed decimals") {
    // frozen rule table; the three decimal/five decimal cases mirror the
    // emitted files
    CHECK(csv::format_float(6.3084999, 3) == "6.308");
    CHECK(csv::format_float(2.0, 5) == "2.00000");
    CHECK(csv::format_float(0.0005, 3) == "0.001");
    CHECK(csv::format_float(-0.0005, 3) == "-0.001");
    CHECK(csv::format_float(3.65, 5) == "3.65000");
    CHECK(csv::format_float(1.2345, 3) == "1.234");  // the double sits just below the tie
    CHECK(csv::format_float(1.0015, 3) == "1.002");  // and this one just above
    CHECK(csv::format_float(-1.5, 0) == "-2");
    CHECK(csv::format_float(0.9999, 3) == "1.000");
    CHECK(csv::format_float(-0.0001, 3) == "0.000"); // sign dropped on zero
    CHECK(csv::format_float(10.0, 3) == "10.000");
    CHECK(csv::format_float(123456.789, 3) == "123456.789");
    CHECK(csv::format_float(std::nan(""), 3) == "");
    CHECK(csv::format_float(std::numeric_limits<double>::infinity(), 3) == "");
}

TEST_CASE("csv round trip with quoting") {
    const std::string text = "id,name,score\n1,\"Doe, Jane\",3.5\n2,plain,\n";
    const auto t = csv::read_string(text, "t");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "Doe, Jane");
    CHECK(t.col("score") == 2);
    CHECK(std::isnan(csv::parse_double(t.rows[1][2])));

    const auto line = csv::join_row({"1", "Doe, Jane", "3.5"});
    CHECK(line == "1,\"Doe, Jane\",3.5\n");
}

TEST_CASE("csv parse errors carry line numbers") {
    bool threw = false;
    try {
        csv::read_string("a,b\n1\n", "f.csv");
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("f.csv:2") != std::string::npos);
    }
    CHECK(threw);
    CHECK_THROWS_AS(csv::parse_int("12x", "ctx"), std::runtime_error);
    CHECK_THROWS_AS(csv::parse_double("--3", "ctx"), std::runtime_error);
}

TEST_CASE("parse of written floats is exact at declared precision") {
    for (double v : {0.0, 1.0, -2.5, 6.308, 3.14159, -123.456, 9.9994}) {
        const auto s = csv::format_float(v, 3);
        const double back = csv::parse_double(s);
        CHECK(std::abs(back - v) <= 0.0005000001);
        CHECK(csv::format_float(back, 3) == s);
    }
}
