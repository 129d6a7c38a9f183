#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "secord/dataset.hpp"
#include "secord/fit.hpp"

using secord::ColumnHint;
using secord::ColumnRole;
using secord::CsvOptions;
using secord::Dataset;
using secord::DomainKind;

namespace {

bool same_values(const Dataset& a, const Dataset& b) {
    if (a.variable_count() != b.variable_count() || a.row_count != b.row_count) return false;
    for (int v = 0; v < a.variable_count(); ++v) {
        if (a.variables[static_cast<std::size_t>(v)].domain !=
            b.variables[static_cast<std::size_t>(v)].domain)
            return false;
        if (a.variables[static_cast<std::size_t>(v)].values !=
            b.variables[static_cast<std::size_t>(v)].values)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("delimited text parses into typed columns") {
    const auto data = secord::load_csv_text(
        "x,y\n"
        "0,-1.5\n"
        "1,0.3\n"
        "0,2.25\n"
        "1,-0.75\n");
    REQUIRE(data.variable_count() == 2);
    CHECK(data.row_count == 4);
    CHECK(data.variables[0].name == "x");
    CHECK(data.variables[0].domain.kind() == DomainKind::Binary);
    CHECK(data.variables[1].domain.kind() == DomainKind::FullReal);
    CHECK(data.variables[1].values(0, 2) == 2.25);
    CHECK(data.index_of("y") == 1);
    CHECK_THROWS_WITH_AS(data.index_of("z"), doctest::Contains("no variable named 'z'"),
                         std::invalid_argument);

    SUBCASE("comments and alternative delimiters") {
        CsvOptions options;
        options.delimiter = ';';
        const auto alt = secord::load_csv_text(
            "# generated table\n"
            "a;b\n"
            "1;2\n"
            "# midstream note\n"
            "0;4\n",
            options);
        CHECK(alt.row_count == 2);
        // two distinct values make "b" binary: stored canonically, labels kept
        CHECK(alt.variables[1].domain.kind() == DomainKind::Binary);
        REQUIRE(alt.variables[1].domain.binary_labels());
        CHECK(alt.variables[1].domain.binary_labels()->second == 4.0);
        CHECK(alt.variables[1].values(0, 1) == 1.0);
    }

    SUBCASE("headerless files synthesize column names") {
        CsvOptions options;
        options.has_header = false;
        const auto anon = secord::load_csv_text("1,2\n0,3\n", options);
        CHECK(anon.variables[0].name == "c0");
        CHECK(anon.variables[1].name == "c1");
    }
}

TEST_CASE("parse failures name the data row and column") {
    const std::string six_good =
        "x,y\n"
        "0,1\n0,2\n1,3\n0,4\n1,5\n1,6\n";

    SUBCASE("a non-numeric cell") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text(six_good + "1,abc\n"),
                             doctest::Contains("at row 7, column 'y'"), std::invalid_argument);
    }
    SUBCASE("an empty cell") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text(six_good + "1,\n"),
                             doctest::Contains("row 7"), std::invalid_argument);
    }
    SUBCASE("a ragged row") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text("x,y\n1,2\n3\n"),
                             doctest::Contains("row 2"), std::invalid_argument);
    }
    SUBCASE("no data rows") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text("x,y\n"), doctest::Contains("no data rows"),
                             std::invalid_argument);
        CHECK_THROWS_AS(secord::load_csv_text(""), std::invalid_argument);
    }
    SUBCASE("duplicate and empty header names") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text("x,x\n1,2\n"),
                             doctest::Contains("duplicate column name 'x'"),
                             std::invalid_argument);
        CHECK_THROWS_WITH_AS(secord::load_csv_text("x,,y\n1,2,3\n"),
                             doctest::Contains("empty column name"), std::invalid_argument);
    }
    SUBCASE("the reported origin is the file identity") {
        CHECK_THROWS_WITH_AS(secord::load_csv_text("x\nbad\n", {}, "input.csv"),
                             doctest::Contains("input.csv"), std::invalid_argument);
    }
}

TEST_CASE("column hints rebuild domains deterministically") {
    SUBCASE("equal-width binning of a continuum column") {
        std::string text = "y\n";
        for (int i = 0; i < 300; ++i) text += std::to_string(-2.0 + 0.017 * i) + "\n";
        const auto raw = secord::load_csv_text(text);

        std::map<std::string, ColumnHint> hints;
        hints["y"].bins = 100;
        const auto prepared = secord::prepare(raw, hints);
        const auto& y = prepared.variables[0];
        CHECK(y.domain.kind() == DomainKind::FiniteSet);
        CHECK(y.domain.points().cols() == 100);

        const auto again = secord::prepare(prepared, hints);
        CHECK(same_values(prepared, again));
    }

    SUBCASE("binary role remembers the source labels") {
        const auto raw = secord::load_csv_text("flag\n2\n5\n5\n2\n");
        std::map<std::string, ColumnHint> hints;
        hints["flag"].role = ColumnRole::Binary;
        const auto prepared = secord::prepare(raw, hints);
        const auto& flag = prepared.variables[0];
        CHECK(flag.domain.kind() == DomainKind::Binary);
        REQUIRE(flag.domain.binary_labels().has_value());
        CHECK(flag.domain.binary_labels()->first == 2.0);
        CHECK(flag.domain.binary_labels()->second == 5.0);
        CHECK(flag.values(0, 0) == 0.0);
        CHECK(flag.values(0, 1) == 1.0);
    }

    SUBCASE("a finite-kind column ignores a bin request") {
        const auto raw = secord::load_csv_text("x\n0\n1\n1\n0\n");
        std::map<std::string, ColumnHint> hints;
        hints["x"].bins = 100;
        const auto prepared = secord::prepare(raw, hints);
        CHECK(prepared.variables[0].domain.kind() == DomainKind::Binary);
        CHECK(same_values(prepared, secord::prepare(prepared, hints)));
    }

    SUBCASE("a hint naming an absent column is an error") {
        const auto raw = secord::load_csv_text("x\n0\n1\n");
        std::map<std::string, ColumnHint> hints;
        hints["missing"].bins = 4;
        CHECK_THROWS_WITH_AS(secord::prepare(raw, hints),
                             doctest::Contains("no variable named 'missing'"),
                             std::invalid_argument);
    }
}

TEST_CASE("periodic columns fold onto the unit circle") {
    SUBCASE("an angle column with a calendar period") {
        const auto raw = secord::load_csv_text(
            "day,temp\n"
            "0,-3.5\n"
            "91.25,4.0\n"
            "182.5,19.5\n"
            "273.75,8.0\n");
        std::map<std::string, ColumnHint> hints;
        hints["day"].role = ColumnRole::CircleAngle;
        hints["day"].period = 365.0;
        const auto prepared = secord::prepare(raw, hints);

        REQUIRE(prepared.variable_count() == 2);
        const auto& day = prepared.variable("day");
        CHECK(day.domain.kind() == DomainKind::Circle);
        CHECK(day.domain.dimension() == 2);
        REQUIRE(day.values.rows() == 2);
        // day 91.25 is a quarter of the year: angle pi/2
        CHECK(std::abs(day.values(0, 1) - 0.0) < 1e-12);
        CHECK(std::abs(day.values(1, 1) - 1.0) < 1e-12);
        // day 0 is angle 0
        CHECK(std::abs(day.values(0, 0) - 1.0) < 1e-12);

        SUBCASE("re-preparing with the same hints is a no-op") {
            CHECK(same_values(prepared, secord::prepare(prepared, hints)));
        }

        SUBCASE("the folded column feeds the fitting layer") {
            const auto ctx = secord::make_fit_context(prepared);
            REQUIRE(ctx.variable_count() == 2);
            CHECK(ctx.row_count == 4);
            CHECK(ctx.values[0].rows() == 2);
            for (long r = 0; r < 4; ++r) {
                CHECK(std::abs(ctx.values[0].col(r).norm() - 1.0) < 1e-12);
            }
        }

        SUBCASE("a non-positive period is rejected with the column name") {
            std::map<std::string, ColumnHint> bad;
            bad["day"].role = ColumnRole::CircleAngle;
            bad["day"].period = 0.0;
            CHECK_THROWS_WITH_AS(secord::prepare(raw, bad),
                                 doctest::Contains("column 'day': circle period"),
                                 std::invalid_argument);
        }
    }

    SUBCASE("a (cos, sin) pair is folded and the companion consumed") {
        const auto raw = secord::load_csv_text(
            "c,s,y\n"
            "2,0.1,1.0\n"
            "0,-0.5,2.0\n"
            "-1.5,0.2,3.0\n");
        std::map<std::string, ColumnHint> hints;
        hints["c"].role = ColumnRole::CirclePair;
        hints["c"].pair_column = "s";
        const auto prepared = secord::prepare(raw, hints);

        REQUIRE(prepared.variable_count() == 2);  // "s" was consumed
        const auto& c = prepared.variable("c");
        CHECK(c.domain.kind() == DomainKind::Circle);
        REQUIRE(c.values.rows() == 2);
        for (long r = 0; r < 3; ++r) {
            CHECK(std::abs(c.values.col(r).norm() - 1.0) < 1e-12);
        }
        CHECK(c.values(0, 1) == 0.0);   // (0, -0.5) normalized
        CHECK(c.values(1, 1) == -1.0);
        CHECK(c.values(0, 2) < 0.0);    // (-1.5, 0.2) keeps its quadrant
        CHECK(c.values(1, 2) > 0.0);

        CHECK(same_values(prepared, secord::prepare(prepared, hints)));
    }

    SUBCASE("a vanishing pair magnitude names the row") {
        const auto raw = secord::load_csv_text("c,s\n1,0.5\n0,0\n-0.7,0.3\n");
        std::map<std::string, ColumnHint> hints;
        hints["c"].role = ColumnRole::CirclePair;
        hints["c"].pair_column = "s";
        CHECK_THROWS_WITH_AS(
            secord::prepare(raw, hints),
            doctest::Contains("column 'c': (cos, sin) pair at row 2 has vanishing magnitude"),
            std::invalid_argument);
    }

    SUBCASE("a pair hint without a companion column is rejected") {
        const auto raw = secord::load_csv_text("c,s\n1,0\n0,1\n");
        std::map<std::string, ColumnHint> hints;
        hints["c"].role = ColumnRole::CirclePair;
        CHECK_THROWS_WITH_AS(secord::prepare(raw, hints), doctest::Contains("pair_column"),
                             std::invalid_argument);
        hints["c"].pair_column = "c";
        CHECK_THROWS_WITH_AS(secord::prepare(raw, hints),
                             doctest::Contains("cannot pair a column with itself"),
                             std::invalid_argument);
    }
}

TEST_CASE("saving and reloading preserves every bit") {
    Dataset data;
    data.row_count = 4;
    secord::DatasetVariable x;
    x.name = "x";
    x.domain = secord::ValueDomain::binary();
    x.values.resize(1, 4);
    x.values << 0.0, 1.0, 1.0, 0.0;
    secord::DatasetVariable y;
    y.name = "y";
    y.domain = secord::ValueDomain::full_real(std::make_pair(-1.0, 2.0));
    y.values.resize(1, 4);
    y.values << 0.1, 1.0 / 3.0, -0.7000000000000001, 1.2345678901234567e-8;
    data.variables = {x, y};

    const std::string path = "secord_roundtrip_tmp.csv";
    secord::save_csv(data, path);
    const auto loaded = secord::load_csv(path);
    std::remove(path.c_str());

    REQUIRE(loaded.variable_count() == 2);
    REQUIRE(loaded.row_count == 4);
    for (int v = 0; v < 2; ++v) {
        for (long r = 0; r < 4; ++r) {
            CHECK(loaded.variables[static_cast<std::size_t>(v)].values(0, r) ==
                  data.variables[static_cast<std::size_t>(v)].values(0, r));
        }
    }

    SUBCASE("missing files are reported by path") {
        CHECK_THROWS_WITH_AS(secord::load_csv("no_such_file_here.csv"),
                             doctest::Contains("no_such_file_here.csv"), std::runtime_error);
    }
}

TEST_CASE("the dataset summary is machine readable") {
    const auto data = secord::load_csv_text("x,y\n0,1.5\n1,-0.5\n1,0.25\n");
    const auto parsed = nlohmann::json::parse(secord::dataset_summary_json(data));
    CHECK(parsed["rows"] == 3);
    REQUIRE(parsed["variables"].size() == 2);
    CHECK(parsed["variables"][0]["name"] == "x");
    CHECK(parsed["variables"][0]["kind"] == "binary");
    CHECK(parsed["variables"][0]["support_size"] == 2);
    CHECK(parsed["variables"][1]["kind"] == "full-real");
    CHECK(std::abs(parsed["variables"][1]["mean"].get<double>() - (1.5 - 0.5 + 0.25) / 3.0) <
          1e-12);
}

TEST_CASE("a parsed table bridges into the shared fit context") {
    std::string text = "x,y\n";
    for (int i = 0; i < 50; ++i) {
        text += std::to_string(i % 2) + "," + std::to_string(0.1 * i - 2.0) + "\n";
    }
    const auto data = secord::load_csv_text(text);
    const auto ctx = secord::make_fit_context(data);

    REQUIRE(ctx.variable_count() == 2);
    CHECK(ctx.row_count == 50);
    CHECK(ctx.names[0] == "x");
    CHECK(ctx.domains[0].kind() == DomainKind::Binary);
    for (long r = 0; r < ctx.row_count; ++r) {
        const int node = ctx.node_index[1][static_cast<std::size_t>(r)];
        REQUIRE(node >= 0);
        REQUIRE(node < ctx.grids[1].count());
        CHECK(ctx.values[1](0, r) == ctx.grids[1].nodes(0, node));
    }
}
