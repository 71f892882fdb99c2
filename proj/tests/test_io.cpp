#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poiforge/csvio.hpp"
#include "poiforge/geojson.hpp"
#include "poiforge/types.hpp"

using namespace poiforge;

namespace {

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << body;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

AddressRecord rec(const std::string& id, double lat, double lng,
                  const std::string& text) {
    AddressRecord r;
    r.address_id = id;
    r.lat = lat;
    r.lng = lng;
    r.raw_text = text;
    return r;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_addresses reads the strict four column format") {
    TempFile tmp("io_addr_basic.csv");
    write_file(tmp.path,
               "address_id,lat,lng,text\n"
               "a1,12.970000000,77.590000000,flat 2 marvel homes\n"
               "\n"
               "a2,12.980000000,77.600000000,ram mandir road\n");
    std::vector<AddressRecord> recs = load_addresses(tmp.path);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].address_id == "a1");
    CHECK(recs[0].lat == Catch::Approx(12.97).epsilon(1e-12));
    CHECK(recs[0].lng == Catch::Approx(77.59).epsilon(1e-12));
    CHECK(recs[0].raw_text == "flat 2 marvel homes");
    CHECK(recs[1].address_id == "a2");
}

TEST_CASE("load_addresses handles quoting per RFC 4180") {
    TempFile tmp("io_addr_quoted.csv");
    write_file(tmp.path,
               "address_id,lat,lng,text\n"
               "a1,12.97,77.59,\"flat 2, \"\"sea view\"\" block\"\n"
               "a2,12.98,77.60,\"line one\nline two\"\n");
    std::vector<AddressRecord> recs = load_addresses(tmp.path);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].raw_text == "flat 2, \"sea view\" block");
    CHECK(recs[1].raw_text == "line one\nline two");
}

TEST_CASE("load_addresses tolerates CRLF line endings") {
    TempFile tmp("io_addr_crlf.csv");
    write_file(tmp.path,
               "address_id,lat,lng,text\r\n"
               "a1,12.97,77.59,marvel homes\r\n");
    std::vector<AddressRecord> recs = load_addresses(tmp.path);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].raw_text == "marvel homes");
}

TEST_CASE("load_addresses rejects malformed input with line numbers") {
    SECTION("missing file") {
        CHECK_THROWS_WITH(load_addresses("io_no_such_file.csv"),
                          Catch::Matchers::ContainsSubstring("cannot open"));
    }
    SECTION("wrong header") {
        TempFile tmp("io_addr_header.csv");
        write_file(tmp.path, "id,lat,lng,text\na1,12.97,77.59,x\n");
        CHECK_THROWS_WITH(
            load_addresses(tmp.path),
            Catch::Matchers::ContainsSubstring(
                "header address_id,lat,lng,text"));
    }
    SECTION("short row") {
        TempFile tmp("io_addr_short.csv");
        write_file(tmp.path, "address_id,lat,lng,text\na1,12.97,77.59\n");
        CHECK_THROWS_WITH(load_addresses(tmp.path),
                          Catch::Matchers::ContainsSubstring(
                              "expected 4 fields at line 2"));
    }
    SECTION("duplicate id") {
        TempFile tmp("io_addr_dup.csv");
        write_file(tmp.path,
                   "address_id,lat,lng,text\n"
                   "a1,12.97,77.59,x\n"
                   "a1,12.98,77.60,y\n");
        CHECK_THROWS_WITH(load_addresses(tmp.path),
                          Catch::Matchers::ContainsSubstring(
                              "duplicate address_id 'a1' at line 3"));
    }
    SECTION("unparseable latitude") {
        TempFile tmp("io_addr_badlat.csv");
        write_file(tmp.path, "address_id,lat,lng,text\na1,north,77.59,x\n");
        CHECK_THROWS_WITH(
            load_addresses(tmp.path),
            Catch::Matchers::ContainsSubstring("bad lat at line 2"));
    }
    SECTION("out of range coordinate") {
        TempFile tmp("io_addr_range.csv");
        write_file(tmp.path, "address_id,lat,lng,text\na1,95.0,77.59,x\n");
        CHECK_THROWS_WITH(load_addresses(tmp.path),
                          Catch::Matchers::ContainsSubstring(
                              "invalid coordinate at line 2"));
    }
    SECTION("empty id") {
        TempFile tmp("io_addr_empty_id.csv");
        write_file(tmp.path, "address_id,lat,lng,text\n,12.97,77.59,x\n");
        CHECK_THROWS_WITH(load_addresses(tmp.path),
                          Catch::Matchers::ContainsSubstring(
                              "empty address_id at line 2"));
    }
    SECTION("unterminated quote") {
        TempFile tmp("io_addr_quote.csv");
        write_file(tmp.path, "address_id,lat,lng,text\na1,12.97,77.59,\"oops\n");
        CHECK_THROWS_WITH(load_addresses(tmp.path),
                          Catch::Matchers::ContainsSubstring(
                              "unterminated quoted field"));
    }
}

TEST_CASE("save_addresses round trips awkward texts") {
    TempFile tmp("io_addr_roundtrip.csv");
    std::vector<AddressRecord> original = {
        rec("a1", 12.9716, 77.5946, "flat 2, \"sea view\" block"),
        rec("a2", -33.8688, 151.2093, "line one\nline two"),
        rec("a,3", 0.0, 0.0, "plain text"),
    };
    save_addresses(original, tmp.path);
    std::vector<AddressRecord> loaded = load_addresses(tmp.path);
    REQUIRE(loaded.size() == original.size());
    for (size_t i = 0; i < original.size(); ++i) {
        CHECK(loaded[i].address_id == original[i].address_id);
        CHECK(loaded[i].lat == Catch::Approx(original[i].lat).margin(1e-9));
        CHECK(loaded[i].lng == Catch::Approx(original[i].lng).margin(1e-9));
        CHECK(loaded[i].raw_text == original[i].raw_text);
    }

    std::string body = slurp(tmp.path);
    CHECK(body.rfind("address_id,lat,lng,text\n", 0) == 0);
    CHECK(body.find("12.971600000") != std::string::npos);
}

TEST_CASE("processed files carry both preprocessing columns") {
    TempFile tmp("io_processed_roundtrip.csv");
    AddressRecord a = rec("a1", 12.97, 77.59, "Flat-2 MARVEL Homes");
    a.clean_text = "flat 2 marvel homes";
    a.mined_text = "marvel homes";
    AddressRecord b = rec("a2", 12.98, 77.60, "x, y");
    b.clean_text = "x y";
    b.mined_text = "";
    save_processed({a, b}, tmp.path);

    std::vector<AddressRecord> loaded = load_processed(tmp.path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].raw_text == "Flat-2 MARVEL Homes");
    CHECK(loaded[0].clean_text == "flat 2 marvel homes");
    CHECK(loaded[0].mined_text == "marvel homes");
    CHECK(loaded[1].clean_text == "x y");
    CHECK(loaded[1].mined_text.empty());

    SECTION("reader insists on the six column header") {
        TempFile bad("io_processed_bad.csv");
        write_file(bad.path, "address_id,lat,lng,text\na1,12.97,77.59,x\n");
        CHECK_THROWS_WITH(load_processed(bad.path),
                          Catch::Matchers::ContainsSubstring("clean_text"));
    }
}

TEST_CASE("polygons_to_geojson emits a canonical byte layout") {
    PoiPolygon p;
    p.poi_id = "p1";
    p.names = {"alpha", "beta"};
    p.member_count = 12;
    p.stage = PolygonStage::raw_hull;
    p.ring = {{12.97, 77.59},
              {12.97, 77.60},
              {12.98, 77.60},
              {12.98, 77.59},
              {12.97, 77.59}};

    std::string expected =
        "{\"type\":\"FeatureCollection\",\"features\":[\n"
        "{\"type\":\"Feature\",\"properties\":{\"poi_id\":\"p1\","
        "\"names\":[\"alpha\",\"beta\"],\"member_count\":12,"
        "\"stage\":\"raw_hull\"},\"geometry\":{\"type\":\"Polygon\","
        "\"coordinates\":[[[77.590000000,12.970000000],"
        "[77.600000000,12.970000000],[77.600000000,12.980000000],"
        "[77.590000000,12.980000000],[77.590000000,12.970000000]]]}}\n"
        "]}\n";
    CHECK(polygons_to_geojson({p}) == expected);

    CHECK(polygons_to_geojson({}) ==
          "{\"type\":\"FeatureCollection\",\"features\":[]}\n");
}

TEST_CASE("geojson round trip is byte identical") {
    TempFile tmp("io_poly_roundtrip.geojson");
    PoiPolygon p;
    p.poi_id = "merged_3";
    p.names = {"godrej genesis"};
    p.member_count = 41;
    p.stage = PolygonStage::merged;
    p.ring = {{12.9701, 77.5903},
              {12.9701, 77.5911},
              {12.9709, 77.5911},
              {12.9709, 77.5903},
              {12.9701, 77.5903}};
    PoiPolygon q;
    q.poi_id = "gt_0";
    q.names = {};
    q.member_count = 0;
    q.stage = PolygonStage::ground_truth;
    q.ring = {{12.98, 77.60}, {12.98, 77.61}, {12.99, 77.60}, {12.98, 77.60}};

    emit_geojson({p, q}, tmp.path);
    std::string first = slurp(tmp.path);

    std::vector<PoiPolygon> loaded = load_polygons(tmp.path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].poi_id == "merged_3");
    CHECK(loaded[0].names == std::vector<std::string>{"godrej genesis"});
    CHECK(loaded[0].member_count == 41);
    CHECK(loaded[0].stage == PolygonStage::merged);
    CHECK(loaded[0].ring.size() == 5);
    CHECK(loaded[0].ring[0].lat == Catch::Approx(12.9701).margin(1e-9));
    CHECK(loaded[0].ring[0].lng == Catch::Approx(77.5903).margin(1e-9));
    CHECK(loaded[1].stage == PolygonStage::ground_truth);

    CHECK(polygons_to_geojson(loaded) == first);
}

TEST_CASE("load_polygons copes with foreign geojson") {
    SECTION("open rings are closed on load") {
        TempFile tmp("io_poly_open.geojson");
        write_file(tmp.path,
                   "{\"type\":\"FeatureCollection\",\"features\":["
                   "{\"type\":\"Feature\",\"properties\":{},"
                   "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":"
                   "[[[77.59,12.97],[77.60,12.97],[77.60,12.98]]]}}]}\n");
        std::vector<PoiPolygon> loaded = load_polygons(tmp.path);
        REQUIRE(loaded.size() == 1);
        REQUIRE(loaded[0].ring.size() == 4);
        CHECK(loaded[0].ring.front() == loaded[0].ring.back());
        CHECK(loaded[0].poi_id == "poly_0");
        CHECK(loaded[0].member_count == 0);
    }
    SECTION("non polygon features are skipped") {
        TempFile tmp("io_poly_mixed.geojson");
        write_file(
            tmp.path,
            "{\"type\":\"FeatureCollection\",\"features\":["
            "{\"type\":\"Feature\",\"properties\":{},"
            "\"geometry\":{\"type\":\"Point\",\"coordinates\":[77.59,12.97]}},"
            "{\"type\":\"Feature\",\"properties\":{},"
            "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":"
            "[[[77.59,12.97],[77.60,12.97],[77.60,12.98],[77.59,12.97]]]}}]}\n");
        std::vector<PoiPolygon> loaded = load_polygons(tmp.path);
        REQUIRE(loaded.size() == 1);
        CHECK(loaded[0].poi_id == "poly_1");
    }
    SECTION("rejects other documents") {
        TempFile tmp("io_poly_bad.geojson");
        write_file(tmp.path, "{\"type\":\"Telemetry\"}\n");
        CHECK_THROWS_WITH(
            load_polygons(tmp.path),
            Catch::Matchers::ContainsSubstring("not a FeatureCollection"));

        write_file(tmp.path, "not json at all");
        CHECK_THROWS_WITH(
            load_polygons(tmp.path),
            Catch::Matchers::ContainsSubstring("malformed geojson"));

        CHECK_THROWS_WITH(load_polygons("io_poly_missing.geojson"),
                          Catch::Matchers::ContainsSubstring("cannot open"));
    }
}
