#include "biascorr/acceptance.hpp"
#include "biascorr/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace biascorr;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("formatting") {
    CHECK(std::stod(io::format_double(0.1)) == 0.1);
    CHECK(std::stod(io::format_double(1.0 / 3)) == 1.0 / 3);
    CHECK(io::format_value(Rational(-3, 9)) == "-1/3");
    CHECK(io::meta_path("out/trace.csv") == "out/trace.meta.json");
    CHECK(io::meta_path("run") == "run.meta.json");
}

TEST_CASE("csv and json files") {
    const fs::path dir = fs::temp_directory_path() / "biascorr_io_test";
    fs::remove_all(dir);
    const std::string csv = (dir / "nested" / "a.csv").string();
    io::write_csv(csv, {"n", "v"}, {{"1", "2"}, {"3", "4"}});
    std::ifstream in(csv);
    std::string body((std::istreambuf_iterator<char>(in)), {});
    CHECK(body == "n,v\n1,2\n3,4\n");
    CHECK_THROWS_AS(io::write_csv(csv, {"n", "v"}, {{"1"}}), std::logic_error);

    const std::string js = (dir / "x.json").string();
    io::write_json(js, {{"a", 1}});
    CHECK(io::read_json(js)["a"] == 1);
    CHECK_THROWS(io::read_json((dir / "missing.json").string()));
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS(io::read_json((dir / "bad.json").string()));
    fs::remove_all(dir);
}

TEST_CASE("reference comparison") {
    acceptance::Result r;
    r.id = "item";
    r.measurements = {{"gap", 47.5944}, {"count", 0}, {"m", 2000}};
    nlohmann::json ok = {{"checks", {{"gap", {{"value", 47.5945}, {"abs_tol", 0.01}}},
                                     {"count", {{"equals", 0}}},
                                     {"m", {{"min", 1400}, {"max", 2600}}}}}};
    for (const auto& c : acceptance::compare_to_reference(r, ok)) CHECK(c.pass);
    nlohmann::json tampered = {{"checks", {{"gap", {{"value", 40.0}, {"abs_tol", 0.01}}}}}};
    auto bad = acceptance::compare_to_reference(r, tampered);
    REQUIRE(bad.size() == 1);
    CHECK_FALSE(bad[0].pass);
    CHECK(bad[0].item == "item");
    nlohmann::json missing = {{"checks", {{"other", {{"equals", 1}}}}}};
    CHECK_FALSE(acceptance::compare_to_reference(r, missing)[0].pass);
    CHECK_FALSE(acceptance::compare_to_reference(r, nlohmann::json::array())[0].pass);
}

TEST_CASE("acceptance registry") {
    const auto& all = acceptance::registry();
    CHECK(all.size() == 14);
    CHECK(acceptance::select({}).size() == all.size());
    CHECK(acceptance::select({"bootstrap"}).size() == 4);
    CHECK(acceptance::select({"vandermonde"}).size() == 1);
    CHECK(acceptance::select({"nothing"}).empty());
    for (const auto& c : all) CHECK(c.time_limit > 0);
    auto r = acceptance::run(*acceptance::select({"vandermonde"})[0]);
    CHECK(r.pass);
    CHECK(acceptance::format_line(r).rfind("[PASS] vandermonde", 0) == 0);
}

}
