#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "swarm/io.hpp"

using namespace swarm;

TEST_SUITE("io") {
  TEST_CASE("model round trip, object and array forms") {
    const Json j = parse_json_text(R"({"n": 2, "beta": 1.5, "gamma": 0.5, "delta": 2,
                                       "alpha": {"{}": 3, "{1,2}": 0.25}})");
    const ModelParams p = params_from_json(j);
    CHECK(p.n == 2);
    CHECK(p.alpha == std::vector<double>{3.0, 0.0, 0.0, 0.25});
    const ModelParams q = params_from_json(params_to_json(p));
    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);
    CHECK(q.delta == p.delta);

    const auto x = density_from_json(2, parse_json_text("[0.1, 0.2, 0.3, 0.4]"));
    CHECK(x[3] == 0.4);
    CHECK(population_from_json(1, parse_json_text(R"({"{1}": 7})")) == PopulationState{0, 7});
  }

  TEST_CASE("bad input names the problem") {
    CHECK_THROWS_AS(params_from_json(parse_json_text(R"({"beta": 1})")), ConfigError);
    CHECK_THROWS_WITH_AS(params_from_json(parse_json_text(R"({"n": 2, "alpha": {"{3}": 1}})")),
                         doctest::Contains("{3}"), ConfigError);
    CHECK_THROWS_AS(params_from_json(parse_json_text(R"({"n": 1, "beta": "fast"})")), ConfigError);
    CHECK_THROWS_AS(density_from_json(1, parse_json_text("[1, -1]")), ConfigError);
    CHECK_THROWS_AS(density_from_json(2, parse_json_text("[1, 1]")), ConfigError);
    CHECK_THROWS_WITH_AS(parse_json_text("{\n  \"n\": ,\n}", "cfg.json"), doctest::Contains("cfg.json:2:"),
                         ConfigError);
  }

  TEST_CASE("CSV quoting") {
    CHECK(csv_field("{1}") == "{1}");
    CHECK(csv_field("{1,2}") == "\"{1,2}\"");
    CHECK(csv_field("a\"b") == "\"a\"\"b\"");

    TrajectorySample t;
    t.times = {0.0};
    t.states = {{1, 2, 3, 4}};
    std::ostringstream os;
    write_trajectory_csv(os, 2, t);
    CHECK(os.str() == "t,{},{1},{2},\"{1,2}\"\n0,1,2,3,4\n");
  }

  TEST_CASE("output directory falls back to the environment") {
    const auto dir = std::filesystem::temp_directory_path() / "swarm_io_test_out";
    std::filesystem::remove_all(dir);
    ::setenv("SWARM_OUT_DIR", dir.c_str(), 1);
    CHECK(output_directory() == dir);
    CHECK(std::filesystem::is_directory(dir));
    CHECK(output_directory(std::string((dir / "sub").string())) == dir / "sub");
    ::unsetenv("SWARM_OUT_DIR");
    std::filesystem::remove_all(dir);
  }
}
