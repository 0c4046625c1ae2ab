#include <doctest.h>

#include <sstream>

#include "barddt/config.hpp"
#include "barddt/error.hpp"
#include "barddt/manifest.hpp"

using namespace barddt;

namespace {

ConfigFile parse(const std::string& text) {
    std::istringstream in(text);
    return ConfigFile::parse(in, "test.ini");
}

}  // namespace

TEST_CASE("config grammar") {
    const auto f = parse("# header\n[sampler]\nnum_trees = 50  # inline\n\n[run]\nseed=9\n");
    CHECK(f.get_int("sampler.num_trees") == 50);
    CHECK(f.get_uint64("run.seed") == 9);
    CHECK(f.entries().at("run.seed").line == 6);

    CHECK_THROWS_WITH_AS(parse("[run]\nseed = 1\nseed = 2\n"), doctest::Contains("test.ini:3"), UsageError);
    CHECK_THROWS_WITH_AS(parse("seed = 1\n"), doctest::Contains("before any [section]"), UsageError);
    CHECK_THROWS_WITH_AS(parse("[run\n"), doctest::Contains("test.ini:1"), UsageError);
    CHECK_THROWS_WITH_AS(parse("[run]\njust text\n"), doctest::Contains("test.ini:2"), UsageError);
    const auto bad = parse("[sampler]\n\nnum_trees = many\n");
    CHECK_THROWS_WITH_AS(bad.get_int("sampler.num_trees"), doctest::Contains("test.ini:3: key 'sampler.num_trees'"),
                         UsageError);
    CHECK(parse("[b]\nm = a, b ,c\n").get_list("b.m") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("run config") {
    SUBCASE("defaults") {
        const auto c = run_config_from(parse(""));
        CHECK(c.model.sampler.num_trees == 50);
        CHECK(c.model.barddt_leaf_scale == doctest::Approx(0.033));
        CHECK(c.delta == 0.1);
    }
    SUBCASE("unknown key names its location") {
        CHECK_THROWS_WITH_AS(run_config_from(parse("[sampler]\nnum_tress = 3\n")),
                             doctest::Contains("test.ini:2: key 'sampler.num_tress': unknown key"), UsageError);
    }
    SUBCASE("range errors") {
        CHECK_THROWS_AS(run_config_from(parse("[sampler]\nnum_trees = 0\n")), UsageError);
        CHECK_THROWS_AS(run_config_from(parse("[dgp]\nrho = 1.5\n")), UsageError);
        CHECK_THROWS_AS(run_config_from(parse("[benchmark]\nmethods = barddt, forest\n")), UsageError);
        CHECK_THROWS_AS(run_config_from(parse("[dgp]\npreset = hard9\n")), UsageError);
    }
    SUBCASE("preset then explicit keys") {
        const auto c = run_config_from(parse("[dgp]\npreset = hard2\nn = 123\nk4 = 0.7\n"));
        CHECK(c.dgp.k1 == 5.0);
        CHECK(c.dgp.k5 == 1.0);
        CHECK(c.dgp.n == 123);
        CHECK(c.dgp.k4 == 0.7);
    }
    SUBCASE("manifest section is ignored") {
        CHECK_NOTHROW(run_config_from(parse("[manifest]\nanything = goes\n")));
    }
    SUBCASE("render round trip") {
        auto c = run_config_from(parse("[run]\nseed = 42\n[sampler]\nalpha = 0.9\nsigma_lambda = 0.123456789012345\n"
                                       "[benchmark]\ndgps = easy1, hard3\nn = 500\n[window]\ndelta = 0.3\n"));
        const auto text = render_config(c);
        const auto again = run_config_from(parse(text));
        CHECK(render_config(again) == text);
        CHECK(again.model.sampler.sigma_lambda == c.model.sampler.sigma_lambda);
        CHECK(again.benchmark.n == c.benchmark.n);
        CHECK(again.dgp.seed == c.dgp.seed);
    }
}

TEST_CASE("benchmark config from run config") {
    auto c = run_config_from(parse("[benchmark]\ndgps = easy1, hard1, custom\nn = 800\n[dgp]\nk2 = 0.4\n"));
    const auto b = benchmark_config(c);
    REQUIRE(b.dgps.size() == 3);
    CHECK(b.dgps[0].name == "easy1");
    CHECK(b.dgps[1].config.k1 == 5.0);
    CHECK(b.dgps[2].config.k2 == 0.4);
    for (const auto& d : b.dgps) CHECK(d.config.n == 800);
}

TEST_CASE("manifest digests and keys") {
    CHECK(sha256_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_text("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(manifest_key("Draws.CSV") == "draws_csv");
}
