#include <catch2/catch_amalgamated.hpp>
#include "mixrank/mixrank.hpp"

TEST_CASE("placeholder test_testbed") { REQUIRE(true); }
