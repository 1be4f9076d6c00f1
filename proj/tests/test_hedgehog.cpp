#include <catch2/catch_amalgamated.hpp>
#include "qlab/runner.hpp"
TEST_CASE("placeholder test_hedgehog") { CHECK(true); }
