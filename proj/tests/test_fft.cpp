#include <catch2/catch_amalgamated.hpp>
#include "specprint/specprint.hpp"
TEST_CASE("placeholder test_fft") { CHECK(true); }
