#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nuqd/grid.hpp"

TEST_CASE("grid smoke") {
    nuqd::Grid g(8, 1.0, 0.0);
    CHECK(g.position(7) == 7.0);
}
