#include <doctest.h>
TEST_SUITE("pose") {}
