#include <catch2/catch_amalgamated.hpp>
#include "noslip/output.hpp"
