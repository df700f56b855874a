#include "doctest.h"
#include "scalefit/catalog.hpp"
#include "scalefit/error.hpp"

using namespace scalefit;

TEST_SUITE("catalog") {

TEST_CASE("per-image views agree with the per-token compute laws except 8x8") {
  struct Row {
    const char* name;
    double irreducible;
  };
  for (const Row row : {Row{"image-16x16", 2027.52}, Row{"image-32x32", 6789.12}, Row{"image-vq16", 1047.04},
                        Row{"image-vq32", 3246.08}}) {
    CAPTURE(row.name);
    const auto check = catalog::cross_check_per_example(catalog::find(row.name));
    CHECK(check.derived.irreducible == doctest::Approx(row.irreducible).epsilon(1e-12));
    CHECK_FALSE(check.discrepancy());
  }
  const auto c8 = catalog::cross_check_per_example(catalog::find("image-8x8"));
  CHECK(c8.irreducible.consistent);
  CHECK_FALSE(c8.scale.consistent);
  CHECK(c8.discrepancy());
  CHECK(c8.scale.derived == doctest::Approx(1.873e4).epsilon(1e-3));
}

TEST_CASE("catalog laws are valid and lookups fail loudly") {
  for (const auto& d : catalog::domains()) {
    CAPTURE(d.name);
    if (d.compute) CHECK_NOTHROW(d.compute->validate());
    if (d.model_size) CHECK_NOTHROW(d.model_size->validate());
  }
  CHECK(catalog::find("language").nopt.has_value());
  CHECK_THROWS_AS(catalog::find("audio"), Error);
}

TEST_CASE("domains without a printed per-image summary cannot be cross-checked") {
  CHECK_THROWS_AS(catalog::cross_check_per_example(catalog::find("language")), Error);
}

}  // TEST_SUITE
