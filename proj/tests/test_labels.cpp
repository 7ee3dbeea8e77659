#include <doctest.h>

#include <set>

#include "swarm/labels.hpp"

using namespace swarm;

TEST_SUITE("labels") {
  TEST_CASE("parse and print round-trip every label") {
    for (int n = 1; n <= 5; ++n) {
      for (const auto& l : enumerate_labels(n)) {
        CHECK(ChunkLabel::parse(n, l.to_string()) == l);
      }
    }
    CHECK(ChunkLabel::parse(3, " { 3 , 1 } ").bits() == 0b101u);
    CHECK(ChunkLabel::parse(3, "{}").is_empty());
  }

  TEST_CASE("malformed labels are rejected") {
    CHECK_THROWS(ChunkLabel::parse(3, "{4}"));
    CHECK_THROWS(ChunkLabel::parse(3, "{0}"));
    CHECK_THROWS(ChunkLabel::parse(3, "1,2"));
    CHECK_THROWS(ChunkLabel::parse(3, "{1,}"));
    CHECK_THROWS(check_chunk_count(0));
    CHECK_THROWS(check_chunk_count(kMaxChunks + 1));
  }

  TEST_CASE("enumeration is complete and ordered by mask") {
    const auto labels = enumerate_labels(4);
    REQUIRE(labels.size() == 16);
    std::set<Mask> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      CHECK(labels[i].index() == i);
      seen.insert(labels[i].bits());
    }
    CHECK(seen.size() == 16);
    CHECK(labels.front().is_empty());
    CHECK(labels.back().is_full());
  }

  TEST_CASE("subset, cover and relation") {
    const int n = 3;
    const auto e = ChunkLabel::empty(n), a = ChunkLabel::of(n, {1}), ab = ChunkLabel::of(n, {1, 2});
    const auto b = ChunkLabel::of(n, {2}), f = ChunkLabel::full(n);
    CHECK(is_subset(e, f));
    CHECK(covers(e, a));
    CHECK(covers(a, ab));
    CHECK_FALSE(covers(a, f));
    CHECK_FALSE(covers(a, a));
    CHECK(relates(a, ab));
    CHECK_FALSE(relates(a, b));

    // Brute force against set semantics.
    for (Mask x = 0; x < 8; ++x) {
      for (Mask y = 0; y < 8; ++y) {
        const bool sub = (x | y) == y;
        CHECK(mask_subset(x, y) == sub);
        CHECK(mask_covers(x, y) == (sub && popcount(y) == popcount(x) + 1));
        CHECK(mask_relates(x, y) == (sub || (x | y) == x));
      }
    }
  }

  TEST_CASE("names and binomials") {
    CHECK(label_string(2, 0b11) == "{1,2}");
    CHECK(label_names(2) == std::vector<std::string>{"{}", "{1}", "{2}", "{1,2}"});
    CHECK(binomial(6, 3) == 20.0);
    CHECK(binomial(10, 0) == 1.0);
    CHECK(binomial(4, 5) == 0.0);
  }
}
