#include <gtest/gtest.h>

#include <set>

#include "hijacksim/core/types.hpp"

using namespace hijacksim;

TEST(Rng, ReproducibleAndSeedSensitive) {
    Rng a(7), b(7), c(8);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
    }
}

TEST(Rng, UniformIntBoundsAndCoverage) {
    Rng r(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = r.uniform_int(3, 9);
        ASSERT_GE(v, 3u);
        ASSERT_LE(v, 9u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
    EXPECT_EQ(r.uniform_int(5, 5), 5u);
    EXPECT_LE(r.uniform_int(0, ~std::uint64_t{0}), ~std::uint64_t{0});
}

TEST(Rng, Bernoulli) {
    Rng r(2);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += r.bernoulli(0.3);
    EXPECT_NEAR(hits / 10000.0, 0.3, 0.02);
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
}

TEST(DeriveSeed, StreamsDiffer) {
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
    EXPECT_NE(derive_seed(1, 2, 0), derive_seed(1, 2, 1));
}

TEST(Addresses, ParseAndFormat) {
    EXPECT_EQ(MacAddress::parse("02:00:00:00:00:07").to_string(), "02:00:00:00:00:07");
    EXPECT_EQ(MacAddress::from_index(7), MacAddress::parse("02:00:00:00:00:07"));
    EXPECT_THROW(MacAddress::parse("02:00:00:00:00"), ConfigError);
    EXPECT_THROW(MacAddress::parse("zz:00:00:00:00:07"), ConfigError);
    EXPECT_EQ(Ipv4Address::parse("192.168.1.7").value(), 0xC0A80107u);
    EXPECT_EQ(Ipv4Address(0xC0A80107u).to_string(), "192.168.1.7");
    EXPECT_THROW(Ipv4Address::parse("192.168.1"), ConfigError);
    EXPECT_THROW(Ipv4Address::parse("192.168.1.256"), ConfigError);
}

TEST(Time, Conversions) {
    EXPECT_EQ(from_seconds(1.5), VirtualTime{1500000});
    EXPECT_EQ(from_millis(45), VirtualTime{45000});
    EXPECT_DOUBLE_EQ(to_seconds(VirtualTime{250000}), 0.25);
}
