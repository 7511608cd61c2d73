#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "lume/geometry.hpp"

using namespace lume;

TEST_CASE("contains_kp is half-open") {
    const Box b{0, 0, 10, 10};
    CHECK(contains_kp(b, {0, 0}));
    CHECK(contains_kp(b, {9, 9}));
    CHECK_FALSE(contains_kp(b, {10, 5}));
    CHECK_FALSE(contains_kp(b, {5, 10}));
    CHECK(contains_kp(Box{3, 3, 4, 4}, {3, 3}));
}

TEST_CASE("iou fixtures") {
    CHECK(iou(BoxF{0, 0, 10, 10}, BoxF{0, 0, 10, 10}) == 1.0);
    CHECK(iou(BoxF{0, 0, 5, 5}, BoxF{20, 20, 30, 30}) == 0.0);
    // overlap 9x9 = 81, union 100 + 100 - 81 = 119
    CHECK_THAT(iou(BoxF{0, 0, 10, 10}, BoxF{1, 1, 11, 11}),
               Catch::Matchers::WithinAbs(81.0 / 119.0, 1e-12));
    SECTION("zero-area union") {
        CHECK(iou(BoxF{3, 3, 3, 3}, BoxF{3, 3, 3, 3}) == 0.0);
    }
}

TEST_CASE("iou symmetry and range on random boxes") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto rand_box = [&rng] {
            const int x1 = static_cast<int>(rng() % 50), y1 = static_cast<int>(rng() % 50);
            return BoxF(Box{x1, y1, x1 + 1 + static_cast<int>(rng() % 30),
                            y1 + 1 + static_cast<int>(rng() % 30)});
        };
        const BoxF a = rand_box(), b = rand_box();
        const double ab = iou(a, b);
        CHECK(ab == iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou(a, a) == 1.0);
    }
}

TEST_CASE("mean_bb") {
    SECTION("identical boxes stay fixed") {
        const std::vector<Box> boxes(4, Box{3, 4, 10, 12});
        CHECK(mean_bb(boxes) == BoxF(Box{3, 4, 10, 12}));
    }
    SECTION("corner-wise mean") {
        const std::vector<Box> boxes{{0, 0, 10, 10}, {2, 2, 12, 12}};
        CHECK(mean_bb(boxes) == BoxF{1, 1, 11, 11});
    }
    SECTION("real-valued corners, no rounding") {
        const std::vector<Box> boxes{{0, 0, 4, 4}, {0, 0, 5, 5}};
        CHECK(mean_bb(boxes) == BoxF{0, 0, 4.5, 4.5});
    }
    SECTION("empty list rejected") {
        CHECK_THROWS_AS(mean_bb(std::vector<Box>{}), std::invalid_argument);
    }
}

TEST_CASE("envelope_vehicle_bb") {
    SECTION("coincident points give a degenerate 1-pixel box") {
        const std::vector<Keypoint> hl{{5, 5}, {5, 5}};
        CHECK(envelope_vehicle_bb({5, 5}, hl) == Box{5, 5, 6, 6});
    }
    SECTION("min/max over all points, +1 on the lower-right") {
        const std::vector<Keypoint> hl{{2, 18}, {18, 18}};
        CHECK(envelope_vehicle_bb({10, 20}, hl) == Box{2, 18, 19, 21});
    }
    SECTION("position at the origin") {
        const std::vector<Keypoint> hl{{9, 9}};
        CHECK(envelope_vehicle_bb({0, 0}, hl) == Box{0, 0, 10, 10});
    }
    SECTION("every input point is contained in the result") {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 100; ++trial) {
            const Keypoint pos{static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)};
            std::vector<Keypoint> hl;
            for (unsigned i = 0; i < 1 + rng() % 5; ++i)
                hl.push_back({static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)});
            const Box b = envelope_vehicle_bb(pos, hl);
            CHECK(contains_kp(b, pos));
            for (const auto& k : hl) CHECK(contains_kp(b, k));
        }
    }
    SECTION("empty headlight list rejected") {
        CHECK_THROWS_AS(envelope_vehicle_bb({0, 0}, std::vector<Keypoint>{}),
                        std::invalid_argument);
    }
}
