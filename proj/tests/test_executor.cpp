#include "parpc/executor.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>

using namespace parpc;

TEST(EvenSlices, PartitionIsContiguousAndBalanced) {
    for (std::size_t count = 0; count < 40; ++count)
        for (std::size_t parts = 1; parts < 10; ++parts) {
            auto s = even_slices(count, parts);
            std::size_t at = 0, lo = count, hi = 0;
            for (auto sl : s) {
                EXPECT_EQ(sl.begin, at);
                at = sl.end;
                lo = std::min(lo, sl.end - sl.begin);
                hi = std::max(hi, sl.end - sl.begin);
            }
            EXPECT_EQ(at, count);
            if (count) {
                EXPECT_LE(hi - lo, 1u);
                EXPECT_GE(lo, 1u);
            }
        }
}

TEST(ForkJoinPool, VisitsEveryIndexExactlyOnce) {
    for (std::size_t workers : {1, 2, 3, 4, 8}) {
        ForkJoinPool pool(workers);
        for (std::size_t count : {1, 2, 5, 7, 64, 1000}) {
            std::vector<std::atomic<int>> hits(count);
            pool.run(count, [&](Slice s) {
                for (auto k = s.begin; k < s.end; ++k) hits[k].fetch_add(1);
            });
            for (auto& h : hits) EXPECT_EQ(h.load(), 1);
        }
    }
}

TEST(ForkJoinPool, EmptyRunCallsNothing) {
    ForkJoinPool pool(4);
    bool called = false;
    pool.run(0, [&](Slice) { called = true; });
    EXPECT_FALSE(called);
}

TEST(ForkJoinPool, RethrowsFirstFailingSliceAfterJoin) {
    ForkJoinPool pool(4);
    std::atomic<int> finished{0};
    try {
        pool.run(4, [&](Slice s) {
            if (s.begin == 2) throw std::runtime_error("slice 2");
            if (s.begin == 3) throw std::runtime_error("slice 3");
            finished.fetch_add(1);
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "slice 2");
    }
    EXPECT_EQ(finished.load(), 2);
    // the pool stays usable after a failure
    std::atomic<int> n{0};
    pool.run(10, [&](Slice s) { n.fetch_add(static_cast<int>(s.end - s.begin)); });
    EXPECT_EQ(n.load(), 10);
}

TEST(ForkJoinPool, ManySmallRunsInSuccession) {
    ForkJoinPool pool(3);
    long total = 0;
    std::mutex m;
    for (int round = 0; round < 2000; ++round)
        pool.run(1 + round % 5, [&](Slice s) {
            std::lock_guard lock(m);
            total += static_cast<long>(s.end - s.begin);
        });
    long expected = 0;
    for (int round = 0; round < 2000; ++round) expected += 1 + round % 5;
    EXPECT_EQ(total, expected);
}
