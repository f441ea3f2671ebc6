#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "exchmine/itemsets.hpp"
#include "support.hpp"

using namespace exchmine;
using testsupport::example_dataset;
using testsupport::matrix_of;
using testsupport::random_dataset;

namespace {

// Independent oracle: enumerate every itemset of size <= max_size and count
// covering rows directly. Only for small column counts.
std::vector<std::pair<Itemset, int64_t>> brute_force_frequent(const BinaryDataset& d,
                                                              int64_t min_support,
                                                              int max_size) {
    REQUIRE(d.cols() <= 12);
    std::vector<std::pair<Itemset, int64_t>> out;
    const int n = d.cols();
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        Itemset x;
        for (int c = 0; c < n; ++c)
            if (mask & (1u << c)) x.push_back(c);
        if (static_cast<int>(x.size()) > max_size) continue;
        int64_t f = 0;
        for (int r = 0; r < d.rows(); ++r) {
            bool cover = true;
            for (int c : x) cover = cover && d.get(r, c);
            f += cover;
        }
        if (f >= min_support) out.emplace_back(std::move(x), f);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        return a.first < b.first;
    });
    return out;
}

Itemset from_labels(const BinaryDataset& d, const std::string& labels) {
    std::istringstream ss(labels);
    std::string tok;
    std::vector<int> items;
    while (ss >> tok) items.push_back(d.find_col(tok));
    return make_itemset(items, d.cols());
}

}  // namespace

TEST_CASE("frequencies in the example dataset") {
    const auto d = example_dataset();
    CHECK(frequency(d, from_labels(d, "C")) == 7);
    CHECK(frequency(d, from_labels(d, "A B")) == 3);
    CHECK(frequency(d, Itemset{}) == 9);
    CHECK_THROWS_AS(frequency(d, Itemset{42}), UsageError);
}

TEST_CASE("itemset canonical form") {
    CHECK(make_itemset({3, 1, 2}, 5) == Itemset{1, 2, 3});
    CHECK_THROWS_AS(make_itemset({1, 1}, 5), ValueError);
    CHECK_THROWS_AS(make_itemset({5}, 5), UsageError);
}

TEST_CASE("mining the example dataset reproduces the known 23 itemsets") {
    const auto d = example_dataset();
    const auto family = mine_frequent(d, 3, 8);
    REQUIRE(family.size() == 23);

    const std::vector<std::pair<std::string, int64_t>> expected = {
        {"A", 4},  {"B", 3},   {"C", 7},   {"D", 5},   {"E", 4},   {"F", 4},
        {"H", 4},  {"A B", 3}, {"A C", 4}, {"A H", 3}, {"B C", 3}, {"B H", 3},
        {"C D", 3}, {"C E", 3}, {"C F", 3}, {"C H", 4}, {"D E", 3}, {"E F", 3},
        {"A B C", 3}, {"A B H", 3}, {"A C H", 3}, {"B C H", 3}, {"A B C H", 3}};
    for (size_t i = 0; i < expected.size(); ++i) {
        CHECK(family[i] == from_labels(d, expected[i].first));
        CHECK(family.targets()[i] == expected[i].second);
    }
}

TEST_CASE("mining degenerate cases") {
    const auto d = example_dataset();
    CHECK(mine_frequent(d, d.rows() + 1, 3).empty());

    const auto ones = matrix_of({"11", "11"});
    const auto family = mine_frequent(ones, 2, 2);
    REQUIRE(family.size() == 3);
    CHECK(family[0] == Itemset{0});
    CHECK(family[1] == Itemset{1});
    CHECK(family[2] == Itemset{0, 1});
    for (auto f : family.targets()) CHECK(f == 2);
}

TEST_CASE("levelwise mining agrees with brute-force enumeration") {
    for (uint64_t seed : {1u, 2u, 3u, 4u}) {
        const auto d = random_dataset(18, 9, 0.45, seed);
        for (int64_t min_support : {1, 3, 6}) {
            const auto mined = mine_frequent(d, min_support, 4);
            const auto expected = brute_force_frequent(d, min_support, 4);
            REQUIRE(mined.size() == expected.size());
            for (size_t i = 0; i < expected.size(); ++i) {
                CHECK(mined[i] == expected[i].first);
                CHECK(mined.targets()[i] == expected[i].second);
            }
        }
    }
}

TEST_CASE("frequency is antitone under itemset inclusion") {
    Rng rng(5);
    const auto d = random_dataset(25, 10, 0.4, 17);
    for (int trial = 0; trial < 200; ++trial) {
        Itemset big;
        for (int c = 0; c < d.cols(); ++c)
            if (rng.uniform01() < 0.35) big.push_back(c);
        Itemset small;
        for (int c : big)
            if (rng.uniform01() < 0.6) small.push_back(c);
        CHECK(frequency(d, small) >= frequency(d, big));
    }
}

TEST_CASE("column bitmaps give the same frequencies") {
    const auto d = random_dataset(70, 11, 0.3, 21);
    const ColumnBits cols(d);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Itemset x;
        for (int c = 0; c < d.cols(); ++c)
            if (rng.uniform01() < 0.3) x.push_back(c);
        CHECK(cols.frequency(x) == frequency(d, x));
    }
}

TEST_CASE("family difference against target frequencies") {
    const auto d = example_dataset();
    const auto ab = from_labels(d, "A B");
    const auto bh = from_labels(d, "B H");
    const ItemsetFamily family({ab, bh}, std::vector<int64_t>{3, 3});

    CHECK(itemset_difference(family, d) == 0);

    auto swapped = d;
    swapped.apply_swap({0, 1, 1, 5});
    CHECK(frequency(swapped, ab) == 3);
    CHECK(frequency(swapped, bh) == 2);
    CHECK(itemset_difference(family, swapped) == 1);

    CHECK(itemset_difference(ItemsetFamily::empty_with_targets(), d) == 0);
    CHECK_THROWS_AS(itemset_difference(ItemsetFamily({ab}), d), UsageError);
}

TEST_CASE("incremental difference matches the direct recomputation") {
    const auto d0 = example_dataset();
    const auto family =
        ItemsetFamily({from_labels(d0, "A B"), from_labels(d0, "B H")},
                      std::vector<int64_t>{3, 3});
    const ItemsetIndex index(family, d0.cols());
    std::vector<std::pair<int, int64_t>> touched;

    SUBCASE("swap away from the family's columns") {
        auto d = d0;
        const Swap sw{4, 1, 3, 2};  // rows 5,2 over columns D,C
        REQUIRE(d.swap_applicable(sw));
        std::vector<int64_t> freqs{3, 3};
        const auto delta = incremental_difference_delta(d, family, index, sw, freqs, touched);
        CHECK(delta == 0);
        CHECK(touched.empty());
    }

    SUBCASE("the example swap raises the difference by one") {
        auto d = d0;
        const Swap sw{0, 1, 1, 5};
        std::vector<int64_t> freqs{3, 3};
        const auto delta = incremental_difference_delta(d, family, index, sw, freqs, touched);
        CHECK(delta == 1);
        d.apply_swap(sw);
        for (const auto& [i, f] : touched) freqs[i] = f;
        CHECK(freqs[0] == frequency(d, family[0]));
        CHECK(freqs[1] == frequency(d, family[1]));

        // Inverse swap brings the difference back to zero.
        const Swap inverse{0, 1, 5, 1};
        const auto delta_back =
            incremental_difference_delta(d, family, index, inverse, freqs, touched);
        CHECK(delta + delta_back == 0);
    }
}

TEST_CASE("incremental difference equals recomputation under random chains") {
    const auto d0 = random_dataset(30, 12, 0.35, 8);
    const auto mined = mine_frequent(d0, 4, 3);
    const ItemsetFamily family = mined.size() > 12
        ? ItemsetFamily(std::vector<Itemset>(mined.itemsets().begin(),
                                             mined.itemsets().begin() + 12))
              .with_targets_from(d0)
        : mined;
    REQUIRE(family.has_targets());
    const ItemsetIndex index(family, d0.cols());

    auto d = d0;
    std::vector<int64_t> freqs;
    for (size_t i = 0; i < family.size(); ++i) freqs.push_back(frequency(d, family[i]));
    int64_t h = itemset_difference(family, d);
    std::vector<std::pair<int, int64_t>> touched;

    Rng rng(123);
    int applied = 0;
    for (int step = 0; step < 10000; ++step) {
        const auto n_ones = static_cast<uint64_t>(d.ones_count());
        const auto pos_a = d.one_position(rng.below(n_ones));
        const auto pos_b = d.one_position(rng.below(n_ones));
        const Swap sw{d.position_row(pos_a), d.position_row(pos_b),
                      d.position_col(pos_a), d.position_col(pos_b)};
        if (!d.swap_applicable(sw)) continue;
        const auto delta = incremental_difference_delta(d, family, index, sw, freqs, touched);
        d.apply_swap(sw);
        for (const auto& [i, f] : touched) freqs[i] = f;
        h += delta;
        REQUIRE(h == itemset_difference(family, d));
        ++applied;
    }
    CHECK(applied > 1000);
}

TEST_CASE("itemset family file round trip") {
    const auto d = example_dataset();
    const auto family = mine_frequent(d, 3, 8);

    std::ostringstream out;
    save_itemset_family(out, family, d);
    std::istringstream in(out.str());
    const auto reloaded = load_itemset_family(in, d);
    REQUIRE(reloaded.size() == family.size());
    for (size_t i = 0; i < family.size(); ++i) {
        CHECK(reloaded[i] == family[i]);
        CHECK(reloaded.targets()[i] == family.targets()[i]);
    }

    std::ostringstream again;
    save_itemset_family(again, reloaded, d);
    CHECK(again.str() == out.str());
}

TEST_CASE("itemset family file parsing") {
    const auto d = example_dataset();
    std::istringstream in("# comment\nA B\nC\n");
    const auto family = load_itemset_family(in, d);
    REQUIRE(family.size() == 2);
    CHECK_FALSE(family.has_targets());
    CHECK(family[0] == Itemset{0, 1});

    std::istringstream bad("A Z\n");
    CHECK_THROWS_WITH_AS(load_itemset_family(bad, d), doctest::Contains("line 1"),
                         ParseError);

    std::istringstream dup("A B\nB A\nC\n");
    const auto dedup = load_itemset_family(dup, d);
    CHECK(dedup.size() == 2);

    std::istringstream mixed("A B : 3\nC\n");
    CHECK_THROWS_WITH_AS(load_itemset_family(mixed, d), doctest::Contains("mixed"),
                         ParseError);
    std::istringstream mixed_rev("A B\nC : 7\n");
    CHECK_THROWS_AS(load_itemset_family(mixed_rev, d), ParseError);
}
