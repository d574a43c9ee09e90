#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "meanrank/bench.hpp"

using namespace meanrank;

TEST(Bench, ZeroQueriesGiveEmptyReport) {
    BenchConfig config;
    config.queries = 0;
    EXPECT_TRUE(run_bench(config).empty());
    std::ostringstream csv;
    write_bench_csv(csv, {});
    EXPECT_EQ(csv.str(), "entities,l_max,vocab,queries,seconds,per_entity_ns,kernel\n");
}

TEST(Bench, OneRowPerEntityCount) {
    BenchConfig config;
    config.entity_counts = {1, 100, 2000};
    config.vocab = 500;
    config.queries = 3;
    config.min_seconds = 0.01;
    const auto rows = run_bench(config);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].entities, config.entity_counts[k]);
        EXPECT_GE(rows[k].queries, 3u);
        EXPECT_GT(rows[k].seconds, 0.0);
        EXPECT_GT(rows[k].per_entity_ns, 0.0);
    }
    std::ostringstream csv, table;
    write_bench_csv(csv, rows);
    write_bench_table(table, rows);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_FALSE(table.str().empty());
}
