#include <gtest/gtest.h>

#include <random>
#include <unordered_set>

#include "fixtures.hpp"
#include "meanrank/error.hpp"
#include "meanrank/prompt.hpp"

using namespace meanrank;

namespace {

struct ToyWorld {
    KnowledgeGraph kg = load_dataset_directory(MEANRANK_TEST_DATA "/toy_wn");
    GreedyTokenizer tokenizer{build_word_vocabulary(kg)};
    EntityCatalog catalog = build_catalog(tokenizer, kg.entities());

    EntityId id(const char* name) const {
        for (const auto& e : kg.entities()) {
            if (e.name == name) return e.id;
        }
        throw std::runtime_error(name);
    }
    RelationId rel(const char* key) const { return *kg.find_relation(key); }
};

std::string repeat(const std::string& s, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += s;
    return out;
}

}  // namespace

TEST(Prompt, HeadPredictionLayout) {
    const ToyWorld w;
    const auto q = make_query(Triple{w.id("matchmaker.n.01"), w.rel("_hypernym"), w.id("mediator.n.01")},
                              Direction::predict_head);
    const PromptOptions options{64, true};
    const auto prompt = build_prompt(w.kg, w.catalog, w.tokenizer, q, options);
    const std::size_t L = w.catalog.max_length();
    const std::string body = "hypernym mediator noun 1 a negotiator who acts as a link between parties";
    const std::size_t used = 1 + L + w.tokenizer.encode(body).size() + 1;
    EXPECT_EQ(render_prompt(w.tokenizer.vocabulary(), prompt),
              "<s>" + repeat("<mask>", L) + body + "</s>" + repeat("<pad>", 64 - used));
    EXPECT_EQ(prompt.mask_start, 1u);
    EXPECT_EQ(prompt.mask_length, L);
    EXPECT_EQ(prompt.tokens.size(), 64u);
}

TEST(Prompt, TailPredictionLayout) {
    const ToyWorld w;
    const auto q = make_query(Triple{w.id("grant.n.01"), w.rel("_hypernym"), w.id("aid.n.03")},
                              Direction::predict_tail);
    const auto prompt = build_prompt(w.kg, w.catalog, w.tokenizer, q, PromptOptions{64, false});
    const std::size_t L = w.catalog.max_length();
    EXPECT_EQ(render_prompt(w.tokenizer.vocabulary(), prompt),
              "<s>grant noun 1 any monetary aid hypernym" + repeat("<mask>", L) + "</s>");
    EXPECT_EQ(prompt.mask_start, 1u + 7u);
    EXPECT_EQ(prompt.tokens.size(), 1u + 7u + L + 1u);
}

TEST(Prompt, MaskSpanIsCatalogWidthForEveryQuery) {
    const ToyWorld w;
    for (auto split : {SplitName::train, SplitName::valid, SplitName::test}) {
        for (const auto& q : standard_queries(w.kg.split(split))) {
            const auto p = build_prompt(w.kg, w.catalog, w.tokenizer, q);
            ASSERT_EQ(p.mask_length, w.catalog.max_length());
            ASSERT_EQ(p.tokens.size(), 512u);
            for (std::size_t j = 0; j < p.mask_length; ++j) ASSERT_EQ(p.tokens[p.mask_start + j], Vocabulary::mask);
            ASSERT_EQ(std::count(p.tokens.begin(), p.tokens.end(), Vocabulary::mask),
                      static_cast<std::ptrdiff_t>(p.mask_length));
        }
    }
}

TEST(Prompt, EmptyContentRendering) {
    const Vocabulary v({"<s>", "</s>", "<mask>", "<pad>"});
    const std::vector<TokenId> ids{Vocabulary::bos, Vocabulary::mask, Vocabulary::mask, Vocabulary::eos};
    EXPECT_EQ(render_tokens(v, ids), "<s><mask><mask></s>");
}

TEST(Prompt, EmptyDefinitionIsOmitted) {
    auto entities = support::named_entities({"alpha", "beta gamma"});
    const KnowledgeGraph kg(entities, support::named_relations({"likes"}), {Triple{0, 0, 1}}, {}, {});
    const GreedyTokenizer tok(build_word_vocabulary(kg));
    const auto catalog = build_catalog(tok, kg.entities());
    const auto p = build_prompt(kg, catalog, tok, make_query(Triple{0, 0, 1}, Direction::predict_tail),
                                PromptOptions{16, false});
    EXPECT_EQ(render_prompt(tok.vocabulary(), p), "<s>alpha likes<mask><mask></s>");
}

TEST(Prompt, TruncatesDefinitionFromItsEnd) {
    const KnowledgeGraph kg(support::named_entities({"a", "b"}, {"one two three four five"}),
                            support::named_relations({"r"}), {Triple{0, 0, 1}}, {}, {});
    const GreedyTokenizer tok(build_word_vocabulary(kg));
    const auto catalog = build_catalog(tok, kg.entities());
    const auto q = make_query(Triple{0, 0, 1}, Direction::predict_tail);
    // fixed part: <s> a r <mask> </s> = 5 tokens, leaving room for 2 definition words
    const auto p = build_prompt(kg, catalog, tok, q, PromptOptions{7, true});
    EXPECT_EQ(render_prompt(tok.vocabulary(), p), "<s>a one two r<mask></s>");
    const auto bare = build_prompt(kg, catalog, tok, q, PromptOptions{5, true});
    EXPECT_EQ(render_prompt(tok.vocabulary(), bare), "<s>a r<mask></s>");
}

TEST(Prompt, OverflowNamesTheQuery) {
    const KnowledgeGraph kg(support::named_entities({"a", "b"}), support::named_relations({"r"}),
                            {Triple{0, 0, 1}}, {}, {});
    const GreedyTokenizer tok(build_word_vocabulary(kg));
    const auto catalog = build_catalog(tok, kg.entities());
    const auto q = make_query(Triple{0, 0, 1}, Direction::predict_tail);
    try {
        (void)build_prompt(kg, catalog, tok, q, PromptOptions{4, true});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find(std::to_string(q.id)), std::string::npos);
    }
}

TEST(Prompt, RenderedPromptsParseBack) {
    const ToyWorld w;
    for (const auto& q : standard_queries(w.kg.test())) {
        for (bool pad : {true, false}) {
            const auto p = build_prompt(w.kg, w.catalog, w.tokenizer, q, PromptOptions{96, pad});
            EXPECT_EQ(parse_rendered(w.tokenizer, render_prompt(w.tokenizer.vocabulary(), p)), p.tokens);
        }
    }
}

TEST(Prompt, DirectionSwapMovesTheMask) {
    const ToyWorld w;
    const Triple t{w.id("grant.n.01"), w.rel("_hypernym"), w.id("aid.n.03")};
    const auto tail = build_prompt(w.kg, w.catalog, w.tokenizer, make_query(t, Direction::predict_tail));
    const auto head = build_prompt(w.kg, w.catalog, w.tokenizer, make_query(t, Direction::predict_head));
    EXPECT_EQ(head.mask_start, 1u);
    EXPECT_GT(tail.mask_start, 1u);
    EXPECT_NE(render_prompt(w.tokenizer.vocabulary(), head).find("aid noun 3"), std::string::npos);
    EXPECT_EQ(render_prompt(w.tokenizer.vocabulary(), tail).find("aid noun 3"), std::string::npos);
}

TEST(QueryId, DistinctAcrossTriplesAndDirections) {
    std::mt19937_64 engine(5);
    std::uniform_int_distribution<std::uint32_t> e(0, (1u << 26) - 1), r(0, (1u << 11) - 1);
    std::unordered_set<std::uint64_t> seen;
    std::unordered_set<std::uint64_t> packed;
    for (int k = 0; k < 100000; ++k) {
        const Triple t{e(engine), r(engine), e(engine)};
        for (auto d : {Direction::predict_head, Direction::predict_tail}) {
            const std::uint64_t key = (std::uint64_t{t.head} << 38) | (std::uint64_t{t.tail} << 12) |
                                      (std::uint64_t{t.rel} << 1) | static_cast<std::uint64_t>(d);
            if (!packed.insert(key).second) continue;
            ASSERT_TRUE(seen.insert(query_id(t, d)).second);
        }
    }
    EXPECT_EQ(query_id(Triple{1, 2, 3}, Direction::predict_tail), query_id(Triple{1, 2, 3}, Direction::predict_tail));
    EXPECT_THROW((void)query_id(Triple{1u << 26, 0, 0}, Direction::predict_tail), InputError);
    EXPECT_THROW((void)query_id(Triple{0, 1u << 11, 0}, Direction::predict_tail), InputError);
}

TEST(Queries, StandardAndUnseenSelection) {
    const ToyWorld w;
    const auto standard = standard_queries(w.kg.test());
    ASSERT_EQ(standard.size(), 2 * w.kg.test().size());
    EXPECT_EQ(standard[0].direction, Direction::predict_tail);
    EXPECT_EQ(standard[1].direction, Direction::predict_head);

    // Entities 0 and 1 held out for validation, 2 for test.
    const KnowledgeGraph kg(support::named_entities({"a", "b", "c", "d"}), support::named_relations({"r"}),
                            {Triple{0, 0, 1}, Triple{3, 0, 2}, Triple{3, 0, 3}}, {}, {});
    const std::vector<EntityId> valid{0, 1}, test{2};
    const auto split = partition_unseen(kg, valid, test);
    const auto vq = unseen_queries(split, SplitName::valid);
    ASSERT_EQ(vq.size(), 2u);  // (0, r, 1): both sides held out
    const auto tq = unseen_queries(split, SplitName::test);
    ASSERT_EQ(tq.size(), 1u);
    EXPECT_EQ(tq[0].direction, Direction::predict_tail);
    EXPECT_EQ(tq[0].gold(), 2u);
    EXPECT_THROW((void)unseen_queries(kg, SplitName::test), InputError);
}
