#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "poiforge/embed.hpp"

using namespace poiforge;
using Catch::Approx;

TEST_CASE("embedder is deterministic and unit-norm") {
    TrigramEmbedder e(300);
    auto a = e.embed("happy stay");
    auto b = e.embed("happy stay");
    CHECK(a == b);
    double norm = 0.0;
    for (double x : a) norm += x * x;
    CHECK(norm == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spell variants sit closer than unrelated text") {
    TrigramEmbedder e(300);
    auto happy = e.embed("happy stay");
    auto happi = e.embed("happi stay");
    auto other = e.embed("blue lagoon");
    CHECK(cosine_similarity(happy, happi) >
          cosine_similarity(happy, other));
    CHECK(cosine_similarity(happy, happi) > 0.5);
}

TEST_CASE("empty text embeds to the zero vector") {
    TrigramEmbedder e(16);
    auto v = e.embed("");
    for (double x : v) CHECK(x == 0.0);
    CHECK(cosine_similarity(v, v) == 0.0);
}

TEST_CASE("token order changes nothing, duplication changes nothing") {
    TrigramEmbedder e(64);
    CHECK(e.embed("alpha beta") == e.embed("beta alpha"));
    auto once = e.embed("alpha beta");
    auto twice = e.embed("alpha beta alpha beta");
    for (size_t i = 0; i < once.size(); ++i)
        CHECK(once[i] == Approx(twice[i]).margin(1e-12));
}

TEST_CASE("cosine similarity closed forms") {
    CHECK(cosine_similarity({1, 0}, {0, 1}) == 0.0);
    CHECK(cosine_similarity({1, 1}, {1, 0}) ==
          Approx(1.0 / std::sqrt(2.0)));
    CHECK(cosine_similarity({3, 4}, {3, 4}) == Approx(1.0));
    CHECK(cosine_similarity({0, 0}, {1, 2}) == 0.0);
    CHECK_THROWS(cosine_similarity({1.0}, {1.0, 2.0}));
}

TEST_CASE("median vector takes the coordinate-wise lower median") {
    std::vector<double> a = {1, 10}, b = {2, 20}, c = {3, 30}, d = {4, 40};
    std::vector<const std::vector<double>*> odd = {&a, &b, &c};
    CHECK(median_vector(odd) == std::vector<double>{2, 20});
    std::vector<const std::vector<double>*> even = {&a, &b, &c, &d};
    CHECK(median_vector(even) == std::vector<double>{2, 20});
    CHECK(median_vector({}).empty());
}

TEST_CASE("embedding files round trip") {
    TrigramEmbedder e(8);
    std::vector<std::pair<std::string, std::vector<double>>> rows = {
        {"a1", e.embed("one")}, {"a2", e.embed("two")}};
    save_embeddings(rows, 8, "emb_rt.jsonl");
    EmbeddingSet set = load_embeddings("emb_rt.jsonl");
    CHECK(set.dim == 8);
    CHECK(set.by_id.size() == 2);
    CHECK(set.by_id.at("a1") == rows[0].second);
    CHECK(set.by_id.at("a2") == rows[1].second);
    std::remove("emb_rt.jsonl");
}

TEST_CASE("embedding file validation") {
    {
        std::ofstream out("emb_bad.jsonl");
        out << "{\"dim\": 3}\n";
        out << "{\"id\": \"a1\", \"v\": [1.0, 2.0]}\n";
    }
    CHECK_THROWS_WITH(load_embeddings("emb_bad.jsonl"),
                      Catch::Matchers::ContainsSubstring("a1"));
    std::remove("emb_bad.jsonl");

    {
        std::ofstream out("emb_dup.jsonl");
        out << "{\"dim\": 1}\n";
        out << "{\"id\": \"a1\", \"v\": [1.0]}\n";
        out << "{\"id\": \"a1\", \"v\": [2.0]}\n";
    }
    CHECK_THROWS_WITH(load_embeddings("emb_dup.jsonl"),
                      Catch::Matchers::ContainsSubstring("duplicate"));
    std::remove("emb_dup.jsonl");

    {
        std::ofstream out("emb_hdr.jsonl");
        out << "{\"id\": \"a1\", \"v\": [1.0]}\n";
    }
    CHECK_THROWS(load_embeddings("emb_hdr.jsonl"));
    std::remove("emb_hdr.jsonl");

    {
        std::ofstream out("emb_dim.jsonl");
        out << "{\"dim\": 4}\n";
    }
    CHECK_THROWS_WITH(load_embeddings("emb_dim.jsonl", 300),
                      Catch::Matchers::ContainsSubstring("expected 300"));
    std::remove("emb_dim.jsonl");

    CHECK_THROWS(load_embeddings("emb_missing.jsonl"));
}
