#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "lrtc/corpus.hpp"

using namespace lrtc;
using namespace lrtc::corpus;

namespace {

std::filesystem::path temp_file(const std::string &name, const std::string &contents) {
    auto p = std::filesystem::temp_directory_path() / ("lrtc_test_" + name);
    std::ofstream(p) << contents;
    return p;
}

RawDocument raw(std::string text) { return {std::move(text), Language::mn, "doc"}; }

}  // namespace

TEST(CleanDocument, RejectsNineteenCharacters) {
    auto r = clean_document(raw("abcdefghij klmnopqrs"));  // 19 non-whitespace
    ASSERT_TRUE(std::holds_alternative<Rejection>(r));
    EXPECT_EQ(std::get<Rejection>(r).reason, RejectReason::TooShort);
    EXPECT_EQ(std::get<Rejection>(r).source_id, "doc");
}

TEST(CleanDocument, AcceptsTwentyCharacters) {
    auto r = clean_document(raw("abcdefghij klmnopqrst"));
    ASSERT_TRUE(std::holds_alternative<CleanDocument>(r));
    EXPECT_EQ(std::get<CleanDocument>(r).length, 20u);
}

TEST(CleanDocument, CleanInputIsUnchanged) {
    const std::string text = "the quick brown fox jumps over the lazy dog";
    auto r = clean_document(raw(text));
    ASSERT_TRUE(std::holds_alternative<CleanDocument>(r));
    EXPECT_EQ(std::get<CleanDocument>(r).text, text);
}

TEST(CleanDocument, StripsUrlAndCollapsesSpaces) {
    auto r = clean_document(raw("see https://a.b/c for  details about twenty-five chars"));
    ASSERT_TRUE(std::holds_alternative<CleanDocument>(r));
    EXPECT_EQ(std::get<CleanDocument>(r).text, "see for details about twenty-five chars");
}

TEST(CleanDocument, StripsMarkupWwwAndControls) {
    auto r = clean_document(raw("<p>ᠰᠤᠷᠭᠠᠨ\x01 ᠬᠦᠮᠦᠵᠢᠯ</p> www.example.org\tᠰᠤᠷᠭᠠᠨ ᠬᠦᠮᠦᠵᠢᠯ ᠰᠤᠷᠭᠠᠨ"));
    ASSERT_TRUE(std::holds_alternative<CleanDocument>(r));
    EXPECT_EQ(std::get<CleanDocument>(r).text, "ᠰᠤᠷᠭᠠᠨ ᠬᠦᠮᠦᠵᠢᠯ ᠰᠤᠷᠭᠠᠨ ᠬᠦᠮᠦᠵᠢᠯ ᠰᠤᠷᠭᠠᠨ");
}

TEST(CleanDocument, EmptyAfterCleaning) {
    auto r = clean_document(raw("<div> http://x.y/z </div>"));
    ASSERT_TRUE(std::holds_alternative<Rejection>(r));
    EXPECT_EQ(std::get<Rejection>(r).reason, RejectReason::EmptyAfterCleaning);
}

TEST(CleanDocument, InvalidUtf8Throws) {
    EXPECT_THROW(clean_document(raw("abc\xff def")), EncodingError);
    EXPECT_THROW(clean_document(raw("\xc0\xaf overlong")), EncodingError);
    EXPECT_THROW(clean_document(raw("\xed\xa0\x80 surrogate")), EncodingError);
}

TEST(CleanDocument, IdempotentAndInvariantOnRandomInputs) {
    const std::vector<std::string> pieces = {"a",    "b",   " ",     "  ",  "<",  ">",  "http", "://",  "www.",
                                             "\x01", "\t",  "\n",    "ä",   "བ",  "་",  ".",    "/",    "x1",
                                             "ftp",  "<b>", "</b>",  "\xc2\x85", "ᠰ", "1",  "\"",   "\xe3\x80\x80"};
    Rng rng(99);
    int accepted = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text;
        const auto n = rng.uniform_int(25);
        for (std::uint64_t i = 0; i < n; ++i) text += pieces[rng.uniform_int(pieces.size())];
        auto first = clean_document(raw(text), 1);
        if (!std::holds_alternative<CleanDocument>(first)) continue;
        ++accepted;
        const auto &doc = std::get<CleanDocument>(first);
        EXPECT_TRUE(satisfies_clean_invariants(doc, 1)) << text;
        auto second = clean_document(raw(doc.text), 1);
        ASSERT_TRUE(std::holds_alternative<CleanDocument>(second)) << text;
        EXPECT_EQ(std::get<CleanDocument>(second), doc) << text;
    }
    EXPECT_GT(accepted, 1000);
}

TEST(SplitCorpus, TenDocs) {
    std::vector<int> docs(10);
    std::iota(docs.begin(), docs.end(), 0);
    auto s = split_corpus(docs, 42);
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.valid.size(), 1u);
    EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitCorpus, EmptyAndTwelve) {
    auto e = split_corpus(std::vector<int>{}, 1);
    EXPECT_TRUE(e.train.empty() && e.valid.empty() && e.test.empty());
    auto s = split_corpus(std::vector<int>(12, 0), 1);
    EXPECT_EQ(s.train.size(), 10u);
    EXPECT_EQ(s.valid.size(), 1u);
    EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitCorpus, PartitionAndDeterminism) {
    for (int n : {1, 9, 19, 101, 357}) {
        std::vector<int> docs(static_cast<std::size_t>(n));
        std::iota(docs.begin(), docs.end(), 0);
        auto a = split_corpus(docs, 7);
        auto b = split_corpus(docs, 7);
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.valid, b.valid);
        EXPECT_EQ(a.test, b.test);
        std::multiset<int> all(a.train.begin(), a.train.end());
        all.insert(a.valid.begin(), a.valid.end());
        all.insert(a.test.begin(), a.test.end());
        EXPECT_EQ(all, std::multiset<int>(docs.begin(), docs.end()));
    }
    std::vector<int> docs(50);
    std::iota(docs.begin(), docs.end(), 0);
    EXPECT_NE(split_corpus(docs, 1).train, split_corpus(docs, 2).train);
}

namespace {

std::vector<LabeledExample> make_examples(std::map<std::string, int> counts) {
    std::vector<LabeledExample> out;
    for (const auto &[label, n] : counts) {
        for (int i = 0; i < n; ++i) out.push_back({label + std::to_string(i), label, Language::kk});
    }
    return out;
}

std::map<std::string, int> label_counts(const std::vector<LabeledExample> &xs) {
    std::map<std::string, int> c;
    for (const auto &x : xs) ++c[x.label];
    return c;
}

}  // namespace

TEST(BalanceDataset, AlreadyBalancedIsUnchanged) {
    auto xs = make_examples({{"A", 100}, {"B", 100}});
    EXPECT_EQ(balance_dataset(xs, BalanceStrategy::downsample_to_min, 3), xs);
}

TEST(BalanceDataset, DownsamplesToMinimum) {
    auto out = balance_dataset(make_examples({{"A", 300}, {"B", 100}}), BalanceStrategy::downsample_to_min, 3);
    EXPECT_EQ(label_counts(out), (std::map<std::string, int>{{"A", 100}, {"B", 100}}));
    auto one = balance_dataset(make_examples({{"A", 1}, {"B", 50}}), BalanceStrategy::downsample_to_min, 3);
    EXPECT_EQ(label_counts(one), (std::map<std::string, int>{{"A", 1}, {"B", 1}}));
}

TEST(BalanceDataset, SeededAndDeterministic) {
    auto xs = make_examples({{"A", 30}, {"B", 10}, {"C", 17}});
    auto a = balance_dataset(xs, BalanceStrategy::downsample_to_min, 11);
    EXPECT_EQ(a, balance_dataset(xs, BalanceStrategy::downsample_to_min, 11));
    EXPECT_NE(a, balance_dataset(xs, BalanceStrategy::downsample_to_min, 12));
}

TEST(BalanceDataset, Errors) {
    EXPECT_THROW(balance_dataset({}, BalanceStrategy::downsample_to_min, 1), InvalidDataset);
    EXPECT_THROW(balance_dataset(make_examples({{"A", 2}}), BalanceStrategy::downsample_to_min, 1, {"A", "B"}),
                 InvalidDataset);
}

TEST(LoadDataset, WellFormed) {
    auto p = temp_file("ok.jsonl",
                       R"({"text":"a b","label":"x","lang":"mn"})"
                       "\n"
                       R"({"text":"c","label":"y","lang":"ko"})"
                       "\n"
                       R"({"text":"d","label":"x","lang":"bo"})"
                       "\n");
    auto xs = load_dataset(p.string());
    ASSERT_EQ(xs.size(), 3u);
    EXPECT_EQ(xs[1], (LabeledExample{"c", "y", Language::ko}));
}

TEST(LoadDataset, MissingLabelIsLineNumbered) {
    auto p = temp_file("nolabel.jsonl", R"({"text":"a b","lang":"mn"})"
                                        "\n");
    try {
        load_dataset(p.string());
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 1u);
    }
}

TEST(LoadDataset, EmptyFileAndBadLanguage) {
    EXPECT_TRUE(load_dataset(temp_file("empty.jsonl", "").string()).empty());
    auto p = temp_file("badlang.jsonl", R"({"text":"a","label":"x","lang":"en"})"
                                        "\n");
    EXPECT_THROW(load_dataset(p.string()), LanguageError);
    auto q = temp_file("badjson.jsonl", R"({"text":"a","label":"x","lang":"mn"})"
                                        "\n{oops\n");
    try {
        load_dataset(q.string());
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(RejectionLog, TsvLine) {
    std::ostringstream out;
    write_rejection(out, {RejectReason::TooShort, "doc-7"});
    EXPECT_EQ(out.str(), "doc-7\tTooShort\n");
}

TEST(Language, ParseRejectsUnknownCodes) {
    for (Language l : kAllLanguages) EXPECT_EQ(parse_language(to_code(l)), l);
    EXPECT_THROW(parse_language("zh"), LanguageError);
    EXPECT_THROW(parse_language(""), LanguageError);
}
