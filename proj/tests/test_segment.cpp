#include <gtest/gtest.h>

#include "lrtc/rng.hpp"
#include "lrtc/segment.hpp"

using namespace lrtc;
using namespace lrtc::segment;

using Tokens = std::vector<std::string>;

TEST(SegmentSpace, Basic) {
    EXPECT_EQ(segment_space("ab cd").tokens, (Tokens{"ab", "cd"}));
    EXPECT_TRUE(segment_space("").tokens.empty());
    EXPECT_EQ(segment_space("a  b").tokens, (Tokens{"a", "b"}));
    EXPECT_EQ(segment_space(" \t a　b ").tokens, (Tokens{"a", "b"}));
    EXPECT_EQ(segment_space("year 2023 ok").tokens, (Tokens{"year", "2023", "ok"}));
}

TEST(SegmentTibetan, SplitsOnTshegShadAndSpace) {
    EXPECT_EQ(segment_tibetan_syllables("བོད་ཡིག").tokens, (Tokens{"བོད", "ཡིག"}));
    EXPECT_EQ(segment_tibetan_syllables("བོད").tokens, (Tokens{"བོད"}));
    EXPECT_EQ(segment_tibetan_syllables("ཀ་ཁ། ག").tokens, (Tokens{"ཀ", "ཁ", "ག"}));
    EXPECT_EQ(segment_tibetan_syllables("ཀ་་ཁ་།").tokens, (Tokens{"ཀ", "ཁ"}));
}

TEST(SegmentLongestMatch, Examples) {
    MorphemeLexicon lex("t", {"ab", "c", "abc"});
    EXPECT_EQ(segment_longest_match("abc", lex).tokens, (Tokens{"abc"}));
    MorphemeLexicon lex2("t", {"ab", "c"});
    EXPECT_EQ(segment_longest_match("abd", lex2).tokens, (Tokens{"ab", "d"}));
    EXPECT_TRUE(segment_longest_match("", lex2).tokens.empty());
    EXPECT_EQ(segment_longest_match("ab cab", lex2).tokens, (Tokens{"ab", "c", "ab"}));
}

TEST(SegmentLongestMatch, KoreanStub) {
    MorphemeLexicon lex("ko", {"학교", "에", "가", "ㅂ니다", "갑니다", "학생", "은"});
    auto seq = lrtc::segment::segment("학교에 갑니다", Language::ko, Granularity::Morpheme, &lex);
    EXPECT_EQ(seq.tokens, (Tokens{"학교", "에", "갑니다"}));
    EXPECT_EQ(seq.lang, Language::ko);
    EXPECT_EQ(seq.granularity, Granularity::Morpheme);
}

TEST(MorphemeLexicon, RejectsEmpty) {
    EXPECT_THROW(MorphemeLexicon("x", {}), InvalidDataset);
    EXPECT_THROW(MorphemeLexicon("x", {"a", ""}), InvalidDataset);
}

TEST(SegmentDispatch, ValidAndInvalidCombinations) {
    EXPECT_EQ(lrtc::segment::segment("ᠰᠤᠷᠭᠠᠨ ᠬᠦᠮᠦᠵᠢᠯ", Language::mn, Granularity::Word).tokens.size(), 2u);
    EXPECT_EQ(lrtc::segment::segment("ئالما بار", Language::ug, Granularity::Word).tokens.size(), 2u);
    EXPECT_EQ(lrtc::segment::segment("алма бар", Language::kk, Granularity::Word).tokens.size(), 2u);
    EXPECT_EQ(lrtc::segment::segment("བོད་ཡིག", Language::bo, Granularity::Syllable).tokens.size(), 2u);
    EXPECT_THROW(lrtc::segment::segment("x", Language::bo, Granularity::Morpheme), GranularityError);
    EXPECT_THROW(lrtc::segment::segment("x", Language::mn, Granularity::Syllable), GranularityError);
    EXPECT_THROW(lrtc::segment::segment("x", Language::ko, Granularity::Word), GranularityError);
    EXPECT_THROW(lrtc::segment::segment("x", Language::ko, Granularity::Morpheme), LexiconRequired);
    EXPECT_THROW(lrtc::segment::segment("x", Language::bo, Granularity::Word), LexiconRequired);
    MorphemeLexicon bo("bo", {"བོད་ཡིག་"});
    EXPECT_EQ(lrtc::segment::segment("བོད་ཡིག་ཀ", Language::bo, Granularity::Word, &bo).tokens, (Tokens{"བོད་ཡིག་", "ཀ"}));
}

TEST(SegmentProperties, FixedPointAndNoEmptyTokens) {
    const std::vector<std::string> pieces = {"a", "b", "ab", " ", "  ", "་", "།", "ཀ", "ཁ", "학", "교", "\t", "c"};
    MorphemeLexicon lex("p", {"ab", "학교", "ཀཁ", "bca"});
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        for (std::uint64_t i = 0, n = rng.uniform_int(20); i < n; ++i) text += pieces[rng.uniform_int(pieces.size())];
        struct Case {
            Language lang;
            Granularity g;
        };
        for (Case c : {Case{Language::mn, Granularity::Word}, Case{Language::bo, Granularity::Syllable},
                       Case{Language::bo, Granularity::Word}, Case{Language::ko, Granularity::Morpheme}}) {
            auto seq = lrtc::segment::segment(text, c.lang, c.g, &lex);
            for (const auto &t : seq.tokens) {
                ASSERT_FALSE(t.empty());
                for (char32_t cp : utf8::decode(t)) ASSERT_FALSE(utf8::is_whitespace(cp));
            }
            auto again = lrtc::segment::segment(join(seq.tokens, canonical_delimiter(c.lang, c.g)), c.lang, c.g, &lex);
            EXPECT_EQ(again.tokens, seq.tokens) << text;
        }
        // Longest match keeps every character and never produces more tokens than characters.
        auto lm = segment_longest_match(text, lex);
        std::string glued, nonspace;
        for (const auto &t : lm.tokens) glued += t;
        std::size_t chars = 0;
        for (char32_t cp : utf8::decode(text)) {
            if (!utf8::is_whitespace(cp)) {
                utf8::append(nonspace, cp);
                ++chars;
            }
        }
        EXPECT_EQ(glued, nonspace);
        EXPECT_LE(lm.tokens.size(), chars);
        bool any_multi = false;
        for (const auto &t : lm.tokens) any_multi = any_multi || utf8::decode(t).size() > 1;
        EXPECT_EQ(lm.tokens.size() == chars, !any_multi);
    }
}

TEST(Granularity, Parse) {
    EXPECT_EQ(parse_granularity("syllable"), Granularity::Syllable);
    EXPECT_THROW(parse_granularity("char"), GranularityError);
}
