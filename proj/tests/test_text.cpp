#include <gtest/gtest.h>

#include <filesystem>

#include "paran/error.hpp"
#include "paran/hash.hpp"
#include "paran/text.hpp"

namespace fs = std::filesystem;
using namespace paran;

TEST(Text, NfcComposesDecomposedHangulAndLatin) {
  // "e" + combining acute, and conjoining jamo for "한".
  EXPECT_EQ(text::nfc("e\xCC\x81"), "\xC3\xA9");
  EXPECT_EQ(text::nfc("\xE1\x84\x92\xE1\x85\xA1\xE1\x86\xAB"), "\xED\x95\x9C");
}

TEST(Text, LowercaseIsLocaleIndependent) {
  EXPECT_EQ(text::to_lower("GREAT Pizza"), "great pizza");
  EXPECT_EQ(text::to_lower("ÉCLAIR"), "éclair");
  EXPECT_EQ(text::to_lower("맛있어요"), "맛있어요");
}

TEST(Text, UnicodeWhitespaceSplitting) {
  // ideographic space U+3000 and no-break space U+00A0
  auto parts = text::split_whitespace("one\xE3\x80\x80two\xC2\xA0three \n four");
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[1], "two");
  EXPECT_EQ(text::count_words("  "), 0u);
  EXPECT_EQ(text::count_words("정말 맛있어요 최고"), 3u);
  EXPECT_EQ(text::trim("\xE3\x80\x80 x y \t"), "x y");
}

TEST(Text, CodePointsAndMalformedInput) {
  auto cps = text::code_points("a한b");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], "한");
  auto bad = text::code_points(std::string("a\xFF") + "b");
  ASSERT_EQ(bad.size(), 3u);
  EXPECT_EQ(bad[1], "\xEF\xBF\xBD");
}

TEST(Text, LatinWordDetection) {
  EXPECT_TRUE(text::is_latin_ascii_word("pizza!"));
  EXPECT_FALSE(text::is_latin_ascii_word("피자"));
  EXPECT_FALSE(text::is_latin_ascii_word("café"));
}

TEST(Text, AtomicWriteAndRead) {
  auto dir = fs::temp_directory_path() / "paran_text_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = (dir / "a.txt").string();
  text::write_file_atomic(p, "hello\n");
  text::write_file_atomic(p, "bye\n");
  EXPECT_EQ(text::read_file(p), "bye\n");
  int files = 0;
  for ([[maybe_unused]] auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
  EXPECT_THROW(text::read_file((dir / "missing").string()), IoError);
  fs::remove_all(dir);
}

TEST(Hash, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_prefix64("abc"), 0xba7816bf8f01cfeaULL);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
