#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Unicode helpers over UTF-8 strings, backed by ICU.
namespace paran::text {

std::string nfc(std::string_view utf8);

// Full Unicode lowercase mapping under the root locale.
std::string to_lower(std::string_view utf8);

// Trims leading and trailing Unicode whitespace.
std::string trim(std::string_view utf8);

// Maximal runs of non-whitespace code points.
std::vector<std::string> split_whitespace(std::string_view utf8);

std::size_t count_words(std::string_view utf8);

// One string per code point.
std::vector<std::string> code_points(std::string_view utf8);

bool is_whitespace(std::string_view code_point);

// True when every letter in the string is an ASCII letter.
bool is_latin_ascii_word(std::string_view utf8);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace paran::text
