#include "paran/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "paran/error.hpp"

namespace paran::text {

namespace {

// Decodes UTF-8 leniently; malformed bytes become U+FFFD.
template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c < 0) c = 0xFFFD;
    fn(c, s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

}  // namespace

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  if (norm->isNormalized(src, status) && U_SUCCESS(status)) return std::string(utf8);
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string to_lower(std::string_view utf8) {
  auto s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s.toLower(icu::Locale::getRoot());
  std::string result;
  s.toUTF8String(result);
  return result;
}

std::string trim(std::string_view utf8) {
  std::size_t first = std::string_view::npos;
  std::size_t last_end = 0;
  std::size_t offset = 0;
  for_each_code_point(utf8, [&](UChar32 c, std::string_view cp) {
    if (!is_space(c)) {
      if (first == std::string_view::npos) first = offset;
      last_end = offset + cp.size();
    }
    offset += cp.size();
  });
  if (first == std::string_view::npos) return {};
  return std::string(utf8.substr(first, last_end - first));
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::string current;
  for_each_code_point(utf8, [&](UChar32 c, std::string_view cp) {
    if (is_space(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(cp);
    }
  });
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t count_words(std::string_view utf8) {
  std::size_t n = 0;
  bool in_word = false;
  for_each_code_point(utf8, [&](UChar32 c, std::string_view) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  });
  return n;
}

std::vector<std::string> code_points(std::string_view utf8) {
  std::vector<std::string> out;
  for_each_code_point(utf8, [&](UChar32 c, std::string_view cp) {
    out.emplace_back(c == 0xFFFD && cp != "\xEF\xBF\xBD" ? "\xEF\xBF\xBD" : std::string(cp));
  });
  return out;
}

bool is_whitespace(std::string_view code_point) {
  bool all = !code_point.empty();
  for_each_code_point(code_point, [&](UChar32 c, std::string_view) { all = all && is_space(c); });
  return all;
}

bool is_latin_ascii_word(std::string_view utf8) {
  bool ok = true;
  for_each_code_point(utf8, [&](UChar32 c, std::string_view) {
    if (c >= 0x80 && u_isalpha(c)) ok = false;
  });
  return ok;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  std::ostringstream tmp_name;
  tmp_name << path << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const std::string tmp = tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed: " + path);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move into place: " + path);
  }
}

}  // namespace paran::text
