#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 CSV: comma separated, double-quote escaping, "\n" rows.
namespace paran::csv {

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
};

// Throws ValidationError on unbalanced quotes or ragged rows.
Table parse(std::string_view text, const std::string& source = "<memory>");
Table read(const std::string& path);

}  // namespace paran::csv
