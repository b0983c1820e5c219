#pragma once

#include <string>
#include <string_view>

namespace paran::metrics {

// Porter (1980) suffix-stripping stemmer for lowercase English words.
// Words of length <= 2 and words containing non-ASCII bytes are returned
// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace paran::metrics
