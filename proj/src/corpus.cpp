#include "paran/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "paran/error.hpp"
#include "paran/text.hpp"

namespace paran::corpus {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {"review_id",        "nickname",  "merchant_id",
                                          "merchant_address", "timestamp", "rating",
                                          "text"};

int parse_digits(const std::string& s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ValidationError("truncated timestamp: " + s);
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw ValidationError("bad timestamp: " + s);
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect_char(const std::string& s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) throw ValidationError("bad timestamp: " + s);
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing \"") + key + "\" field");
  if (!it->is_string()) throw ValidationError(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

Timestamp parse_timestamp(const std::string& iso) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SS
  const int y = parse_digits(iso, 0, 4);
  expect_char(iso, 4, '-');
  const int mo = parse_digits(iso, 5, 2);
  expect_char(iso, 7, '-');
  const int d = parse_digits(iso, 8, 2);
  if (iso.size() <= 10 || (iso[10] != 'T' && iso[10] != 't' && iso[10] != ' '))
    throw ValidationError("bad timestamp: " + iso);
  const int h = parse_digits(iso, 11, 2);
  expect_char(iso, 13, ':');
  const int mi = parse_digits(iso, 14, 2);
  expect_char(iso, 16, ':');
  const int sec = parse_digits(iso, 17, 2);
  std::size_t pos = 19;
  if (pos < iso.size() && iso[pos] == '.') {
    ++pos;
    const std::size_t frac_start = pos;
    while (pos < iso.size() && iso[pos] >= '0' && iso[pos] <= '9') ++pos;
    if (pos == frac_start) throw ValidationError("bad timestamp: " + iso);
  }
  int offset_minutes = 0;
  if (pos < iso.size() && (iso[pos] == 'Z' || iso[pos] == 'z')) {
    ++pos;
  } else if (pos < iso.size() && (iso[pos] == '+' || iso[pos] == '-')) {
    const int sign = iso[pos] == '-' ? -1 : 1;
    const int oh = parse_digits(iso, pos + 1, 2);
    expect_char(iso, pos + 3, ':');
    const int om = parse_digits(iso, pos + 4, 2);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw ValidationError("timestamp needs a UTC offset: " + iso);
  }
  if (pos != iso.size()) throw ValidationError("bad timestamp: " + iso);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw ValidationError("bad timestamp: " + iso);
  const Timestamp t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} -
                      minutes{offset_minutes};
  const int utc_y = utc_year(t);
  if (utc_y < 1970 || utc_y >= 2100) throw ValidationError("timestamp out of range: " + iso);
  return t;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int utc_year(Timestamp t) {
  using namespace std::chrono;
  return static_cast<int>(year_month_day{floor<days>(t)}.year());
}

ReviewerId ReviewerId::make(std::string_view nickname, std::string_view address) {
  return ReviewerId{text::trim(text::nfc(nickname)), text::trim(text::nfc(address))};
}

Review Review::from_raw(const RawReview& raw) {
  Review r;
  r.review_id = raw.review_id;
  r.reviewer = ReviewerId::make(raw.nickname, "");
  r.merchant_id = raw.merchant_id;
  r.merchant_address = raw.merchant_address;
  r.timestamp = parse_timestamp(raw.timestamp);
  r.rating = raw.rating;
  r.text = raw.text;
  r.word_count = text::count_words(text::nfc(raw.text));
  r.extra = raw.extra;
  return r;
}

RawReview Review::to_raw() const {
  RawReview raw;
  raw.review_id = review_id;
  raw.nickname = reviewer.nickname;
  raw.merchant_id = merchant_id;
  raw.merchant_address = merchant_address;
  raw.timestamp = format_timestamp(timestamp);
  raw.rating = rating;
  raw.text = text;
  raw.extra = extra;
  return raw;
}

void Corpus::sort() {
  std::stable_sort(reviews.begin(), reviews.end(), [](const Review& a, const Review& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.review_id < b.review_id;
  });
}

RawReview parse_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  RawReview raw;
  raw.review_id = required_string(j, "review_id");
  if (raw.review_id.empty()) throw ValidationError("empty review_id");
  raw.nickname = required_string(j, "nickname");
  raw.merchant_id = required_string(j, "merchant_id");
  raw.merchant_address = required_string(j, "merchant_address");
  raw.timestamp = required_string(j, "timestamp");
  raw.text = required_string(j, "text");
  if (auto it = j.find("rating"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ValidationError("\"rating\" must be an integer or null");
    const int v = it->get<int>();
    if (v < 1 || v > 5) throw ValidationError("\"rating\" must be in 1..5");
    raw.rating = v;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKnownKeys.count(it.key())) raw.extra[it.key()] = it.value();
  }
  return raw;
}

json to_json(const Review& r) {
  const RawReview raw = r.to_raw();
  json j = raw.extra.is_object() ? raw.extra : json::object();
  j["review_id"] = raw.review_id;
  j["nickname"] = raw.nickname;
  j["merchant_id"] = raw.merchant_id;
  j["merchant_address"] = raw.merchant_address;
  j["timestamp"] = raw.timestamp;
  j["rating"] = raw.rating ? json(*raw.rating) : json(nullptr);
  j["text"] = raw.text;
  return j;
}

Review review_from_json(const json& j) { return Review::from_raw(parse_line(j.dump())); }

Corpus parse_corpus(const std::string& jsonl, const std::string& source_name) {
  Corpus c;
  std::unordered_set<std::string> seen;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Review r = Review::from_raw(parse_line(line));
      if (!seen.insert(r.review_id).second)
        throw ValidationError("duplicate review_id \"" + r.review_id + "\"");
      c.reviews.push_back(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError(source_name + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.sort();
  c.provenance = "loaded from " + source_name;
  return c;
}

Corpus load_corpus(const std::string& path) { return parse_corpus(text::read_file(path), path); }

Corpus load_corpus(const std::vector<std::string>& paths) {
  Corpus merged;
  std::unordered_map<std::string, std::string> origin;
  std::string provenance;
  for (const auto& p : paths) {
    Corpus part = load_corpus(p);
    for (auto& r : part.reviews) {
      auto [it, inserted] = origin.emplace(r.review_id, p);
      if (!inserted)
        throw ValidationError("duplicate review_id \"" + r.review_id + "\" in " + p +
                              " (first seen in " + it->second + ")");
      merged.reviews.push_back(std::move(r));
    }
    if (!provenance.empty()) provenance += ", ";
    provenance += p;
  }
  merged.sort();
  merged.provenance = "loaded from " + provenance;
  return merged;
}

std::string serialize_corpus(const Corpus& c) {
  std::string out;
  for (const auto& r : c.reviews) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& c, const std::string& path) {
  text::write_file_atomic(path, serialize_corpus(c));
}

namespace {

Corpus with_reviews(const Corpus& src, std::vector<Review> reviews, const std::string& step) {
  Corpus out;
  out.reviews = std::move(reviews);
  out.provenance = src.provenance.empty() ? step : src.provenance + "; " + step;
  return out;
}

}  // namespace

Corpus filter_min_words(const Corpus& c, std::size_t min_words) {
  std::vector<Review> kept;
  std::copy_if(c.reviews.begin(), c.reviews.end(), std::back_inserter(kept),
               [&](const Review& r) { return r.word_count >= min_words; });
  return with_reviews(c, std::move(kept), "min_words>=" + std::to_string(min_words));
}

Corpus disambiguate_reviewers(const Corpus& c) {
  std::vector<Review> out = c.reviews;
  for (auto& r : out) r.reviewer = ReviewerId::make(r.reviewer.nickname, r.merchant_address);
  return with_reviews(c, std::move(out), "reviewer=nickname+merchant_address");
}

Corpus remove_outliers(const Corpus& c, std::size_t max_reviews_per_year) {
  std::map<std::pair<ReviewerId, int>, std::size_t> per_year;
  for (const auto& r : c.reviews) ++per_year[{r.reviewer, utc_year(r.timestamp)}];
  std::set<ReviewerId> outliers;
  for (const auto& [key, n] : per_year)
    if (n > max_reviews_per_year) outliers.insert(key.first);
  std::vector<Review> kept;
  std::copy_if(c.reviews.begin(), c.reviews.end(), std::back_inserter(kept),
               [&](const Review& r) { return !outliers.count(r.reviewer); });
  return with_reviews(c, std::move(kept),
                      "outliers(>" + std::to_string(max_reviews_per_year) +
                          " reviews per calendar year) removed");
}

Corpus kcore_filter(const Corpus& c, std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  const std::size_t n = c.reviews.size();

  // Reviewers are nodes [0, n_reviewers), merchants follow.
  std::map<ReviewerId, std::size_t> reviewer_index;
  std::unordered_map<std::string, std::size_t> merchant_index;
  for (const auto& r : c.reviews) reviewer_index.emplace(r.reviewer, reviewer_index.size());
  const std::size_t n_reviewers = reviewer_index.size();
  for (const auto& r : c.reviews)
    merchant_index.emplace(r.merchant_id, n_reviewers + merchant_index.size());
  const std::size_t n_nodes = n_reviewers + merchant_index.size();

  std::vector<std::pair<std::size_t, std::size_t>> ends(n);
  std::vector<std::vector<std::size_t>> incident(n_nodes);
  std::vector<std::size_t> degree(n_nodes, 0);
  for (std::size_t e = 0; e < n; ++e) {
    const auto u = reviewer_index.at(c.reviews[e].reviewer);
    const auto m = merchant_index.at(c.reviews[e].merchant_id);
    ends[e] = {u, m};
    incident[u].push_back(e);
    incident[m].push_back(e);
    ++degree[u];
    ++degree[m];
  }

  std::vector<bool> review_alive(n, true);
  std::vector<bool> node_removed(n_nodes, false);
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    if (degree[v] < k) {
      node_removed[v] = true;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : incident[v]) {
      if (!review_alive[e]) continue;
      review_alive[e] = false;
      const std::size_t other = ends[e].first == v ? ends[e].second : ends[e].first;
      --degree[v];
      --degree[other];
      if (!node_removed[other] && degree[other] < k) {
        node_removed[other] = true;
        queue.push_back(other);
      }
    }
  }

  std::vector<Review> kept;
  for (std::size_t e = 0; e < n; ++e)
    if (review_alive[e]) kept.push_back(c.reviews[e]);
  return with_reviews(c, std::move(kept), "kcore(k=" + std::to_string(k) + ")");
}

Corpus preprocess(const Corpus& c, const PreprocessOptions& opts, PreprocessReport* report) {
  Corpus step = filter_min_words(c, opts.min_words);
  if (report) {
    report->input = corpus_stats(c);
    report->after_min_words = corpus_stats(step);
  }
  step = disambiguate_reviewers(step);
  if (report) report->after_disambiguation = corpus_stats(step);
  step = remove_outliers(step, opts.max_reviews_per_year);
  if (report) report->after_outliers = corpus_stats(step);
  step = kcore_filter(step, opts.k);
  if (report) report->after_kcore = corpus_stats(step);
  return step;
}

CorpusStats corpus_stats(const Corpus& c) {
  std::set<ReviewerId> users;
  std::unordered_set<std::string> items;
  for (const auto& r : c.reviews) {
    users.insert(r.reviewer);
    items.insert(r.merchant_id);
  }
  return CorpusStats{users.size(), items.size(), c.reviews.size()};
}

namespace {

std::string with_thousands(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (i + 3 - lead) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

std::string format_stats_table(const CorpusStats& s, const std::string& dataset_name) {
  const std::string users = with_thousands(s.n_users);
  const std::string items = with_thousands(s.n_items);
  const std::string reviews = with_thousands(s.n_reviews);
  const std::size_t w0 = std::max<std::size_t>(7, dataset_name.size());
  const std::size_t w1 = std::max<std::size_t>(7, users.size());
  const std::size_t w2 = std::max<std::size_t>(7, items.size());
  const std::size_t w3 = std::max<std::size_t>(9, reviews.size());
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  std::ostringstream out;
  out << pad("Dataset", w0) << " | " << pad("# Users", w1) << " | " << pad("# Items", w2)
      << " | " << pad("# Reviews", w3) << '\n';
  out << std::string(w0, '-') << "-|-" << std::string(w1, '-') << "-|-" << std::string(w2, '-')
      << "-|-" << std::string(w3, '-') << '\n';
  out << pad(dataset_name, w0) << " | " << pad(users, w1) << " | " << pad(items, w2) << " | "
      << pad(reviews, w3) << '\n';
  return out.str();
}

}  // namespace paran::corpus
