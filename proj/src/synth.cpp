#include <array>
#include <random>
#include <string_view>

#include "paran/corpus.hpp"
#include "paran/error.hpp"

namespace paran::corpus {

namespace {

struct FactorSentences {
  std::string_view positive;
  std::string_view negative;
};

// One line per explicit-persona factor, in factor order.
constexpr std::array<FactorSentences, 15> kFactorBank = {{
    {"The taste was amazing and the sauce was so delicious",
     "The food was bland and the taste was off"},
    {"The portion was huge for one person", "The portion was way too small for the price"},
    {"The vegetables were fresh and crisp", "The fish did not seem fresh at all"},
    {"There are so many menu options to choose from", "The menu has very few options lately"},
    {"Great value for the price", "A bit too expensive for what you get"},
    {"The service was quick to fix a missing side dish",
     "The service was disappointing when I called about my order"},
    {"Delivery was fast and the food arrived hot",
     "Delivery took over an hour and the food arrived cold"},
    {"I trust this place to get my order right every time",
     "Hard to trust them after the order was wrong twice"},
    {"The owner was very friendly and even added a handwritten note",
     "The rider was rude and not friendly at all"},
    {"I ordered because other reviews praised it", "The reviews made it sound much better than it is"},
    {"Honestly it deserves five stars", "Giving two stars this time"},
    {"The packaging was clean and neatly sealed", "The container was dirty and the lid was sticky"},
    {"This is my go-to place and I order every week", "I used to order every week but not anymore"},
    {"We shared it with friends during a game night",
     "Ordered it for a family dinner and everyone was let down"},
    {"Perfect comfort food on a rainy day", "Ordered it for my birthday and it spoiled the evening"},
}};

constexpr std::array<std::string_view, 6> kShortReviews = {
    "Good", "Tasty!", "Will order again", "Not bad at all", "So good, thanks!", "Fast and hot",
};

constexpr std::array<std::string_view, 8> kOpeners = {
    "",
    "As a college student on a tight budget, I have to say this.",
    "My husband and I ordered together tonight.",
    "My wife picked this place for us.",
    "After a long shift at the office I wanted something warm.",
    "Ordered this for the kids after soccer practice.",
    "Been ordering here since retirement.",
    "",
};

constexpr std::array<std::string_view, 5> kClosers = {"", "!!", " ^^", " lol", "."};

constexpr std::array<std::string_view, 16> kNicknames = {
    "foodie",      "hungrybear", "spicylover", "nightowl",   "ramenking",  "sweettooth",
    "lunchbox",    "kimchi_fan", "midnightsnack", "chickenjoy", "rainyday", "soupqueen",
    "busyworker",  "dumpling",   "tteokbokki",  "cozyhome",
};

constexpr std::array<std::string_view, 12> kDistricts = {
    "Seoul Mapo-gu",     "Seoul Gangnam-gu",    "Seoul Jongno-gu",   "Seoul Songpa-gu",
    "Busan Haeundae-gu", "Incheon Yeonsu-gu",   "Seoul Yongsan-gu",  "Seoul Seocho-gu",
    "Daegu Suseong-gu",  "Seongnam Bundang-gu", "Seoul Gwanak-gu",   "Suwon Yeongtong-gu",
};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  // Portable across standard libraries, unlike std::uniform_int_distribution.
  std::size_t below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(rng_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 rng_;
};

std::string padded(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width)
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

std::string district_name(std::size_t d) {
  std::string name(kDistricts[d % kDistricts.size()]);
  if (d >= kDistricts.size()) name += " " + std::to_string(d / kDistricts.size() + 1);
  return name;
}

std::string nickname_for(std::size_t i) {
  std::string name(kNicknames[i % kNicknames.size()]);
  if (i >= kNicknames.size()) name += std::to_string(i / kNicknames.size());
  return name;
}

}  // namespace

Corpus synth_corpus(std::uint64_t seed, std::size_t n_users, std::size_t n_merchants,
                    std::size_t n_reviews) {
  if (n_users == 0 || n_merchants == 0 || n_reviews == 0)
    throw ValidationError("synth_corpus: counts must be >= 1");
  Draw draw(seed);

  const std::size_t n_districts = n_merchants == 1 ? 1 : std::max<std::size_t>(2, (n_merchants + 1) / 2);
  std::vector<std::vector<std::size_t>> merchants_in(n_districts);
  for (std::size_t m = 0; m < n_merchants; ++m) merchants_in[m % n_districts].push_back(m);

  // A nickname pool smaller than the user count forces collisions; user 1
  // always shares user 0's nickname but lives in another district.
  const std::size_t pool = std::max<std::size_t>(1, (n_users * 2 + 2) / 3);
  std::vector<std::string> nickname(n_users);
  std::vector<std::size_t> home(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    nickname[u] = nickname_for(draw.below(pool));
    home[u] = draw.below(n_districts);
  }
  if (n_users >= 2) {
    nickname[1] = nickname[0];
    home[1] = (home[0] + 1) % n_districts;
  }

  // 2024-04-01T00:00:00Z, spread over 365 days.
  using namespace std::chrono;
  const Timestamp start = sys_days{year{2024} / April / 1};
  constexpr std::size_t kYearSeconds = 365ULL * 24 * 3600;

  Corpus c;
  c.reviews.reserve(n_reviews);
  for (std::size_t i = 0; i < n_reviews; ++i) {
    const std::size_t u = i < n_users ? i : draw.below(n_users);
    const auto& local = merchants_in[home[u]];
    const bool stay_local = i < n_users || draw.chance(85);
    const std::size_t m = stay_local ? local[draw.below(local.size())] : draw.below(n_merchants);

    const bool positive = draw.chance(70);
    std::string body;
    if (draw.chance(12)) {
      body = kShortReviews[draw.below(kShortReviews.size())];
    } else {
      body = kOpeners[draw.below(kOpeners.size())];
      const std::size_t n_sentences = 1 + draw.below(3);
      std::size_t factor = draw.below(kFactorBank.size());
      for (std::size_t s = 0; s < n_sentences; ++s) {
        const bool pos = s == 0 ? positive : draw.chance(positive ? 80 : 30);
        const auto& bank = kFactorBank[factor];
        if (!body.empty()) body += ' ';
        body += pos ? bank.positive : bank.negative;
        body += '.';
        factor = (factor + 1 + draw.below(kFactorBank.size() - 1)) % kFactorBank.size();
      }
      const auto closer = kClosers[draw.below(kClosers.size())];
      if (closer == ".") {
        // already terminated
      } else if (!closer.empty()) {
        body.pop_back();
        body += closer;
      }
    }

    RawReview raw;
    raw.review_id = padded('r', i, 6);
    raw.nickname = nickname[u];
    raw.merchant_id = padded('m', m, 4);
    raw.merchant_address = district_name(m % n_districts);
    raw.timestamp = format_timestamp(start + seconds{draw.below(kYearSeconds)});
    if (!draw.chance(10)) {
      const int base = positive ? 4 : 2;
      raw.rating = base + static_cast<int>(draw.below(2));
    }
    raw.text = std::move(body);
    c.reviews.push_back(Review::from_raw(raw));
  }
  c.sort();
  c.provenance = "synthetic(seed=" + std::to_string(seed) + ", users=" + std::to_string(n_users) +
                 ", merchants=" + std::to_string(n_merchants) +
                 ", reviews=" + std::to_string(n_reviews) + ")";
  return c;
}

}  // namespace paran::corpus
