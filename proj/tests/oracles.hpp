#pragma once

// Direct-formula reference implementations used only by tests. Nothing here
// calls into paran_core, so an agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::map<Tokens, int> grams(const Tokens& t, std::size_t n) {
  std::map<Tokens, int> m;
  if (t.size() < n) return m;
  for (std::size_t i = 0; i + n <= t.size(); ++i) m[Tokens(t.begin() + i, t.begin() + i + n)]++;
  return m;
}

inline int overlap(const std::map<Tokens, int>& a, const std::map<Tokens, int>& b) {
  int s = 0;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    if (it != b.end()) s += std::min(c, it->second);
  }
  return s;
}

inline double rouge2(const Tokens& c, const Tokens& r) {
  if (c.size() < 2 || r.size() < 2) return 0.0;
  double m = overlap(grams(c, 2), grams(r, 2));
  if (m == 0) return 0.0;
  double p = m / double(c.size() - 1), q = m / double(r.size() - 1);
  return 2 * p * q / (p + q);
}

inline double bleu(const Tokens& c, const Tokens& r) {
  if (c.empty()) return 0.0;
  double prod = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double num = overlap(grams(c, n), grams(r, n));
    double den = c.size() >= n ? double(c.size() - n + 1) : 0.0;
    if (n == 1 && num == 0) return 0.0;
    double p = (n >= 2 && num == 0) ? (num + 1) / (den + 1) : num / den;
    prod *= std::pow(p, 0.25);
  }
  double bp = c.size() >= r.size() ? 1.0 : std::exp(1.0 - double(r.size()) / double(c.size()));
  return bp * prod;
}

// Stems for the small vocabulary the randomized METEOR checks draw from.
inline std::string stem(const std::string& w) {
  static const std::map<std::string, std::string> table = {
      {"runs", "run"},     {"running", "run"}, {"run", "run"},     {"eats", "eat"},
      {"eating", "eat"},   {"eat", "eat"},     {"foods", "food"},  {"food", "food"},
      {"cats", "cat"},     {"cat", "cat"},     {"tasty", "tasti"}, {"the", "the"},
      {"a", "a"},          {"good", "good"},   {"pizza", "pizza"}, {"served", "serv"},
      {"serves", "serv"},  {"serve", "serv"}};
  auto it = table.find(w);
  return it == table.end() ? w : it->second;
}

inline double meteor(const Tokens& c, const Tokens& r) {
  std::vector<int> align(c.size(), -1);
  std::vector<bool> used(r.size(), false);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (align[i] >= 0) continue;
      for (std::size_t j = 0; j < r.size(); ++j) {
        bool eq = pass == 0 ? c[i] == r[j] : stem(c[i]) == stem(r[j]);
        if (!used[j] && eq) {
          used[j] = true;
          align[i] = int(j);
          break;
        }
      }
    }
  }
  int m = 0, chunks = 0, prev = -10;
  bool in_run = false;
  for (int j : align) {
    if (j < 0) {
      in_run = false;
      continue;
    }
    ++m;
    if (!in_run || j != prev + 1) ++chunks;
    in_run = true;
    prev = j;
  }
  if (m == 0) return 0.0;
  double p = double(m) / c.size(), q = double(m) / r.size();
  double f = p * q / (0.9 * p + 0.1 * q);
  return f * (1.0 - 0.5 * std::pow(double(chunks) / m, 3.0));
}

inline double distinct2(const std::vector<Tokens>& rs) {
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t n = 0;
  for (const auto& r : rs) {
    n += r.size();
    for (std::size_t i = 1; i < r.size(); ++i) seen.insert({r[i - 1], r[i]});
  }
  return n == 0 ? 0.0 : double(seen.size()) / double(n);
}

// Greedy BERTScore over explicit vectors (normalized here).
inline double bertscore(std::vector<std::vector<double>> c, std::vector<std::vector<double>> r) {
  auto unit = [](std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
  };
  for (auto& v : c) unit(v);
  for (auto& v : r) unit(v);
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) d += a[k] * b[k];
    return std::max(-1.0, std::min(1.0, d));
  };
  double p = 0, q = 0;
  for (const auto& a : c) {
    double best = -2;
    for (const auto& b : r) best = std::max(best, cos(a, b));
    p += best;
  }
  for (const auto& b : r) {
    double best = -2;
    for (const auto& a : c) best = std::max(best, cos(a, b));
    q += best;
  }
  p /= c.size();
  q /= r.size();
  if (p * q < 0 || p + q == 0) return 0.0;
  return 2 * p * q / (p + q);
}

// k-core by repeated full deletion passes until nothing changes. Edges are
// (user, item) with multiplicity; returns the indices of surviving edges.
inline std::vector<std::size_t> kcore(const std::vector<std::pair<int, int>>& edges, int k) {
  std::vector<bool> alive(edges.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    std::map<int, int> du, di;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (alive[e]) {
        du[edges[e].first]++;
        di[edges[e].second]++;
      }
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (alive[e] && (du[edges[e].first] < k || di[edges[e].second] < k)) {
        alive[e] = false;
        changed = true;
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (alive[e]) out.push_back(e);
  return out;
}

inline double delta_pct(double treated, double baseline) {
  return (treated - baseline) / baseline * 100.0;
}

}  // namespace oracle
