#include "paran/evaluation.hpp"

#include <algorithm>
#include <map>

#include "paran/error.hpp"

namespace paran::metrics {

ArmEvaluation evaluate_arm(std::span<const generator::GeneratedResponse> responses,
                           std::span<const corpus::Review> references, EmbeddingProvider& emb,
                           TokenMode mode) {
  if (responses.empty()) throw ValidationError("evaluate_arm: no responses");
  if (responses.size() != references.size())
    throw ValidationError("evaluate_arm: " + std::to_string(responses.size()) + " responses but " +
                          std::to_string(references.size()) + " references");

  std::map<std::string, const corpus::Review*> by_id;
  for (const auto& r : references)
    if (!by_id.emplace(r.review_id, &r).second)
      throw ValidationError("evaluate_arm: duplicate reference " + r.review_id);

  std::map<std::string, const generator::GeneratedResponse*> ordered;
  for (const auto& resp : responses) {
    const std::string& id = resp.request.review.review_id;
    if (!by_id.count(id)) throw ValidationError("evaluate_arm: no reference for response " + id);
    if (!ordered.emplace(id, &resp).second)
      throw ValidationError("evaluate_arm: duplicate response for review " + id);
  }

  ArmEvaluation out;
  std::vector<TokenSequence> candidates;
  candidates.reserve(ordered.size());
  for (const auto& [id, resp] : ordered) {
    const corpus::Review& ref_review = *by_id.at(id);
    TokenSequence cand = tokenize(resp->text, mode);
    const TokenSequence ref = tokenize(ref_review.text, mode);
    out.scores.rouge2_f += rouge2(cand, ref);
    out.scores.bleu += bleu(cand, ref);
    out.scores.meteor += mode == TokenMode::whitespace
                             ? meteor(cand, ref)
                             : meteor(tokenize(resp->text), tokenize(ref_review.text));
    // An empty side has nothing to match; it scores 0 rather than failing the arm.
    if (!cand.empty() && !ref.empty()) out.scores.bertscore_f1 += bertscore_f1(cand, ref, emb);
    candidates.push_back(std::move(cand));
  }
  const double n = static_cast<double>(ordered.size());
  out.scores.rouge2_f /= n;
  out.scores.bleu /= n;
  out.scores.meteor /= n;
  out.scores.bertscore_f1 /= n;
  out.diversity = distinct2(candidates);
  out.n = ordered.size();
  return out;
}

}  // namespace paran::metrics
