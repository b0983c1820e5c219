#pragma once

#include <span>

#include "paran/corpus.hpp"
#include "paran/generator.hpp"
#include "paran/metrics.hpp"

namespace paran::metrics {

struct ArmEvaluation {
  MetricScores scores;  // macro-averaged over pairs
  ArmDiversity diversity;  // pooled over all responses
  std::size_t n = 0;
};

// The reference for every response is its original review. `references`
// must hold exactly one review per response, matched by review_id.
// METEOR always runs on whitespace tokens; the other metrics use `mode`.
// Pairs are summed in review_id order so the result does not depend on
// input order.
ArmEvaluation evaluate_arm(std::span<const generator::GeneratedResponse> responses,
                           std::span<const corpus::Review> references, EmbeddingProvider& emb,
                           TokenMode mode = TokenMode::whitespace);

}  // namespace paran::metrics
