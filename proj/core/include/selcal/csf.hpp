#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selcal/types.hpp"

namespace selcal {

// Confidence score functions over a predicted probability vector.
// NegLossOracle scores by the negated per-sample loss instead; it is the
// "knows the loss" reference point for selective-risk bounds.
enum class CsfKind { MSP, SoftmaxMargin, NegativeEntropy, NegLossOracle };

// Accepts the CLI spellings msp | margin | negentropy.
CsfKind parse_csf(const std::string& name);
std::string csf_name(CsfKind kind);

double csf_score(CsfKind kind, std::span<const double> p,
                 std::optional<double> loss_opt = std::nullopt);

// d(score)/dp. MSP uses the argmax-indicator subgradient at ties;
// NegLossOracle has no probability gradient here and is rejected.
std::vector<double> csf_gradient(CsfKind kind, std::span<const double> p);

// Whole-batch scores; per_sample_loss is required for NegLossOracle.
std::vector<double> csf_scores(CsfKind kind, const ProbBatch& p,
                               std::span<const double> per_sample_loss = {});

}  // namespace selcal
