#pragma once

#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"

namespace hetnet {

struct LocalResult {
    SectionPoint out;
    double flight_time = 0.0;
};

// Linearized passage near O: Sigma0In -> Sigma0Out.
LocalResult pi0(const SectionPoint& p, const ModelParams& params);
// Passage near C1: Sigma1In -> Sigma1Out.
LocalResult pi1(const SectionPoint& p, const ModelParams& params);
// Passage near C2: Sigma2In -> Sigma2Out.
LocalResult pi2(const SectionPoint& p, const ModelParams& params);

LocalResult pi_node(int node, const SectionPoint& p, const ModelParams& params);

// Algebraic inverse; q must be on the out-section of the node.
SectionPoint pi_inverse(int node, const SectionPoint& q, const ModelParams& params);

SectionId in_section(int node);
SectionId out_section(int node);

} // namespace hetnet
