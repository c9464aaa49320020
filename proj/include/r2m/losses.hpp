#pragma once

#include "r2m/graph.hpp"

namespace r2m {

// Mean over steps of -log softmax(logits)[target].
Graph::Node xe_loss(Graph& g, const std::vector<Graph::Node>& step_logits,
                    const std::vector<int>& targets);
double xe_loss_value(const std::vector<Tensor>& step_logits, const std::vector<int>& targets);

// Squared L2 distance between two equally shaped rows.
Graph::Node rec_loss(Graph& g, Graph::Node a, Graph::Node b);
double rec_loss_value(const Tensor& a, const Tensor& b);

// Full text-corpus objective: xe + beta * rec.
double corpus_loss(double xe, double rec, double beta);

// Full image objective: triplet + gamma * rec.
double image_loss(double triplet, double rec, double gamma);

// S[i][j] = <proj(feature_i), recon_j>. features: B x feature_dim (constant),
// proj: feature_dim x d, recons: one 1 x d row per batch item. With cosine
// enabled both sides are L2-normalized first.
Graph::Node similarity_matrix(Graph& g, Graph::Node features, Graph::Node proj,
                              const std::vector<Graph::Node>& recons, bool cosine);
Tensor similarity_matrix_value(const Tensor& features, const Tensor& recons,
                               const Tensor& proj, bool cosine);

// Hinge triplet ranking loss with in-batch hardest negatives, mean over the
// batch. For each anchor i the hardest negative image maximizes S[j][i] and
// the hardest negative caption maximizes S[i][j] over j != i (ties to the
// smaller index). Requires batch size >= 2.
Graph::Node triplet_loss(Graph& g, Graph::Node similarities, double margin);
double triplet_loss_value(const Tensor& similarities, double margin);

} // namespace r2m
