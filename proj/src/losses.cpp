#include "r2m/losses.hpp"

#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

Graph::Node xe_loss(Graph& g, const std::vector<Graph::Node>& step_logits,
                    const std::vector<int>& targets) {
    if (step_logits.size() != targets.size()) {
        throw ContractError("xe_loss: " + std::to_string(step_logits.size()) +
                            " logit rows vs " + std::to_string(targets.size()) + " targets");
    }
    if (step_logits.empty()) throw ContractError("xe_loss: empty sequence");
    std::vector<Graph::Node> picked;
    picked.reserve(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        Graph::Node logp = g.log_softmax_rows(step_logits[t]);
        picked.push_back(g.pick(logp, 0, targets[t]));
    }
    Graph::Node stacked = picked.size() == 1 ? picked[0] : g.concat_cols(picked);
    return g.scale(g.mean_all(stacked), -1.0);
}

double xe_loss_value(const std::vector<Tensor>& step_logits, const std::vector<int>& targets) {
    Graph g;
    std::vector<Graph::Node> nodes;
    nodes.reserve(step_logits.size());
    for (const Tensor& t : step_logits) nodes.push_back(g.constant(t));
    return g.value(xe_loss(g, nodes, targets)).data[0];
}

Graph::Node rec_loss(Graph& g, Graph::Node a, Graph::Node b) {
    return g.sum_squares(g.sub(a, b));
}

double rec_loss_value(const Tensor& a, const Tensor& b) {
    Graph g;
    return g.value(rec_loss(g, g.constant(a), g.constant(b))).data[0];
}

double corpus_loss(double xe, double rec, double beta) { return xe + beta * rec; }

double image_loss(double triplet, double rec, double gamma) { return triplet + gamma * rec; }

Graph::Node similarity_matrix(Graph& g, Graph::Node features, Graph::Node proj,
                              const std::vector<Graph::Node>& recons, bool cosine) {
    if (recons.empty()) throw ContractError("similarity_matrix: empty batch");
    if (g.value(features).rows() != static_cast<int>(recons.size())) {
        throw DimensionError("similarity_matrix: " +
                             std::to_string(g.value(features).rows()) + " features vs " +
                             std::to_string(recons.size()) + " reconstructions");
    }
    Graph::Node projected = g.matmul(features, proj);  // B x d
    Graph::Node recon_matrix =
        recons.size() == 1 ? recons[0] : g.concat_rows(recons);  // B x d
    if (cosine) {
        projected = g.normalize_rows(projected, 1e-12);
        recon_matrix = g.normalize_rows(recon_matrix, 1e-12);
    }
    return g.matmul(projected, g.transpose(recon_matrix));  // B x B
}

Tensor similarity_matrix_value(const Tensor& features, const Tensor& recons,
                               const Tensor& proj, bool cosine) {
    Graph g;
    std::vector<Graph::Node> rows;
    for (int i = 0; i < recons.rows(); ++i) {
        std::vector<double> row(recons.data.begin() + static_cast<long>(i) * recons.cols(),
                                recons.data.begin() +
                                    static_cast<long>(i + 1) * recons.cols());
        rows.push_back(g.constant(Tensor::row(std::move(row))));
    }
    return g.value(
        similarity_matrix(g, g.constant(features), g.constant(proj), rows, cosine));
}

Graph::Node triplet_loss(Graph& g, Graph::Node similarities, double margin) {
    const Tensor S = g.value(similarities);  // copy: reads interleave with pushes
    const int batch = S.rows();
    if (S.rank() != 2 || S.cols() != batch) {
        throw DimensionError("triplet_loss: similarity matrix must be square, got " +
                             shape_str(S.shape));
    }
    if (batch < 2) {
        throw ContractError("triplet_loss: batch of " + std::to_string(batch) +
                            " has no negatives");
    }
    if (!S.all_finite()) throw NumericError("triplet_loss: non-finite similarities");
    if (margin < 0.0) throw ContractError("triplet_loss: margin must be non-negative");

    // Hardest negatives are picked by value; gradients flow through the
    // selected entries only.
    Graph::Node margin_node = g.scalar(margin);
    std::vector<Graph::Node> per_item;
    for (int i = 0; i < batch; ++i) {
        int hardest_image = -1;  // argmax over S[j][i], j != i
        int hardest_caption = -1;  // argmax over S[i][j], j != i
        for (int j = 0; j < batch; ++j) {
            if (j == i) continue;
            if (hardest_image < 0 || S.at(j, i) > S.at(hardest_image, i)) hardest_image = j;
            if (hardest_caption < 0 || S.at(i, j) > S.at(i, hardest_caption)) {
                hardest_caption = j;
            }
        }
        Graph::Node positive = g.pick(similarities, i, i);
        Graph::Node image_term =
            g.relu(g.add(g.sub(margin_node, positive), g.pick(similarities, hardest_image, i)));
        Graph::Node caption_term = g.relu(
            g.add(g.sub(margin_node, positive), g.pick(similarities, i, hardest_caption)));
        per_item.push_back(g.add(image_term, caption_term));
    }
    return g.mean_all(g.concat_cols(per_item));
}

double triplet_loss_value(const Tensor& similarities, double margin) {
    Graph g;
    return g.value(triplet_loss(g, g.constant(similarities), margin)).data[0];
}

} // namespace r2m
