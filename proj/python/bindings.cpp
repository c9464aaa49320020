// Python bindings over the core library: model construction, the main
// forward/decode operations, losses, metrics, and the training harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "r2m/errors.hpp"
#include "r2m/harness.hpp"
#include "r2m/losses.hpp"

namespace py = pybind11;
using namespace r2m;

namespace {

Tensor tensor_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ContractError("tensor: no rows");
    const int cols = static_cast<int>(rows[0].size());
    Tensor t = Tensor::zeros({static_cast<int>(rows.size()), cols});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != cols) {
            throw DimensionError("tensor: ragged rows");
        }
        for (int j = 0; j < cols; ++j) t.at(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    return t;
}

std::vector<std::vector<double>> tensor_to_rows(const Tensor& t) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < t.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(t.cols()));
        for (int j = 0; j < t.cols(); ++j) row[static_cast<std::size_t>(j)] = t.at(i, j);
        rows.push_back(std::move(row));
    }
    return rows;
}

ConceptSet concepts_from_pairs(const std::vector<std::pair<int, double>>& items) {
    ConceptSet set;
    for (const auto& [id, score] : items) set.add(id, score);
    return set;
}

} // namespace

PYBIND11_MODULE(_r2m, m) {
    m.doc() = "recurrent relational memory concepts-to-sentence model";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("dim", &ModelConfig::dim)
        .def_readwrite("heads", &ModelConfig::heads)
        .def_readwrite("fm_key_dim", &ModelConfig::fm_key_dim)
        .def_readwrite("fm_value_dim", &ModelConfig::fm_value_dim)
        .def_readwrite("rm_key_dim", &ModelConfig::rm_key_dim)
        .def_readwrite("rm_value_dim", &ModelConfig::rm_value_dim)
        .def_readwrite("memory_rows", &ModelConfig::memory_rows)
        .def_readwrite("vocab", &ModelConfig::vocab)
        .def_readwrite("feature_dim", &ModelConfig::feature_dim)
        .def_readwrite("fm_scale", &ModelConfig::fm_scale)
        .def_readwrite("rm_scale", &ModelConfig::rm_scale)
        .def_readwrite("ln_eps", &ModelConfig::ln_eps)
        .def_readwrite("shared_embeddings", &ModelConfig::shared_embeddings)
        .def_readwrite("head_bias", &ModelConfig::head_bias)
        .def_readwrite("cosine_similarity", &ModelConfig::cosine_similarity);

    py::class_<Model>(m, "Model")
        .def(py::init<const ModelConfig&, std::uint64_t>(), py::arg("config"),
             py::arg("seed"))
        .def_property_readonly("config", &Model::config)
        .def("parameter_names", [](Model& self) {
            std::vector<std::string> names;
            for (Parameter* p : self.parameters()) names.push_back(p->name);
            return names;
        })
        .def("encode_concepts",
             [](Model& self, const std::vector<std::pair<int, double>>& concepts,
                std::uint64_t order_seed) {
                 ConceptSet set = concepts_from_pairs(concepts);
                 return encode_concepts_value(set, self.encoder_embedding(),
                                              self.encoder_lstm(), order_seed)
                     .data;
             },
             py::arg("concepts"), py::arg("order_seed") = 0)
        .def("greedy_decode",
             [](Model& self, const std::vector<double>& v, int max_len) {
                 const GreedyResult r =
                     decode_greedy_value(self, Tensor::row(v), max_len);
                 double log_prob = 0.0;
                 for (const DecodeStep& s : r.trace.steps) {
                     Graph g;
                     const Tensor lsm =
                         g.value(g.log_softmax_rows(g.constant(s.logits)));
                     log_prob += lsm.data[static_cast<std::size_t>(s.token)];
                 }
                 return py::make_tuple(r.caption, log_prob);
             },
             py::arg("v"), py::arg("max_len") = 16)
        .def("beam_decode",
             [](Model& self, const std::vector<double>& v, int width, int max_len) {
                 const BeamResult r = beam_search(self, Tensor::row(v), width, max_len);
                 return py::make_tuple(r.caption, r.log_prob);
             },
             py::arg("v"), py::arg("width") = 3, py::arg("max_len") = 16)
        .def("teacher_forced_xe",
             [](Model& self, const std::vector<double>& v, const std::vector<int>& targets) {
                 Graph g;
                 BoundModel bm = bind_model(g, self);
                 DecodeNodes nodes = decode_teacher_forced(
                     g, bm, self, g.constant(Tensor::row(v)), targets);
                 return g.value(xe_loss(g, nodes.logits, targets)).data[0];
             },
             py::arg("v"), py::arg("targets"))
        .def("fm_attention",
             [](Model& self, const std::vector<double>& v, const std::vector<double>& w) {
                 const FmResult r =
                     fm_forward_value(Tensor::row(v), Tensor::row(w), self.fusion());
                 std::vector<std::vector<std::vector<double>>> att;
                 for (const Tensor& a : r.attention) att.push_back(tensor_to_rows(a));
                 return py::make_tuple(r.fused.data, att);
             },
             py::arg("v"), py::arg("w_prev"));

    m.def("softmax_rows", [](const std::vector<std::vector<double>>& rows) {
        Graph g;
        return tensor_to_rows(g.value(g.softmax_rows(g.constant(tensor_from_rows(rows)))));
    });

    m.def(
        "xe_loss",
        [](const std::vector<std::vector<double>>& logits, const std::vector<int>& targets) {
            std::vector<Tensor> rows;
            for (const auto& r : logits) rows.push_back(Tensor::row(r));
            return xe_loss_value(rows, targets);
        },
        py::arg("logits"), py::arg("targets"));

    m.def(
        "rec_loss",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return rec_loss_value(Tensor::row(a), Tensor::row(b));
        },
        py::arg("v"), py::arg("v_rebuilt"));

    m.def("corpus_loss", &corpus_loss, py::arg("xe"), py::arg("rec"), py::arg("beta"));
    m.def("image_loss", &image_loss, py::arg("triplet"), py::arg("rec"), py::arg("gamma"));

    m.def(
        "triplet_loss",
        [](const std::vector<std::vector<double>>& similarities, double margin) {
            return triplet_loss_value(tensor_from_rows(similarities), margin);
        },
        py::arg("similarities"), py::arg("margin") = 0.2);

    m.def(
        "similarity_matrix",
        [](const std::vector<std::vector<double>>& features,
           const std::vector<std::vector<double>>& recons,
           const std::vector<std::vector<double>>& proj, bool cosine) {
            return tensor_to_rows(similarity_matrix_value(tensor_from_rows(features),
                                                          tensor_from_rows(recons),
                                                          tensor_from_rows(proj), cosine));
        },
        py::arg("features"), py::arg("recons"), py::arg("proj"), py::arg("cosine") = false);

    m.def("bleu_n", &bleu_n, py::arg("candidates"), py::arg("references"), py::arg("n"));
    m.def("concept_recall", &concept_recall, py::arg("captions"), py::arg("concept_sets"));

    m.def(
        "gradcheck",
        [](std::uint64_t seed) {
            ModelConfig cfg;
            cfg.dim = 8;
            cfg.heads = 2;
            cfg.fm_key_dim = 4;
            cfg.fm_value_dim = 4;
            cfg.rm_key_dim = 4;
            cfg.rm_value_dim = 4;
            cfg.vocab = 20;
            cfg.feature_dim = 8;
            const GradCheckReport report = gradcheck_model(cfg, 1.0, 1.0, 0.2, seed);
            py::dict out;
            out["usable"] = report.usable;
            out["max_rel_error"] = report.max_rel_error;
            py::dict per_param;
            for (const GradCheckEntry& e : report.entries) {
                per_param[py::str(e.param)] = e.max_rel_error;
            }
            out["per_parameter"] = per_param;
            return out;
        },
        py::arg("seed") = 0);

    m.def(
        "synth_dataset_files",
        [](const std::string& out_dir, std::uint64_t seed, int n_corpus, int n_images,
           int feature_dim, double noise_sigma) {
            SynthOptions opt;
            opt.n_corpus = n_corpus;
            opt.n_images = n_images;
            opt.feature_dim = feature_dim;
            opt.noise_sigma = noise_sigma;
            save_dataset(synth_dataset(default_grammar(), opt, seed), out_dir);
        },
        py::arg("out_dir"), py::arg("seed") = 0, py::arg("n_corpus") = 200,
        py::arg("n_images") = 50, py::arg("feature_dim") = 16,
        py::arg("noise_sigma") = 0.05);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("bleu1", &EvalReport::bleu1)
        .def_readonly("bleu2", &EvalReport::bleu2)
        .def_readonly("bleu3", &EvalReport::bleu3)
        .def_readonly("bleu4", &EvalReport::bleu4)
        .def_readonly("concept_recall", &EvalReport::concept_recall)
        .def_readonly("captions", &EvalReport::captions);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("model", &TrainConfig::model)
        .def_readwrite("margin", &TrainConfig::margin)
        .def_readwrite("beta", &TrainConfig::beta)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("lr_corpus", &TrainConfig::lr_corpus)
        .def_readwrite("lr_image", &TrainConfig::lr_image)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs_stage1", &TrainConfig::epochs_stage1)
        .def_readwrite("epochs_stage2", &TrainConfig::epochs_stage2)
        .def_readwrite("epochs_stage3", &TrainConfig::epochs_stage3)
        .def_readwrite("epochs_stage4", &TrainConfig::epochs_stage4)
        .def_readwrite("beam_width", &TrainConfig::beam_width)
        .def_readwrite("max_len", &TrainConfig::max_len)
        .def_readwrite("concept_threshold", &TrainConfig::concept_threshold)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("data_dir", &TrainConfig::data_dir)
        .def_readwrite("out_dir", &TrainConfig::out_dir);

    py::class_<StageResult>(m, "StageResult")
        .def_readonly("stage", &StageResult::stage)
        .def_readonly("epoch_losses", &StageResult::epoch_losses)
        .def_readonly("batch_losses", &StageResult::batch_losses);

    py::class_<Trainer>(m, "Trainer")
        .def(py::init([](const TrainConfig& cfg, const std::string& data_dir) {
                 TrainConfig local = cfg;
                 if (!data_dir.empty()) local.data_dir = data_dir;
                 return std::make_unique<Trainer>(local, load_dataset(local.data_dir));
             }),
             py::arg("config"), py::arg("data_dir") = "")
        .def("run_stage", &Trainer::run_stage, py::arg("stage"),
             py::arg("allow_out_of_order") = false)
        .def("completed_stage", &Trainer::completed_stage)
        .def("evaluate",
             [](Trainer& self, const std::string& split, int beam_width) {
                 const Dataset& ds = self.dataset();
                 const std::vector<int>* indices = nullptr;
                 if (split == "train") indices = &ds.image_split.train;
                 else if (split == "val") indices = &ds.image_split.val;
                 else if (split == "test") indices = &ds.image_split.test;
                 else throw ContractError("evaluate: split must be train, val, or test");
                 return self.evaluate_images(*indices, beam_width);
             },
             py::arg("split") = "val", py::arg("beam_width") = 3)
        .def("save", &Trainer::save, py::arg("path"));
}
