#pragma once

#include <cstdint>
#include <string>

#include "r2m/model.hpp"

namespace r2m {

// Training configuration: model dims plus curriculum knobs and data paths.
// Parsed from a line-oriented UTF-8 file of `key = value` pairs; '#' starts
// a comment; unknown keys are data errors.
struct TrainConfig {
    ModelConfig model;

    double margin = 0.2;  // triplet margin m
    double beta = 1.0;    // weight of the sentence reconstruction term
    double gamma = 1.0;   // weight of the image reconstruction term

    // Image stages run far cooler than corpus stages. At desk scale a
    // 10:1 ratio measurably erodes the decoder's memory-to-word
    // calibration (the word head receives no image-stage gradient), so the
    // default widens the gap to 100:1.
    double lr_corpus = 3e-3;
    double lr_image = 3e-5;

    int batch_size = 16;
    int epochs_stage1 = 20;
    int epochs_stage2 = 8;
    int epochs_stage3 = 6;
    int epochs_stage4 = 6;
    int beam_width = 3;
    int max_len = 16;
    double concept_threshold = 0.3;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
    // Which parameters each image stage updates: "all", "memory" (fusion
    // and recurrent memories), "encoder" (embedding + encoder LSTM),
    // "lstm", "gates", or "similarity" (the feature projection alone).
    // The word head never receives image-stage gradients (token choices
    // are argmax-stopped), so aggressive image-stage updates de-calibrate
    // its readout. The defaults first align the feature projection with
    // the reconstruction geometry learned on text, then fine-tune
    // everything gently.
    std::string stage3_update = "similarity";
    std::string stage4_update = "all";

    std::string data_dir;
    std::string out_dir = "out";

    int epochs_for_stage(int stage) const;
    double lr_for_stage(int stage) const;

    void validate() const;
    std::string to_key_values() const;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);

} // namespace r2m
