"""Smoke tests for the Python bindings."""

import math

import pytest

import r2m


def tiny_config(vocab=20):
    cfg = r2m.ModelConfig()
    cfg.dim = 8
    cfg.heads = 2
    cfg.fm_key_dim = 4
    cfg.fm_value_dim = 4
    cfg.rm_key_dim = 4
    cfg.rm_value_dim = 4
    cfg.vocab = vocab
    cfg.feature_dim = 8
    return cfg


def test_softmax_rows_sum_to_one():
    rows = r2m.softmax_rows([[0.0, 0.0], [5.0, 1.0], [1000.0, 0.0]])
    for row in rows:
        assert all(v >= 0.0 for v in row)
        assert math.isfinite(sum(row))
        assert abs(sum(row) - 1.0) <= 1e-9


def test_xe_loss_uniform_logits():
    loss = r2m.xe_loss([[0.0] * 20], [3])
    assert abs(loss - math.log(20)) < 1e-12


def test_triplet_loss_matches_numpy_style_enumeration():
    S = [[0.5, 0.6], [0.7, 0.4]]
    # Hand enumeration of hardest negatives gives (0.4+0.3+0.4+0.5)/2.
    assert abs(r2m.triplet_loss(S, 0.2) - 0.8) < 1e-12
    assert r2m.triplet_loss([[1.0, 0.2], [0.3, 0.9]], 0.2) == 0.0


def test_triplet_loss_rejects_singletons():
    with pytest.raises(ValueError):
        r2m.triplet_loss([[1.0]], 0.2)


def test_bleu_hand_example():
    assert abs(r2m.bleu_n([["a", "a", "a"]], [[["a", "b"]]], 1) - 1.0 / 3.0) < 1e-12


def test_concept_recall_convention():
    assert r2m.concept_recall([["dog", "runs"]], [["dog", "cat"]]) == 0.5
    assert r2m.concept_recall([["x"]], [[]]) == 1.0


def test_encode_and_decode_roundtrip():
    model = r2m.Model(tiny_config(), seed=1)
    v = model.encode_concepts([(4, 1.0), (7, 0.9)], order_seed=0)
    assert len(v) == 8
    caption, log_prob = model.greedy_decode(v, max_len=8)
    assert len(caption) <= 8
    assert log_prob <= 0.0

    beam_caption, beam_lp = model.beam_decode(v, width=1, max_len=8)
    assert beam_caption == caption
    assert abs(beam_lp - log_prob) < 1e-9

    wide_caption, wide_lp = model.beam_decode(v, width=3, max_len=8)
    assert wide_lp >= log_prob - 1e-12


def test_teacher_forced_xe_is_finite_and_positive():
    model = r2m.Model(tiny_config(), seed=2)
    v = model.encode_concepts([(5, 1.0)], order_seed=0)
    xe = model.teacher_forced_xe(v, [4, 9, 1])  # ends with <#end> id 1
    assert xe > 0.0
    assert math.isfinite(xe)


def test_fm_attention_rows_are_stochastic():
    model = r2m.Model(tiny_config(), seed=3)
    v = model.encode_concepts([(4, 1.0)], order_seed=0)
    fused, attention = model.fm_attention(v, [0.1] * 8)
    assert len(fused) == 8
    assert len(attention) == 2  # heads
    for head in attention:
        for row in head:
            assert abs(sum(row) - 1.0) <= 1e-9


def test_gradcheck_smoke():
    report = r2m.gradcheck(seed=0)
    assert report["usable"]
    assert report["max_rel_error"] < 1e-4


def test_training_pipeline(tmp_path):
    data_dir = tmp_path / "data"
    r2m.synth_dataset_files(str(data_dir), seed=0, n_corpus=60, n_images=24,
                            feature_dim=16)
    cfg = r2m.TrainConfig()
    cfg.model = tiny_config()
    cfg.model.dim = 16
    cfg.model.fm_key_dim = 8
    cfg.model.fm_value_dim = 8
    cfg.model.rm_key_dim = 8
    cfg.model.rm_value_dim = 8
    cfg.model.feature_dim = 16
    cfg.batch_size = 8
    cfg.epochs_stage1 = 3
    cfg.epochs_stage2 = 1
    cfg.epochs_stage3 = 1
    cfg.epochs_stage4 = 1
    cfg.out_dir = str(tmp_path / "out")
    trainer = r2m.Trainer(cfg, data_dir=str(data_dir))
    r1 = trainer.run_stage(1)
    assert all(math.isfinite(loss) for loss in r1.batch_losses)
    assert r1.epoch_losses[-1] < r1.epoch_losses[0]
    for stage in (2, 3, 4):
        trainer.run_stage(stage)
    report = trainer.evaluate(split="val", beam_width=3)
    assert 0.0 <= report.bleu1 <= 1.0
    assert 0.0 <= report.concept_recall <= 1.0
