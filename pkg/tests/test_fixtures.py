from pathlib import Path

import pytest

from phishguard.classification import load_reference_list
from phishguard.evaluation import (
    PHISHING,
    compare_quantization,
    evaluate_manifest,
    load_manifest,
    verify_soundness,
)
from phishguard.fixtures import BRAND_TABLE, FixtureConfig, generate_corpus
from phishguard.pipeline import load_blacklist, read_replay_stream
from phishguard.tensors import load_weights, quantize


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    paths = generate_corpus(FixtureConfig(out_dir=root, pages=80, seed=31, features=True))
    return paths


class TestGenerator:
    def test_layout_is_complete(self, small_corpus):
        root = small_corpus.root
        assert (root / "manifest.jsonl").exists()
        assert (root / "frames.jsonl").exists()
        assert (root / "brands.tsv").exists()
        assert (root / "blacklist.txt").exists()
        assert (root / "features.pgwt").exists()
        assert len(list((root / "frames").glob("*.png"))) == 80
        assert len(list((root / "scenes").glob("*.json"))) == 80

    def test_manifest_loads_and_validates(self, small_corpus):
        manifest = load_manifest(small_corpus.manifest)
        assert len(manifest) == 80
        labels = {r.verdict_label for r in manifest}
        assert labels == {"phishing", "benign"}

    def test_brand_vocabulary_matches_table(self, small_corpus):
        ref = load_reference_list(small_corpus.brands)
        assert ref.vocabulary == tuple(BRAND_TABLE)
        assert ref.domains_for("dhl") == BRAND_TABLE["dhl"]

    def test_phishing_urls_are_foreign(self, small_corpus):
        from phishguard.pipeline import normalized_host

        ref = load_reference_list(small_corpus.brands)
        for rec in load_manifest(small_corpus.manifest):
            if rec.verdict_label == PHISHING:
                assert not ref.is_legitimate(rec.brand, normalized_host(rec.url))

    def test_determinism_byte_identical(self, tmp_path):
        a = generate_corpus(FixtureConfig(out_dir=tmp_path / "a", pages=12, seed=7))
        b = generate_corpus(FixtureConfig(out_dir=tmp_path / "b", pages=12, seed=7))
        assert a.manifest.read_bytes() == b.manifest.read_bytes()
        assert a.replay.read_bytes() == b.replay.read_bytes()
        for name in ("000000.png", "000005.png", "000011.png"):
            assert (a.root / "frames" / name).read_bytes() == (b.root / "frames" / name).read_bytes()

    def test_different_seeds_differ(self, tmp_path):
        a = generate_corpus(FixtureConfig(out_dir=tmp_path / "a", pages=6, seed=1))
        b = generate_corpus(FixtureConfig(out_dir=tmp_path / "b", pages=6, seed=2))
        assert a.manifest.read_bytes() != b.manifest.read_bytes()

    def test_matches_checked_in_golden_manifest(self, tmp_path):
        # drift detector: a generator change invalidates downstream corpora
        from .conftest import FIXTURE_DIR

        paths = generate_corpus(FixtureConfig(out_dir=tmp_path, pages=12, seed=7))
        golden = (FIXTURE_DIR / "golden_manifest_seed7.jsonl").read_bytes()
        assert paths.manifest.read_bytes() == golden

    def test_features_align_with_manifest(self, small_corpus):
        store = load_weights(Path(small_corpus.features).read_bytes())
        feats = store["features"]
        labels = store["labels"]
        manifest = load_manifest(small_corpus.manifest)
        assert feats.dims == (80, 100 * 256)
        assert labels.dims == (80,)
        want = [1.0 if r.crp else 0.0 for r in manifest]
        assert list(labels.as_f32()) == want

    def test_replay_sidecar_parses(self, small_corpus):
        items = list(read_replay_stream(small_corpus.root))
        assert len(items) == 80
        assert items[1].timestamp == pytest.approx(1 / 30.0, abs=1e-6)
        assert items[0].scene is not None
        frame = items[0].load_frame()
        assert frame.pixels.shape == (1000, 800, 3)


class TestHarnessOnCorpus:
    def test_separable_corpus_metrics(self, small_corpus, crp_model):
        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        bl = load_blacklist(small_corpus.blacklist)
        report = evaluate_manifest(manifest, crp_model, ref, bl)
        assert report.verdict.precision == 1.0
        assert report.verdict.recall == 1.0
        assert report.map_report.map == pytest.approx(1.0)

    def test_jobs_do_not_change_results(self, small_corpus, crp_model):
        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        serial = evaluate_manifest(manifest, crp_model, ref, jobs=1)
        parallel = evaluate_manifest(manifest, crp_model, ref, jobs=4)
        assert serial.decisions == parallel.decisions
        assert serial.scores == parallel.scores

    def test_soundness_on_corpus(self, small_corpus, crp_model):
        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        bl = load_blacklist(small_corpus.blacklist)
        report = evaluate_manifest(manifest, crp_model, ref, bl)
        violations = verify_soundness(zip(manifest.records, report.verdicts), ref)
        assert violations == []

    def test_identity_quantization_comparison(self, small_corpus, crp_model):
        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        cmp = compare_quantization(manifest, crp_model, crp_model, ref)
        assert cmp.agreement == 1.0
        assert set(cmp.deltas) == {"precision", "recall", "fpr"}
        assert all(d == 0.0 for d in cmp.deltas.values())

    def test_f16_quantization_comparison(self, small_corpus, crp_model):
        from phishguard.classification import CrpModel

        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        crp16 = CrpModel.from_store(quantize(crp_model.weights, "f16"))
        cmp = compare_quantization(manifest, crp_model, crp16, ref)
        assert cmp.agreement >= 0.99

    def test_adversarial_variant_degrades(self, tmp_path, crp_model):
        paths = generate_corpus(
            FixtureConfig(out_dir=tmp_path, pages=60, seed=13, variant="adversarial")
        )
        manifest = load_manifest(paths.manifest)
        ref = load_reference_list(paths.brands)
        report = evaluate_manifest(manifest, crp_model, ref)
        assert report.map_report.map < 0.999

    def test_blacklisted_pages_present_and_hit(self, small_corpus, crp_model):
        manifest = load_manifest(small_corpus.manifest)
        ref = load_reference_list(small_corpus.brands)
        bl = load_blacklist(small_corpus.blacklist)
        report = evaluate_manifest(manifest, crp_model, ref, bl)
        rules = [v.matched_rule for v in report.verdicts]
        if len(bl):
            assert rules.count("blacklist-hit") == len(bl)
