import numpy as np
import pytest

from pcpriv.corpus import (
    FAMILY_ORDER,
    generate_synthetic_corpus,
    ingest_directory,
    load_corpus,
    write_corpus,
)
from pcpriv.geometry import save_xyz


class TestSyntheticCorpus:
    def test_shape_and_normalization(self):
        corpus = generate_synthetic_corpus(4, 8, 512, seed=7)
        assert len(corpus) == 32
        for obj in corpus:
            assert obj.cloud.count == 512
            radii = np.linalg.norm(obj.cloud.points, axis=1)
            assert abs(radii.max() - 1.0) <= 1e-9

    def test_deterministic(self):
        a = generate_synthetic_corpus(3, 4, 128, seed=5)
        b = generate_synthetic_corpus(3, 4, 128, seed=5)
        for oa, ob in zip(a, b):
            assert oa.intra_class == ob.intra_class
            np.testing.assert_array_equal(oa.cloud.points, ob.cloud.points)

    def test_seed_changes_corpus(self):
        a = generate_synthetic_corpus(2, 2, 128, seed=1)
        b = generate_synthetic_corpus(2, 2, 128, seed=2)
        assert not np.array_equal(a.objects[0].cloud.points, b.objects[0].cloud.points)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="2 super-classes"):
            generate_synthetic_corpus(1, 8, 128, seed=0)

    def test_all_families_available(self):
        corpus = generate_synthetic_corpus(len(FAMILY_ORDER), 2, 256, seed=3)
        assert set(o.super_class for o in corpus) == set(FAMILY_ORDER)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown shape families"):
            generate_synthetic_corpus(2, 2, 128, seed=0, families=("box", "torus"))

    def test_label_space(self):
        corpus = generate_synthetic_corpus(3, 5, 128, seed=9)
        space = corpus.label_space()
        assert len(space.super_classes) == 3
        assert all(len(v) == 5 for v in space.intra_classes.values())


class TestPersistence:
    def test_write_and_load_roundtrip(self, tmp_path):
        corpus = generate_synthetic_corpus(2, 3, 64, seed=4)
        manifest = write_corpus(corpus, tmp_path / "out")
        back = load_corpus(manifest)
        assert len(back) == len(corpus)
        for oa, ob in zip(corpus, back):
            assert oa.intra_class == ob.intra_class
            np.testing.assert_array_equal(oa.cloud.points, ob.cloud.points)

    def test_load_missing_field(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        path.write_text('{"cloud_path": "x.xyz", "super_class": "box"}\n')
        with pytest.raises(ValueError, match="intra_class"):
            load_corpus(path)

    def test_load_bad_json_line(self, tmp_path):
        path = tmp_path / "manifest.jsonl"
        path.write_text("not json\n")
        with pytest.raises(ValueError, match=":1:"):
            load_corpus(path)


class TestIngest:
    def test_directory_layout(self, tmp_path):
        rng = np.random.default_rng(0)
        for cls in ("chair", "table"):
            d = tmp_path / cls
            d.mkdir()
            for j in range(2):
                from pcpriv.geometry import PointCloud

                save_xyz(d / f"{j}.xyz", PointCloud(rng.normal(size=(32, 3))))
        corpus = ingest_directory(tmp_path)
        assert len(corpus) == 4
        assert {o.super_class for o in corpus} == {"chair", "table"}
        for o in corpus:
            radii = np.linalg.norm(o.cloud.points, axis=1)
            assert abs(radii.max() - 1.0) <= 1e-9  # ingestion normalizes

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ValueError, match="no cloud files"):
            ingest_directory(tmp_path)

    def test_small_cloud_rejected(self, tmp_path):
        d = tmp_path / "chair"
        d.mkdir()
        (d / "tiny.xyz").write_text("0 0 0\n1 1 1\n")
        (tmp_path / "table").mkdir()
        with pytest.raises(ValueError, match="ingestion minimum"):
            ingest_directory(tmp_path)
