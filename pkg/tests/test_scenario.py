import json
from pathlib import Path

import pytest

from triagelab.domain import ProfileError
from triagelab import scenario

from conftest import make_profile


class TestGenerate:
    def test_eclipse_like_scale(self):
        profile = scenario.generate_preset("eclipse-like", seed=7)
        assert profile.n_dev_classes == 16
        assert profile.n_bug_types == 6

    def test_gcc_like_scale(self):
        profile = scenario.generate_preset("gcc-like", seed=7)
        assert profile.n_dev_classes == 47
        assert profile.n_bug_types == 5

    def test_mozilla_like_scale(self):
        profile = scenario.generate_preset("mozilla-like", seed=7)
        assert profile.n_dev_classes == 128
        assert profile.n_bug_types == 5

    def test_same_seed_byte_identical(self, tmp_path):
        a = scenario.generate_preset("eclipse-like", seed=3)
        b = scenario.generate_preset("eclipse-like", seed=3)
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        scenario.save(a, pa)
        scenario.save(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_different_seed_differs(self):
        a = scenario.generate_preset("eclipse-like", seed=3)
        b = scenario.generate_preset("eclipse-like", seed=4)
        assert a.dev_classes != b.dev_classes

    def test_each_class_has_a_specialty(self):
        profile = scenario.generate_preset("eclipse-like", seed=11)
        for cls in profile.dev_classes:
            assert min(cls.cost) < 0.6 * (sum(cls.cost) / len(cls.cost))

    def test_generated_profiles_pass_validation(self):
        for preset in scenario.PRESETS:
            for seed in (0, 1):
                profile = scenario.generate_preset(preset, seed=seed)
                profile.validate()
                scenario.profile_from_dict(scenario.profile_to_dict(profile))

    def test_unknown_preset(self):
        with pytest.raises(ProfileError):
            scenario.generate_preset("netbsd-like", seed=0)


class TestLoadSave:
    def test_round_trip(self, tmp_path):
        profile = scenario.generate_preset("eclipse-like", seed=5)
        path = tmp_path / "p.json"
        scenario.save(profile, path)
        assert scenario.load(path) == profile

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            scenario.load(tmp_path / "absent.json")

    def test_nonpositive_cost_named_in_error(self, tmp_path):
        profile = scenario.generate_preset("eclipse-like", seed=5)
        doc = scenario.profile_to_dict(profile)
        doc["dev_classes"][2]["cost"][1] = -1.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ProfileError, match="dev_classes.2.cost.1"):
            scenario.load(path)

    def test_discount_one_rejected(self, tmp_path):
        doc = scenario.profile_to_dict(scenario.generate_preset("eclipse-like", 5))
        doc["discount"] = 1.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ProfileError, match="discount"):
            scenario.load(path)

    def test_unknown_field_rejected(self, tmp_path):
        doc = scenario.profile_to_dict(scenario.generate_preset("eclipse-like", 5))
        doc["severity_model"] = "p1"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ProfileError):
            scenario.load(path)

    def test_schema_version_checked(self, tmp_path):
        doc = scenario.profile_to_dict(scenario.generate_preset("eclipse-like", 5))
        doc["schema_version"] = 2
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ProfileError, match="schema_version"):
            scenario.load(path)

    def test_repo_root_schema_matches_package_copy(self):
        package_copy = (
            Path(__file__).resolve().parents[1]
            / "src"
            / "triagelab"
            / "profile_schema.json"
        )
        repo_root = Path(__file__).resolve().parents[1] / "profile_schema.json"
        assert repo_root.read_text() == package_copy.read_text()


class TestBundledProfiles:
    def test_tiny_specialist_is_oracle_sized(self):
        from triagelab.oracle import check_caps

        profile = scenario.tiny_specialist_profile()
        check_caps(profile)

    def test_bundled_benchmark_loads(self):
        profile = scenario.bundled_profile("eclipse_like")
        assert profile.n_dev_classes == 16
        assert profile.n_bug_types == 6
        profile.validate()

    def test_bundled_tiny_loads(self):
        profile = scenario.bundled_profile("tiny_specialist")
        from triagelab.oracle import check_caps

        check_caps(profile)
