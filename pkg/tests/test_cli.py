import json
from pathlib import Path

import numpy as np
import pytest

from gaitsig.cli import main
from gaitsig.config import ConfigError, config_from_dict, load_config
from gaitsig.data import ingest_csv


def small_config(**overrides):
    doc = {
        "seed": 7,
        "synth": {
            "n_subjects": 4,
            "pathology": {
                "hf_amplitude": 5.0,
                "hf_phase_region": "Stance",
                "jitter_sd": 0.5,
            },
            "pathology_label": "CP-dp",
        },
        "joints": ["Hip"],
        "sides": ["Right"],
        "som": {"rows": 4, "cols": 4, "epochs": 30},
        "write_pgm": True,
        "loocv": True,
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


EXPECTED_ARTIFACTS = [
    "resolved_config.json",
    "dataset.csv",
    "features.csv",
    "som.json",
    "umatrix.csv",
    "umatrix.pgm",
    "attraction.csv",
    "clusters.csv",
    "eval.json",
    "eval.txt",
    "confusion.csv",
]


def tree_bytes(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestRunConfig:
    def test_validates_before_compute(self):
        with pytest.raises(ConfigError, match="input"):
            config_from_dict({"seed": 1})

    def test_two_sources_rejected(self):
        with pytest.raises(ConfigError, match="exactly one"):
            config_from_dict(small_config(input_csv="x.csv"))

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            config_from_dict(small_config(typo_key=1))

    def test_bad_nested_value_rejected(self):
        doc = small_config()
        doc["synth"]["pathology"]["asymmetry_gain"] = -2.0
        with pytest.raises(ConfigError, match="asymmetry_gain"):
            config_from_dict(doc)

    def test_seed_override_propagates(self, tmp_path):
        path = write_config(tmp_path, small_config())
        cfg = load_config(path, seed_override=99)
        assert cfg.seed == 99
        assert cfg.synth.rng_seed == 99
        assert cfg.schedule.rng_seed == 99

    def test_explicit_section_seed_pinned(self, tmp_path):
        doc = small_config()
        doc["som"]["rng_seed"] = 5
        path = write_config(tmp_path, doc)
        cfg = load_config(path, seed_override=99)
        assert cfg.schedule.rng_seed == 5


class TestRunPipeline:
    def test_full_artifact_set(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        for name in EXPECTED_ARTIFACTS:
            assert (out / name).exists(), name
        scalograms = list((out / "scalograms").glob("scalogram_*.csv"))
        assert len(scalograms) == 8  # 8 subjects x 1 joint-side
        assert not (out / "FAILED").exists()
        stdout = capsys.readouterr().out
        assert "recognition rate" in stdout and "kappa" in stdout and "clusters" in stdout
        report = json.loads((out / "eval.json").read_text())
        assert report["recognition_rate"] >= 0.9  # trivially separable classes

    def test_rerun_byte_identical(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["run", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["run", "--config", str(cfg_path), "--out", str(out2)]) == 0
        assert tree_bytes(out1) == tree_bytes(out2)

    def test_seed_changes_artifacts(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["run", "--config", str(cfg_path), "--out", str(out1)])
        main(["run", "--config", str(cfg_path), "--out", str(out2), "--seed", "8"])
        assert (out1 / "dataset.csv").read_bytes() != (out2 / "dataset.csv").read_bytes()

    def test_missing_input_fails_before_compute(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"seed": 1, "som": {"rows": 4, "cols": 4}})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 1
        assert not out.exists()  # validation precedes any output
        assert "input" in capsys.readouterr().err

    def test_missing_input_file_fails_before_output(self, tmp_path, capsys):
        cfg = {"seed": 1, "input_csv": str(tmp_path / "nope.csv")}
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 1
        assert not out.exists()
        assert "not found" in capsys.readouterr().err

    def test_stage_error_writes_failed_marker(self, tmp_path, capsys):
        bad_csv = tmp_path / "bad.csv"
        bad_csv.write_text("subject_id,label,joint,side,pct,angle_deg\ns1,Normal,Hip,Left,0.0,nan\n")
        cfg = {"seed": 1, "input_csv": str(bad_csv), "som": {"rows": 4, "cols": 4}}
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 1
        marker = (out / "FAILED").read_text()
        assert marker.startswith("dataset:")
        assert "[dataset]" in capsys.readouterr().err

    def test_resolved_config_echo_is_loadable_and_equivalent(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["run", "--config", str(cfg_path), "--out", str(out1)])
        # re-running from the echoed resolved config reproduces everything
        main(["run", "--config", str(out1 / "resolved_config.json"), "--out", str(out2)])
        t1, t2 = tree_bytes(out1), tree_bytes(out2)
        del t1["resolved_config.json"], t2["resolved_config.json"]
        assert t1 == t2

    def test_map_dims_and_level_overrides(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        assert main([
            "run", "--config", str(cfg_path), "--out", str(out),
            "--map-dims", "3x5", "--level", "LowScale", "--threshold", "0.5",
        ]) == 0
        som = json.loads((out / "som.json").read_text())
        assert (som["rows"], som["cols"]) == (3, 5)
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["features"]["level"] == "LowScale"
        assert resolved["cluster_threshold"] == 0.5

    def test_zscore_flag_changes_map_not_features(self, tmp_path):
        raw_cfg = write_config(tmp_path, small_config(), name="raw.json")
        z_doc = small_config(features={"zscore": True})
        z_cfg = write_config(tmp_path, z_doc, name="z.json")
        out_raw, out_z = tmp_path / "raw", tmp_path / "z"
        assert main(["run", "--config", str(raw_cfg), "--out", str(out_raw)]) == 0
        assert main(["run", "--config", str(z_cfg), "--out", str(out_z)]) == 0
        # extraction artifact identical; the classifier saw different inputs
        assert (out_raw / "features.csv").read_bytes() == (out_z / "features.csv").read_bytes()
        assert (out_raw / "som.json").read_bytes() != (out_z / "som.json").read_bytes()
        assert json.loads((out_z / "resolved_config.json").read_text())["features"]["zscore"] is True

    def test_loocv_off_skips_eval(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config(loocv=False))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert not (out / "eval.json").exists()


class TestSubcommandChain:
    def test_synth_then_stagewise_pipeline(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        d = tmp_path / "stage"
        assert main(["synth", "--config", str(cfg_path), "--out", str(d)]) == 0
        subjects = ingest_csv(d / "dataset.csv")
        assert len(subjects) == 8

        assert main([
            "cwt", "--input", str(d / "dataset.csv"), "--out", str(d),
            "--joints", "Hip", "--sides", "Right", "--no-pgm",
        ]) == 0
        assert len(list((d / "scalograms").glob("*.csv"))) == 8

        assert main([
            "features", "--scalograms", str(d / "scalograms"), "--out", str(d),
        ]) == 0
        assert (d / "features.csv").exists()

        assert main([
            "train", "--features", str(d / "features.csv"), "--out", str(d),
            "--map-dims", "4x4", "--epochs", "30", "--seed", "7",
        ]) == 0
        assert (d / "som.json").exists() and (d / "umatrix.csv").exists()

        assert main([
            "eval", "--features", str(d / "features.csv"), "--out", str(d),
            "--map-dims", "4x4", "--epochs", "30", "--seed", "7",
        ]) == 0
        report = json.loads((d / "eval.json").read_text())
        assert report["recognition_rate"] >= 0.9

    def test_stagewise_matches_run_artifacts(self, tmp_path):
        # the chained stages and the all-in-one run produce identical
        # features, map, and report
        cfg_path = write_config(tmp_path, small_config())
        run_dir, stage_dir = tmp_path / "run", tmp_path / "stage"
        assert main(["run", "--config", str(cfg_path), "--out", str(run_dir)]) == 0
        assert main(["synth", "--config", str(cfg_path), "--out", str(stage_dir)]) == 0
        assert main([
            "cwt", "--input", str(stage_dir / "dataset.csv"), "--out", str(stage_dir),
            "--joints", "Hip", "--sides", "Right",
        ]) == 0
        assert main([
            "features", "--scalograms", str(stage_dir / "scalograms"), "--out", str(stage_dir),
        ]) == 0
        assert main([
            "train", "--features", str(stage_dir / "features.csv"), "--out", str(stage_dir),
            "--map-dims", "4x4", "--epochs", "30", "--seed", "7",
        ]) == 0
        assert (run_dir / "features.csv").read_bytes() == (stage_dir / "features.csv").read_bytes()
        assert (run_dir / "som.json").read_bytes() == (stage_dir / "som.json").read_bytes()

    def test_ingest_round_trip(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        d1, d2 = tmp_path / "a", tmp_path / "b"
        main(["synth", "--config", str(cfg_path), "--out", str(d1)])
        assert main(["ingest", "--input", str(d1 / "dataset.csv"), "--out", str(d2)]) == 0
        assert (d1 / "dataset.csv").read_bytes() == (d2 / "dataset.csv").read_bytes()

    def test_unknown_option_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--bogus"])
        assert exc.value.code == 2
