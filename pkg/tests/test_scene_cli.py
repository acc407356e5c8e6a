import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from UnlabeledTriangulation.scene import ObservationFile, SceneFile, generate_scene, project_scene
from UnlabeledTriangulation.experiment import ExperimentRunner
from UnlabeledTriangulation.logsetup import configure_logging, logger
from UnlabeledTriangulation.errors import OutOfRangeError, ShapeError
from UnlabeledTriangulation.projective_core import proj_equal
from UnlabeledTriangulation_cli import triang_cli
import tempfile
import logging
import json


def _run(*argv):
    return triang_cli.main([str(a) for a in argv])


def _read(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def test_scene_generation_is_seeded():
    first = generate_scene(3, 2, seed=17).save()
    second = generate_scene(3, 2, seed=17).save()
    assert first == second
    assert generate_scene(3, 2, seed=18).save() != first


def test_scene_file_survives_reload():
    scene = generate_scene(3, 2, seed=19, noise_sigma=1e-6)
    text = scene.save()
    assert SceneFile.from_dict(json.loads(text)).save() == text


def test_observation_file_keeps_both_representations():
    scene = generate_scene(2, 2, seed=20)
    observations = project_scene(scene)
    payload = json.loads(observations.save())
    assert payload["m"] == 2
    for view in payload["views"]:
        assert view["authoritative"] == "points"
        assert len(view["points"]) == 2
        assert view["sym"]["order"] == 2 and view["sym"]["dim"] == 3

    reloaded = ObservationFile.from_dict(payload)
    for a, b in zip(reloaded.Ns, observations.Ns):
        assert a == b

    del payload["views"][0]["points"]
    payload["views"][0]["authoritative"] = "sym"
    sym_only = ObservationFile.from_dict(payload)
    assert sym_only.Ns[0] == observations.Ns[0]


def test_observation_file_checks_point_counts():
    payload = json.loads(project_scene(generate_scene(3, 2, seed=22)).save())
    payload["views"][1]["points"] = payload["views"][1]["points"][:1]
    try:
        ObservationFile.from_dict(payload)
    except ShapeError:
        pass
    else:
        raise AssertionError("view with one point accepted in a file of pairs")


def test_scene_families():
    scene = generate_scene(2, 2, seed=21, special="epipolar_degenerate")
    image = scene.rig[0].project(scene.world_points[0])
    assert proj_equal(image, scene.rig[0].project(scene.rig[1].focal_point))
    try:
        generate_scene(2, 2, special="pappus")
    except OutOfRangeError:
        pass
    else:
        raise AssertionError("unknown family accepted")


def test_experiment_runner():
    report = ExperimentRunner(trials=5, views=3, points=2, seed=1).run()
    assert report["passed"]
    summary = report["summaries"][0]
    assert summary["success_rate"] == 1.0
    assert summary["oracle_agreement_rate"] == 1.0
    assert len(report["records"]) == 5

    threaded = ExperimentRunner(trials=5, views=3, points=2, seed=1, workers=3).run()
    assert threaded["records"] == report["records"]


def test_experiment_special_families():
    for special in ("baseline_coplanar", "epipolar_degenerate"):
        report = ExperimentRunner(trials=5, views=3, points=2, special=special, seed=3,
                                  run_oracle=False).run()
        assert report["passed"], special
        assert report["summaries"][0]["success_rate"] == 1.0
        assert report["summaries"][0]["solved_rate"] == 1.0

    report = ExperimentRunner(trials=5, views=2, points=2, special="baseline_coplanar",
                              seed=0, run_oracle=False).run()
    assert report["passed"]
    assert report["summaries"][0]["ambiguity_rate"] == 1.0


def test_experiment_noise_sweep():
    levels = (0.0, 1e-8, 1e-6, 1e-4)
    report = ExperimentRunner(trials=10, views=3, points=2, noise_levels=levels, seed=2,
                              run_oracle=False).run()
    medians = [summary["error"]["median"] for summary in report["summaries"]]
    assert all(a < b for a, b in zip(medians, medians[1:])), medians

    single = ExperimentRunner(trials=10, views=3, points=2, noise_levels=(1e-6,), seed=2,
                              run_oracle=False).run()
    assert single["records"] == [r for r in report["records"] if r["noise_sigma"] == 1e-6]


def test_experiment_from_config():
    runner = ExperimentRunner.from_config({"trials": 2, "views": 4}, points=2, seed=None)
    assert runner.trials == 2 and runner.views == 4 and runner.points == 2
    assert runner.seed == 0


def test_configure_logging_does_not_stack_handlers():
    configure_logging(logging.INFO)
    configure_logging(logging.WARNING)
    assert len(logger.handlers) == 1
    assert logger.handlers[0].level == logging.WARNING


def test_cli_pipeline():
    with tempfile.TemporaryDirectory() as tmp:
        scene = os.path.join(tmp, "scene.json")
        obs = os.path.join(tmp, "obs.json")
        out = os.path.join(tmp, "out.json")
        assert _run("--seed", 5, "generate-scene", "--views", 3, "--points", 2, "-o", scene) == 0
        assert _run("project", "--scene", scene, "-o", obs) == 0
        assert _run("triangulate", "--scene", scene, "--observations", obs, "-o", out) == 0
        result = _read(out)
        assert result["method"] == "multiview" and result["kernel_dim"] == 1
        assert not result["ambiguous"]

        assert _run("oracle", "--scene", scene, "--observations", obs, "-o", out) == 0
        assert _read(out)["configuration_count"] == 1
        assert _run("--budget", 1, "oracle", "--scene", scene, "--observations", obs, "-o", out) == 4
        assert _read(out)["error"] == "BudgetExceededError"


def test_cli_reports_ambiguity():
    with tempfile.TemporaryDirectory() as tmp:
        scene = os.path.join(tmp, "scene.json")
        obs = os.path.join(tmp, "obs.json")
        out = os.path.join(tmp, "out.json")
        _run("--seed", 6, "generate-scene", "--views", 2, "--points", 2,
             "--special", "epipolar_degenerate", "-o", scene)
        _run("project", "--scene", scene, "-o", obs)
        assert _run("triangulate", "--scene", scene, "--observations", obs, "-o", out) == 3
        payload = _read(out)
        assert payload["ambiguous"] is True
        assert payload["error"] == "AmbiguousTriangulationError"

        _run("--seed", 7, "generate-scene", "--views", 2, "--points", 2,
             "--special", "baseline_coplanar", "-o", scene)
        _run("project", "--scene", scene, "-o", obs)
        assert _run("check-ambiguity", "--scene", scene, "--observations", obs, "-o", out) == 0
        payload = _read(out)
        assert payload["ambiguous"] and payload["baseline_coplanar"]
        assert len(payload["reconstructions"]) == 2


def test_cli_csv_output():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "scene.csv")
        assert _run("--seed", 8, "--format", "csv", "generate-scene", "-o", out) == 0
        with open(out, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        assert lines[0] == "key,value"
        assert "special,generic" in lines


def test_cli_verify_ideal():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "verify.json")
        code = _run("--seed", 9, "verify-ideal", "--samples", 300, "--pencils", 5,
                    "--no-spinner", "-o", out)
        payload = _read(out)
        assert code == 0, payload
        assert payload["rigs"][0]["form_dims"] == {"1,1": 3, "3,0": 1, "0,3": 1, "1,0": 0}
        assert payload["rigs"][0]["new_generators"] == {"2,1": 1, "1,2": 1}


if __name__ == "__main__":
    for name, test in list(globals().items()):
        if name.startswith("test_") and callable(test):
            test()
            print(f"✓ {name}")
