"""
Batch experiments over random scenes.

ExperimentRunner generates seeded scenes, projects them, runs the
algebraic triangulation next to the brute-force oracle and the two-view
ambiguity diagnosis, and aggregates success rates and error statistics per
noise level. Each trial is independent; with several workers they run on a
thread pool and are merged in trial order, so reports do not depend on the
number of workers.
"""

from .errors import (
    AmbiguousTriangulationError,
    BudgetExceededError,
    DegenerateConfigurationError,
    DegenerateInputError,
    OutOfRangeError,
)
from .matching_oracle import INIT_MATCHING_BUDGET, oracle_triangulate, two_view_ambiguity_check
from .triangulation import reconstruction_error, triangulate
from .scene import SPECIAL_FAMILIES, generate_scene, project_scene
from concurrent.futures import ThreadPoolExecutor
from .projective_core import proj_distance
from .camera import INIT_TOL_RESIDUAL
from .linalg import INIT_TOL_RANK
from .sym_rep import config_to_sym
from .logsetup import logger
import numpy as np
import json
import halo
import sys

INIT_TRIALS = 20
INIT_VIEWS = 3
INIT_POINTS = 2
INIT_SUCCESS_TOL = 1e-8
INIT_MIN_SUCCESS_RATE = 1.0
ORACLE_AGREEMENT_TOL = 1e-6


class ExperimentRunner:
    """Seeded batch of synthetic triangulation trials."""

    def __init__(self,
                 trials: int = INIT_TRIALS,
                 views: int = INIT_VIEWS,
                 points: int = INIT_POINTS,
                 noise_levels=(0.0,),
                 special: str = "generic",
                 seed: int = 0,
                 tol_rank: float = INIT_TOL_RANK,
                 tol_residual: float = INIT_TOL_RESIDUAL,
                 success_tol: float = INIT_SUCCESS_TOL,
                 min_success_rate: float = INIT_MIN_SUCCESS_RATE,
                 run_oracle: bool = True,
                 budget: int = INIT_MATCHING_BUDGET,
                 workers: int = 1,
                 spinner: bool = False,
                 ):
        """
        Configures an experiment.

        Args:
        - trials (int, default=20): Number of scenes per noise level.
        - views (int, default=3): Cameras per scene.
        - points (int, default=2): World points per scene.
        - noise_levels (sequence of float, default=(0.0,)): Standard
            deviations of the image noise; every level reuses the same
            seeded scenes.
        - special (str, default="generic"): Scene family, one of
            "generic", "baseline_coplanar", "epipolar_degenerate".
            For the degenerate families with two views a trial succeeds
            when the degeneracy is detected instead of a reconstruction;
            with more views they are scored like generic scenes.
        - seed (int, default=0): Trial i uses scene seed ``seed + i``.
        - tol_rank (float, default=1e-8): Relative singular value threshold.
        - tol_residual (float, default=1e-6): Residual threshold passed to
            the solvers and the oracle.
        - success_tol (float, default=1e-8): Largest projective distance
            between recovered and true configuration counted as success.
        - min_success_rate (float, default=1.0): Acceptance threshold of
            the success rate at every noise level.
        - run_oracle (bool, default=True): Cross-check noiseless trials
            with the brute-force oracle.
        - budget (int, default=10**6): Matching budget of the oracle.
        - workers (int, default=1): Threads evaluating trials.
        - spinner (bool, default=False): Show a spinner on stderr.
        """
        if special not in SPECIAL_FAMILIES:
            raise OutOfRangeError(f"unknown scene family {special!r}")
        self.trials = trials
        self.views = views
        self.points = points
        self.noise_levels = tuple(float(s) for s in noise_levels)
        self.special = special
        self.seed = seed
        self.tol_rank = tol_rank
        self.tol_residual = tol_residual
        self.success_tol = success_tol
        self.min_success_rate = min_success_rate
        self.run_oracle = run_oracle
        self.budget = budget
        self.workers = workers
        self.spinner = spinner
        self.halo = None

    @classmethod
    def from_config(cls, config, **overrides):
        """Build a runner from a dict or a JSON file of constructor arguments."""
        if isinstance(config, str):
            with open(config, "r", encoding="utf-8") as handle:
                config = json.load(handle)
        settings = dict(config)
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    def _set_spinner(self, text):
        if self.spinner:
            if self.halo is None:
                self.halo = halo.Halo(text=text, stream=sys.stderr)
                self.halo.start()
            else:
                self.halo.text = text

    def _stop_spinner(self):
        if self.halo is not None:
            self.halo.stop()
            self.halo = None

    def run_trial(self, index, noise_sigma=0.0):
        """Run one seeded trial and return its record."""
        scene_seed = self.seed + index
        scene = generate_scene(self.views, self.points, scene_seed, self.special, noise_sigma)
        observations = project_scene(scene)
        record = {"trial": index, "seed": scene_seed, "noise_sigma": noise_sigma,
                  "solved": False, "error": None, "residual": None, "kernel_dim": None,
                  "ambiguous": False, "degeneracy": None, "oracle_solutions": None,
                  "oracle_agrees": None}

        result = None
        try:
            result = triangulate(scene.rig, observations.Ns, tol_rank=self.tol_rank,
                                 tol_residual=self.tol_residual)
            record.update(solved=True, error=reconstruction_error(result, scene.world_points),
                          residual=result.residual, kernel_dim=result.kernel_dim,
                          ambiguous=result.ambiguous)
        except (AmbiguousTriangulationError, DegenerateConfigurationError) as exc:
            record.update(ambiguous=True, degeneracy=type(exc).__name__,
                          kernel_dim=exc.details.get("kernel_dim"))
        except DegenerateInputError as exc:
            record.update(degeneracy=type(exc).__name__)
        logger.debug(f"trial {index} noise {noise_sigma}: {record['degeneracy'] or 'solved'}")

        if self.views == 2 and self.points == 2:
            (u1, v1), (u2, v2) = observations.observations[:2]
            diagnosis = two_view_ambiguity_check(scene.rig, u1, v1, u2, v2,
                                                 tol_residual=self.tol_residual)
            record["ambiguous"] = record["ambiguous"] or diagnosis.ambiguous

        if self.run_oracle and noise_sigma == 0.0:
            try:
                oracle = oracle_triangulate(scene.rig, observations.observations,
                                            tol_residual=self.tol_residual,
                                            tol_rank=self.tol_rank, budget=self.budget)
                record["oracle_solutions"] = oracle.configuration_count
                if result is not None:
                    record["oracle_agrees"] = any(
                        proj_distance(config_to_sym(s.points).entries,
                                      result.M_delta.entries) < ORACLE_AGREEMENT_TOL
                        for s in oracle.solutions)
            except BudgetExceededError:
                logger.warning(f"trial {index}: oracle skipped, matching budget exceeded")
            except DegenerateInputError as exc:
                record["oracle_solutions"] = 0
                logger.debug(f"trial {index}: oracle failed with {type(exc).__name__}")

        record["success"] = self._succeeded(record)
        return record

    def _succeeded(self, record):
        # the special families are only ambiguous for two views
        if self.special == "generic" or self.views != 2:
            return record["solved"] and record["error"] < self.success_tol
        if self.special == "baseline_coplanar":
            return bool(record["ambiguous"])
        return not record["solved"] or bool(record["ambiguous"])

    def _run_level(self, noise_sigma):
        indices = range(self.trials)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                return list(executor.map(lambda i: self.run_trial(i, noise_sigma), indices))
        records = []
        for i in indices:
            self._set_spinner(f"noise {noise_sigma:g}: trial {i + 1}/{self.trials}")
            records.append(self.run_trial(i, noise_sigma))
        return records

    @staticmethod
    def _stats(values):
        values = [v for v in values if v is not None]
        if not values:
            return None
        values = np.asarray(values, dtype=float)
        return {"mean": float(values.mean()), "median": float(np.median(values)),
                "max": float(values.max())}

    def summarize(self, records):
        count = len(records)
        oracle = [r for r in records if r["oracle_solutions"] is not None]
        agreements = [r["oracle_agrees"] for r in records if r["oracle_agrees"] is not None]
        histogram = {}
        for r in oracle:
            key = str(r["oracle_solutions"])
            histogram[key] = histogram.get(key, 0) + 1
        success_rate = sum(r["success"] for r in records) / count if count else 0.0
        return {"trials": count,
                "success_rate": success_rate,
                "solved_rate": sum(r["solved"] for r in records) / count if count else 0.0,
                "ambiguity_rate": sum(bool(r["ambiguous"]) for r in records) / count if count else 0.0,
                "error": self._stats(r["error"] for r in records),
                "residual": self._stats(r["residual"] for r in records),
                "oracle_agreement_rate": (sum(agreements) / len(agreements)) if agreements else None,
                "oracle_solution_counts": histogram,
                "passed": success_rate >= self.min_success_rate}

    def run(self):
        """
        Run every noise level.

        Returns:
            dict: ``config``, per level ``summaries`` and all ``records``,
                plus ``passed`` when every level meets min_success_rate.
        """
        logger.info(f"experiment: {self.trials} trials, n={self.views}, m={self.points}, "
                    f"family {self.special}, noise levels {self.noise_levels}")
        levels = []
        records = []
        try:
            for noise_sigma in self.noise_levels:
                level_records = self._run_level(noise_sigma)
                summary = self.summarize(level_records)
                summary["noise_sigma"] = noise_sigma
                levels.append(summary)
                records.extend(level_records)
                logger.info(f"noise {noise_sigma:g}: success rate {summary['success_rate']:.3f}")
        finally:
            self._stop_spinner()
        return {"config": self.config(), "summaries": levels, "records": records,
                "passed": all(level["passed"] for level in levels)}

    def config(self):
        return {"trials": self.trials, "views": self.views, "points": self.points,
                "noise_levels": list(self.noise_levels), "special": self.special,
                "seed": self.seed, "tol_rank": self.tol_rank,
                "tol_residual": self.tol_residual, "success_tol": self.success_tol,
                "min_success_rate": self.min_success_rate, "run_oracle": self.run_oracle,
                "budget": self.budget, "workers": self.workers}


def run_experiment(config, **overrides):
    """Run an experiment described by a dict or JSON file; see ExperimentRunner."""
    return ExperimentRunner.from_config(config, **overrides).run()
