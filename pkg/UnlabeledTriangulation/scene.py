"""
Synthetic scenes and their observations, with the JSON files that carry
them between the command line steps.

A scene file holds the cameras and world points plus the seed and noise
level that produced them. An observation file holds, per view, the
shuffled image points and the symmetric tensor of the unordered image
configuration. Everything projective is normalised before it is written,
so re-reading and re-writing a file reproduces it byte for byte.
"""

from .projective_core import ProjPoint, normalize_vector, proj_distance
from .errors import DegenerateInputError, OutOfRangeError, ShapeError
from .camera import CameraRig, random_rig, random_world_points
from .sym_rep import SymConfig, config_to_sym
from dataclasses import dataclass, field
from typing import List, Optional
from .logsetup import logger
import numpy as np
import json

SPECIAL_FAMILIES = ("generic", "baseline_coplanar", "epipolar_degenerate")
AUTHORITATIVE_POINTS = "points"
AUTHORITATIVE_SYM = "sym"

INIT_MAX_SCENE_ATTEMPTS = 100
MIN_IMAGE_SEPARATION = 1e-3
MIN_COEFFICIENT = 0.2


def _write_json(payload, path):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return text


def _read_json(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


@dataclass(frozen=True)
class SceneFile:
    rig: CameraRig
    world_points: List[ProjPoint]
    seed: Optional[int] = None
    noise_sigma: float = 0.0
    special: str = "generic"

    def __post_init__(self):
        if len(self.rig) < 2:
            raise ShapeError("a scene needs at least two cameras")

    @property
    def m(self):
        return len(self.world_points)

    def to_dict(self):
        return {"cameras": self.rig.to_list(),
                "world_points": [X.to_list() for X in self.world_points],
                "seed": self.seed,
                "noise_sigma": float(self.noise_sigma),
                "special": self.special}

    @classmethod
    def from_dict(cls, data):
        return cls(CameraRig.from_list(data["cameras"]),
                   [ProjPoint(X) for X in data["world_points"]],
                   data.get("seed"),
                   float(data.get("noise_sigma", 0.0)),
                   data.get("special", "generic"))

    def save(self, path=None):
        return _write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(_read_json(path))


@dataclass(frozen=True)
class ObservationView:
    points: List[ProjPoint]
    sym: SymConfig
    authoritative: str = AUTHORITATIVE_POINTS

    def to_dict(self):
        return {"points": [u.to_list() for u in self.points],
                "sym": self.sym.to_dict(),
                "authoritative": self.authoritative}

    @classmethod
    def from_dict(cls, data):
        authoritative = data.get("authoritative", AUTHORITATIVE_POINTS)
        points = [ProjPoint(u) for u in data.get("points", [])]
        if "sym" in data:
            sym = SymConfig.from_dict(data["sym"])
        elif points:
            sym = config_to_sym(points)
        else:
            raise ShapeError("observation view carries neither points nor sym")
        if authoritative == AUTHORITATIVE_POINTS and not points:
            raise ShapeError("view is marked point-authoritative but has no points")
        return cls(points, sym, authoritative)


@dataclass(frozen=True)
class ObservationFile:
    m: int
    views: List[ObservationView]
    seed: Optional[int] = None
    noise_sigma: float = 0.0

    def __post_init__(self):
        for view in self.views:
            if view.sym.order != self.m:
                raise ShapeError(f"view of order {view.sym.order} in a file of order {self.m}")
            if view.points and len(view.points) != self.m:
                raise ShapeError(f"view with {len(view.points)} points in a file of order {self.m}")

    @property
    def Ns(self):
        return [view.sym for view in self.views]

    @property
    def observations(self):
        return [list(view.points) for view in self.views]

    def to_dict(self):
        return {"m": self.m,
                "views": [view.to_dict() for view in self.views],
                "seed": self.seed,
                "noise_sigma": float(self.noise_sigma)}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["m"]), [ObservationView.from_dict(v) for v in data["views"]],
                   data.get("seed"), float(data.get("noise_sigma", 0.0)))

    def save(self, path=None):
        return _write_json(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(_read_json(path))


def _images_separated(rig, points):
    for camera in rig:
        try:
            images = [camera.project(X) for X in points]
        except DegenerateInputError:
            return False
        for a in range(len(images)):
            for b in range(a + 1, len(images)):
                if proj_distance(images[a], images[b]) < MIN_IMAGE_SEPARATION:
                    return False
    return True


def _coefficients(rng, count):
    """Random coefficients bounded away from zero."""
    values = rng.uniform(MIN_COEFFICIENT, 1.0, size=count)
    return values * rng.choice([-1.0, 1.0], size=count)


def _draw_points(rng, rig, m, special):
    f0 = rig[0].focal_point.coords
    f1 = rig[1].focal_point.coords
    if special == "generic":
        return list(random_world_points(rng, m))
    if special == "baseline_coplanar":
        P = rng.uniform(-1.0, 1.0, size=4)
        return [a * f0 + b * f1 + c * P for a, b, c in
                (_coefficients(rng, 3) for _ in range(m))]
    a, b = _coefficients(rng, 2)
    return [a * f0 + b * f1] + list(random_world_points(rng, m - 1))


def generate_scene(n, m, seed=None, special="generic", noise_sigma=0.0,
                   max_attempts=INIT_MAX_SCENE_ATTEMPTS):
    """
    Random rig of n cameras in general position and m world points.

    Args:
        n (int): Number of cameras, at least 2.
        m (int): Number of world points.
        seed (int, optional): Seed; equal seeds give identical scenes.
        special (str): "generic", "baseline_coplanar" (every point in one
            plane through the baseline of cameras 0 and 1) or
            "epipolar_degenerate" (point 0 on that baseline, so its images
            in views 0 and 1 are epipoles).
        noise_sigma (float): Image noise applied by project_scene.
    """
    if special not in SPECIAL_FAMILIES:
        raise OutOfRangeError(f"unknown scene family {special!r}, expected one of {SPECIAL_FAMILIES}")
    if n < 2 or m < 1:
        raise OutOfRangeError(f"scene needs n >= 2 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    rig = random_rig(n, rng)
    for attempt in range(max_attempts):
        points = _draw_points(rng, rig, m, special)
        if _images_separated(rig, points):
            world = [ProjPoint(normalize_vector(X)) for X in points]
            return SceneFile(rig, world, seed, noise_sigma, special)
        logger.debug(f"scene draw {attempt} rejected, images too close")
    raise DegenerateInputError(f"no admissible world points after {max_attempts} draws")


def project_scene(scene, seed=None):
    """
    Observations of a scene: per view the shuffled, optionally noisy image
    points and the symmetric tensor of their unordered configuration.

    Noise of scale ``scene.noise_sigma`` is added to the normalised image
    points before symmetrisation.
    """
    if seed is None:
        seed = None if scene.seed is None else [scene.seed, 1]
    rng = np.random.default_rng(seed)
    views = []
    for camera in scene.rig:
        images = [camera.project(X).coords for X in scene.world_points]
        if scene.noise_sigma > 0:
            images = [normalize_vector(u + rng.normal(0.0, scene.noise_sigma, size=3))
                      for u in images]
        order = rng.permutation(len(images))
        points = [ProjPoint(normalize_vector(images[i])) for i in order]
        views.append(ObservationView(points, config_to_sym(points)))
    return ObservationFile(scene.m, views, scene.seed, scene.noise_sigma)
