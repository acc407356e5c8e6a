from .projective_core import (
    ProjPoint, ProjLine3, normalize, proj_equal, proj_distance, collinear_det,
    coplanar_det, line_through, lines_meet,
)
from .camera import (
    Camera, CameraRig, FundamentalMatrix, canonical_cameras, epipole, fundamental_matrix,
    back_projected_line, labeled_triangulate, general_position_check, random_rig,
)
from .sym_rep import (
    SymConfig, pair_to_sym, config_to_sym, vectorize, unvectorize, lift_camera,
    unlabeled_project, unlabeled_focal_point, nearest_rank2, split_rank2,
)
from .triangulation import (
    TriangulationResult, build_B, triangulate, triangulate_two_view, triangulate_multiview,
    pencil_rank2_points,
)
from .matching_oracle import (
    Matching, enumerate_matchings, oracle_triangulate, intersection_degrees, cover_solutions,
    two_view_ambiguity_check, baseline_coplanarity,
)
from .algebra_checks import (
    sample_variety, vanishing_form_dim, new_generator_count, check_gens_fund2, rank_profile,
    pencil_check,
)
from .scene import SceneFile, ObservationFile, generate_scene, project_scene
from .experiment import ExperimentRunner, run_experiment
from .logsetup import configure_logging
from .errors import UnlabeledTriangulationError
