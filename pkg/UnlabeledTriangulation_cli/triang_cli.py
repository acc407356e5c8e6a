"""
Command line front end of the unlabeled triangulation library.

    unlabeled-triang --seed 7 generate-scene --views 3 --points 2 -o scene.json
    unlabeled-triang project --scene scene.json -o obs.json
    unlabeled-triang triangulate --scene scene.json --observations obs.json
    unlabeled-triang oracle --scene scene.json --observations obs.json
    unlabeled-triang check-ambiguity --scene scene.json --observations obs.json
    unlabeled-triang --seed 1 verify-ideal --views 2 --samples 500
    unlabeled-triang experiment --config config.json

Results go to stdout (or --output) as JSON or CSV; status lines go to
stderr. Exit codes: 0 success, 2 failed assertion, 3 degenerate input,
4 budget exceeded.
"""

from UnlabeledTriangulation.algebra_checks import (
    EXPECTED_FORM_DIMS,
    EXPECTED_NEW_GENERATORS,
    INIT_SAMPLE_COUNT,
    gens_fund2_report,
    new_generator_count,
    pencil_check,
    rank_profile,
    sample_variety,
    vanishing_form_dim,
)
from UnlabeledTriangulation.matching_oracle import (
    INIT_MATCHING_BUDGET,
    baseline_coplanarity,
    cover_solutions,
    intersection_degrees,
    oracle_triangulate,
    two_view_ambiguity_check,
)
from UnlabeledTriangulation.errors import (
    EXIT_ASSERTION_FAILURE,
    EXIT_SUCCESS,
    AmbiguousTriangulationError,
    BudgetExceededError,
    ShapeError,
    UnlabeledTriangulationError,
    exit_code_for,
)
from UnlabeledTriangulation.scene import SPECIAL_FAMILIES, ObservationFile, SceneFile
from UnlabeledTriangulation.scene import generate_scene, project_scene
from UnlabeledTriangulation.camera import INIT_TOL_RESIDUAL, canonical_cameras, random_rig
from UnlabeledTriangulation.logsetup import configure_logging, logger
from UnlabeledTriangulation.experiment import ExperimentRunner
from UnlabeledTriangulation.triangulation import triangulate
from UnlabeledTriangulation.linalg import INIT_TOL_RANK
from colorama import init, Fore, Style
import numpy as np
import argparse
import logging
import json
import halo
import csv
import sys
import io

init()


def status(message, color=""):
    print(f"{color}{message}{Style.RESET_ALL}", file=sys.stderr)


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(
        prog="unlabeled-triang",
        description='Unlabeled triangulation of point configurations from unordered image data.')

    parser.add_argument('--seed', type=int, default=None,
                        help='Seed of every random draw. Equal seeds give byte-identical output files.')
    parser.add_argument('--tol-rank', type=float, default=INIT_TOL_RANK,
                        help='Relative singular value threshold for numerical ranks. Default is 1e-8.')
    parser.add_argument('--tol-residual', type=float, default=INIT_TOL_RESIDUAL,
                        help='Residual threshold for accepting a reconstruction. Default is 1e-6.')
    parser.add_argument('--budget', type=int, default=INIT_MATCHING_BUDGET,
                        help='Largest number of matchings the oracle may enumerate. Default is 1e6.')
    parser.add_argument('--format', choices=['json', 'csv'], default='json',
                        help='Output format of the result. Default is json.')
    parser.add_argument('-D', '--debug', action='store_true', help='Enable debug logging on stderr')
    parser.add_argument('--log-file', metavar='FILE', default=None,
                        help='Write a full debug log to FILE.')

    commands = parser.add_subparsers(dest='command', required=True)

    generate = commands.add_parser('generate-scene', help='Draw a random rig and world points.')
    generate.add_argument('-n', '--views', type=int, default=3, help='Number of cameras. Default is 3.')
    generate.add_argument('-m', '--points', type=int, default=2, help='Number of world points. Default is 2.')
    generate.add_argument('--special', choices=SPECIAL_FAMILIES, default='generic',
                          help='Scene family: generic, baseline_coplanar (all points in one plane through the '
                               'first baseline) or epipolar_degenerate (first point on the first baseline).')
    generate.add_argument('--noise', type=float, default=0.0,
                          help='Standard deviation of the image noise applied when projecting. Default is 0.')

    project = commands.add_parser('project', help='Project a scene into shuffled unlabeled observations.')
    project.add_argument('--scene', required=True, metavar='FILE', help='Scene JSON file.')

    for name, text in (('triangulate', 'Recover the world configuration from the symmetric tensors.'),
                       ('oracle', 'Brute-force reconstruction over all matchings.'),
                       ('check-ambiguity', 'Two-view ambiguity diagnosis for pairs.')):
        sub = commands.add_parser(name, help=text)
        sub.add_argument('--scene', required=True, metavar='FILE', help='Scene JSON file with the cameras.')
        sub.add_argument('--observations', required=True, metavar='FILE', help='Observation JSON file.')
        if name == 'oracle':
            sub.add_argument('--workers', type=int, default=1,
                             help='Threads evaluating matchings. Default is 1.')

    verify = commands.add_parser('verify-ideal', help='Numerically verify the ideal and rank structure.')
    verify.add_argument('--views', type=int, default=2, help='Cameras per rig. Default is 2.')
    verify.add_argument('--samples', type=int, default=INIT_SAMPLE_COUNT,
                        help='Variety samples per rig. Default is 500.')
    verify.add_argument('--rigs', type=int, default=1, help='Number of random rigs. Default is 1.')
    verify.add_argument('--canonical', action='store_true', help='Use the canonical coordinate cameras.')
    verify.add_argument('--pencils', type=int, default=100, help='Random pencils to check. Default is 100.')
    verify.add_argument('--no-spinner', action='store_true', help='Disable the progress spinner.')

    experiment = commands.add_parser('experiment', help='Run a batch of seeded trials.')
    experiment.add_argument('--config', metavar='FILE', default=None,
                            help='JSON file with ExperimentRunner arguments; flags override it.')
    experiment.add_argument('--trials', type=int, default=None, help='Trials per noise level.')
    experiment.add_argument('--views', type=int, default=None, help='Cameras per scene.')
    experiment.add_argument('--points', type=int, default=None, help='World points per scene.')
    experiment.add_argument('--noise', type=float, nargs='*', default=None, help='Noise levels.')
    experiment.add_argument('--special', choices=SPECIAL_FAMILIES, default=None, help='Scene family.')
    experiment.add_argument('--success-tol', type=float, default=None,
                            help='Largest reconstruction error counted as success.')
    experiment.add_argument('--min-success-rate', type=float, default=None,
                            help='Acceptance threshold on the success rate.')
    experiment.add_argument('--workers', type=int, default=None, help='Threads evaluating trials.')
    experiment.add_argument('--no-oracle', action='store_true', help='Skip the brute-force cross-check.')
    experiment.add_argument('--no-spinner', action='store_true', help='Disable the progress spinner.')

    for sub in commands.choices.values():
        sub.add_argument('-o', '--output', metavar='FILE', default=None,
                         help='Write the result to FILE instead of stdout.')

    return parser.parse_args(argv)


def _flatten(payload, prefix=""):
    if isinstance(payload, dict):
        for key, value in payload.items():
            yield from _flatten(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(payload, list):
        for index, value in enumerate(payload):
            yield from _flatten(value, f"{prefix}.{index}" if prefix else str(index))
    else:
        yield prefix, payload


def render(payload, fmt, table=None):
    """
    Text of a result payload.

    CSV output is a key,value listing of the flattened payload, or the rows
    of ``table`` when given.
    """
    if fmt == 'json':
        return json.dumps(payload, indent=2) + "\n"
    buffer = io.StringIO()
    if table:
        writer = csv.DictWriter(buffer, fieldnames=list(table[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(table)
    else:
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(_flatten(payload))
    return buffer.getvalue()


def emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate_scene(args):
    scene = generate_scene(args.views, args.points, args.seed, args.special, args.noise)
    status(f"scene with {args.views} cameras and {args.points} points ({args.special})", Fore.GREEN)
    return scene.to_dict(), EXIT_SUCCESS, None


def cmd_project(args):
    observations = project_scene(SceneFile.load(args.scene))
    status(f"projected into {len(observations.views)} views", Fore.GREEN)
    return observations.to_dict(), EXIT_SUCCESS, None


def _load_pair(args):
    return SceneFile.load(args.scene), ObservationFile.load(args.observations)


def cmd_triangulate(args):
    scene, observations = _load_pair(args)
    result = triangulate(scene.rig, observations.Ns, tol_rank=args.tol_rank,
                         tol_residual=args.tol_residual)
    if result.ambiguous:
        status("reconstruction found, but the data admits a second one", Fore.YELLOW)
    else:
        status(f"reconstruction with residual {result.residual:.3e}", Fore.GREEN)
    return result.to_dict(), EXIT_SUCCESS, None


def cmd_oracle(args):
    scene, observations = _load_pair(args)
    result = oracle_triangulate(scene.rig, observations.observations,
                                tol_residual=args.tol_residual, tol_rank=args.tol_rank,
                                budget=args.budget, workers=args.workers)
    payload = result.to_dict()
    arrangement = intersection_degrees(scene.rig, observations.observations)
    payload["intersection_degrees"] = arrangement.degrees()
    try:
        covers = cover_solutions(arrangement, len(scene.rig), observations.m)
        payload["cover_count"] = len(covers)
    except BudgetExceededError as exc:
        logger.warning(f"cover search skipped: {exc.message}")
    color = Fore.GREEN if result.configuration_count == 1 else Fore.YELLOW
    status(f"{result.matching_count} matchings survive, "
           f"{result.configuration_count} distinct configurations", color)
    return payload, EXIT_SUCCESS, None


def cmd_check_ambiguity(args):
    scene, observations = _load_pair(args)
    if observations.m != 2 or len(observations.views) < 2:
        raise ShapeError("ambiguity check needs pairs in at least two views",
                         points=observations.m, views=len(observations.views))
    (u1, v1), (u2, v2) = observations.observations[:2]
    diagnosis = two_view_ambiguity_check(scene.rig, u1, v1, u2, v2, tol_residual=args.tol_residual)
    payload = diagnosis.to_dict()
    payload["baseline_coplanar"] = baseline_coplanarity(scene.rig, scene.world_points)
    if diagnosis.ambiguous:
        status(f"ambiguous: {len(diagnosis.reconstructions)} reconstructions", Fore.YELLOW)
    else:
        status("not ambiguous", Fore.GREEN)
    return payload, EXIT_SUCCESS, None


def cmd_verify_ideal(args):
    rng = np.random.default_rng(args.seed)
    spinner = None
    if not args.no_spinner and sys.stderr.isatty():
        spinner = halo.Halo(text="preparing rigs", stream=sys.stderr)
        spinner.start()

    def stage(text):
        logger.info(text)
        if spinner is not None:
            spinner.text = text

    try:
        if args.canonical:
            rigs = [canonical_cameras(args.views)]
        else:
            rigs = [random_rig(args.views, rng) for _ in range(args.rigs)]
        reports = []
        for index, rig in enumerate(rigs):
            stage(f"rig {index + 1}/{len(rigs)}: sampling the variety")
            sample = sample_variety(rig, args.samples, seed=int(rng.integers(2 ** 31)))
            stage(f"rig {index + 1}/{len(rigs)}: vanishing forms")
            dims = {bidegree: vanishing_form_dim(sample, bidegree) for bidegree in EXPECTED_FORM_DIMS}
            new = {bidegree: new_generator_count(sample, bidegree) for bidegree in EXPECTED_NEW_GENERATORS}
            stage(f"rig {index + 1}/{len(rigs)}: rank profile")
            gens = gens_fund2_report(rig, sample)
            profile = rank_profile(rig, 2, seed=int(rng.integers(2 ** 31)))
            passed = (all(dims[b] == EXPECTED_FORM_DIMS[b] for b in dims)
                      and all(new[b] == EXPECTED_NEW_GENERATORS[b] for b in new)
                      and gens.passed and profile.passed)
            reports.append({"rig": rig.to_list(),
                            "form_dims": {f"{b[0]},{b[1]}": d for b, d in dims.items()},
                            "new_generators": {f"{b[0]},{b[1]}": d for b, d in new.items()},
                            "gens_fund2": gens.to_dict(),
                            "rank_profile": profile.to_dict(),
                            "passed": passed})
        stage("pencils")
        pencils = pencil_check(args.pencils, seed=int(rng.integers(2 ** 31)))
    finally:
        if spinner is not None:
            spinner.stop()

    passed = all(r["passed"] for r in reports) and pencils.passed
    status("ideal structure verified" if passed else "verification failed",
           Fore.GREEN if passed else Fore.RED)
    payload = {"rigs": reports, "pencils": pencils.to_dict(), "passed": passed}
    return payload, EXIT_SUCCESS if passed else EXIT_ASSERTION_FAILURE, None


def cmd_experiment(args):
    runner = ExperimentRunner.from_config(
        args.config or {},
        trials=args.trials, views=args.views, points=args.points,
        noise_levels=args.noise, special=args.special, seed=args.seed,
        tol_rank=args.tol_rank, tol_residual=args.tol_residual,
        success_tol=args.success_tol, min_success_rate=args.min_success_rate,
        budget=args.budget, workers=args.workers,
        run_oracle=False if args.no_oracle else None,
        spinner=not args.no_spinner and sys.stderr.isatty())
    report = runner.run()
    for summary in report["summaries"]:
        color = Fore.GREEN if summary["passed"] else Fore.RED
        status(f"noise {summary['noise_sigma']:g}: success rate {summary['success_rate']:.3f}", color)
    code = EXIT_SUCCESS if report["passed"] else EXIT_ASSERTION_FAILURE
    return report, code, report["records"]


COMMANDS = {
    'generate-scene': cmd_generate_scene,
    'project': cmd_project,
    'triangulate': cmd_triangulate,
    'oracle': cmd_oracle,
    'check-ambiguity': cmd_check_ambiguity,
    'verify-ideal': cmd_verify_ideal,
    'experiment': cmd_experiment,
}


def main(argv=None):
    args = parse_arguments(argv)
    configure_logging(logging.DEBUG if args.debug else logging.WARNING, args.log_file)

    table = None
    try:
        payload, code, table = COMMANDS[args.command](args)
    except UnlabeledTriangulationError as exc:
        logger.debug(f"{args.command} failed", exc_info=True)
        payload = exc.to_dict()
        if isinstance(exc, AmbiguousTriangulationError):
            payload["ambiguous"] = True
        code = exit_code_for(exc)
        status(f"{type(exc).__name__}: {exc.message}", Fore.RED)
    except Exception:
        logger.exception(f"unexpected error in {args.command}")
        raise

    emit(render(payload, args.format, table), args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
