"""Command-line front end: every pipeline behind one deterministic reporter.

Reports are JSON (machine format) or a text rendering derived from it; a
fixed config always produces byte-identical output.  Exit codes: 0 success,
1 invalid input, 2 infeasibility (guard or certification limits).
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import coxeter_ra as cox
from . import kak_building as kb
from . import kak_tree as kt
from . import padic_pgl2 as pp
from . import rab
from . import tree_core as tc
from . import universal_groups as ug
from .errors import CertificationError, GuardExceeded, check_guard

SCHEMA_VERSION = "1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract wants 1
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _render_text(data, indent=0):
    lines = []
    pad = "  " * indent
    if isinstance(data, dict):
        for key in sorted(data):
            value = data[key]
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.extend(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(data, list):
        for value in data:
            if isinstance(value, (dict, list)):
                lines.extend(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}- {value}")
    else:
        lines.append(f"{pad}{data}")
    return lines


def _emit(report: dict, args) -> None:
    report = {"schema_version": SCHEMA_VERSION, **report}
    if args.format == "json":
        text = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    else:
        text = "\n".join(_render_text(report)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _local_group(args, degree: int) -> ug.LocalGroup:
    if getattr(args, "local_group", None):
        with open(args.local_group) as fh:
            return ug.LocalGroup.from_json(json.load(fh))
    if getattr(args, "generators", None):
        return ug.LocalGroup.create(degree, json.loads(args.generators))
    return ug.LocalGroup.symmetric(degree)


def _coxeter_system(args) -> cox.RACoxeterSystem:
    with open(args.config) as fh:
        return cox.RACoxeterSystem.from_json(json.load(fh))


def _building_spec(args) -> rab.BuildingSpec:
    with open(args.spec) as fh:
        return rab.BuildingSpec.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_tree(args) -> dict:
    if args.label_config:
        with open(args.label_config) as fh:
            lv = tc.LabelVector.from_json(json.load(fh))
        max_deg = max(lv.degree_of.values())
        check_guard(max_deg * max(1, (max_deg - 1)) ** max(0, args.radius - 1),
                    args.guard, "tree ball")
        ball = tc.build_label_regular_ball(lv, args.root_label, args.radius)
    else:
        d = args.degree
        check_guard(d * max(1, d - 1) ** max(0, args.radius - 1), args.guard, "tree ball")
        ball = tc.build_regular_ball(args.degree, args.radius)
    check_guard(ball.vertex_count, args.guard, "tree ball")
    spheres = [len(tc.sphere(ball, ball.base, n)) for n in range(args.radius + 1)]
    return {
        "ball": ball.to_json(),
        "vertex_count": ball.vertex_count,
        "sphere_sizes": spheres,
        "certified_radius": ball.radius,
    }


def _cmd_ugroup(args) -> dict:
    world = ug.ColorBall(args.degree, args.radius)
    F = _local_group(args, args.degree)
    gb = ug.enumerate_u1_stabilizer_ball(F, world, guard=args.guard)
    report = {
        "degree": args.degree,
        "certified_radius": args.radius,
        "local_group": F.to_json(),
        "stabilizer_ball_size": len(gb),
        "semiprimitive": ug.is_semiprimitive(F, guard=args.guard),
        "generated_by_point_stabilizers": ug.is_generated_by_point_stabilizers(F, guard=args.guard),
    }
    edge = (0, world.ball.children[0][0])
    if args.plus_k:
        plus = ug.generate_plus_k(gb, args.plus_k, guard=args.guard)
        report["plus_k"] = {"k": args.plus_k, "size": len(plus),
                            "index_in_stabilizer_ball": len(gb) // len(plus)}
    if args.pk_k:
        res = ug.check_property_pk(gb, edge, args.pk_k)
        report["property_pk"] = {"k": args.pk_k, "holds": res.holds,
                                 "fixator_size": res.checked, "edge": list(edge)}
    return report


def _cmd_kak_tree(args) -> dict:
    world = ug.ColorBall(args.degree, args.max_sphere + args.radius)
    F = _local_group(args, args.degree)
    gb = ug.enumerate_u1_ball(F, world, args.max_sphere, args.radius, guard=args.guard)
    dec = kt.enumerate_representatives(gb, 0, args.max_sphere)
    cert = kt.certify_partition(dec, args.max_sphere)
    return {
        "degree": args.degree,
        "certified_radius": args.max_sphere + args.radius,
        "group_ball_size": len(gb),
        "stabilizer_size": len(dec.stabilizer),
        "representatives": [
            {"sphere": rec.sphere_radius, "vertex": rec.vertex,
             "address": list(gb.world.word_of[rec.vertex])}
            for rec in dec.representatives
        ],
        "disjointness": cert.disjoint,
        "coverage": cert.covers,
    }


def _cmd_contract_tree(args) -> dict:
    world = ug.ColorBall(args.degree, args.radius)
    F = _local_group(args, args.degree)
    gb = ug.GroupBall(world, [], closed=False, local_group=F)
    step = tuple(int(x) for x in args.step.split(","))
    seq = [ug.translation(world, step * i).restrict() for i in range(1, args.powers + 1)]
    res = kt.contraction_witness_search(seq, gb, 0)
    if isinstance(res, kt.NoWitness):
        return {"witness": None, "reason": res.reason, "certified_radius": args.radius}
    return {
        "witness": res.witness.to_json(include_ball=False),
        "depths": list(res.depths),
        "displacements": list(res.displacements),
        "side": {"edge": list(res.side.edge), "side": res.side.side},
        "certified_radius": res.certified_radius,
    }


def _cmd_padic(args) -> dict:
    if args.action != "verify":
        raise ValueError(f"unknown padic action: {args.action}")
    p, n_max = args.p, args.n_max
    rng = random.Random(args.seed)
    matrices = [pp.random_matrix(rng, p) for _ in range(args.matrices)]
    formula_ok = all(pp.conjugation_formula_check(h, n)
                     for h in matrices for n in range(1, n_max + 1))
    contraction = pp.unipotent_contraction_check(n_max, p)
    regimes = {
        "offdiagonal_b": pp.ProjMatrix((1, 1, 0, 1), p),
        "offdiagonal_c": pp.ProjMatrix((1, 0, 1, 1), p),
        "diagonal_gap": pp.ProjMatrix((1, 0, 0, 1 + p), p),
    }
    divergence = {}
    for name, h in regimes.items():
        rep = pp.perturbed_triviality_evidence(h, n_max)
        divergence[name] = {
            "bottom_left_valuations": list(rep.bottom_left_valuations),
            "diverges": rep.diverges,
        }
    return {
        "p": p,
        "n_max": n_max,
        "seed": args.seed,
        "conjugation_formula": {"matrices": len(matrices), "all_match": formula_ok},
        "unipotent_contraction": {str(n): v for n, v in contraction.items()},
        "perturbed_divergence": divergence,
    }


def _cmd_coxeter(args) -> dict:
    system = _coxeter_system(args)
    if args.action == "nf":
        el = cox.word_from_names(system, args.word or "")
        return {"word": args.word or "", "normal_form": list(el.names()), "length": len(el.word)}
    if args.action == "wall":
        el = cox.word_from_names(system, args.word or "")
        return {"word": args.word or "", "generator": args.gen,
                "wall_distance": cox.wall_distance(el, args.gen)}
    if args.action == "profile":
        profile = cox.profile_bounded_set(system, args.max_length, args.bound, guard=args.guard)
        return {"max_length": args.max_length, "bound": args.bound,
                "size": len(profile), "elements": [list(w.names()) for w in profile]}
    if args.action == "root-growth":
        with open(args.words_file) as fh:
            words = [cox.word_from_names(system, w) for w in json.load(fh)]
        chain = cox.root_growth_search(words, guard=args.guard)
        return {"generator": chain.generator,
                "chain": [list(w.names()) for w in chain.chain],
                "distances": list(chain.distances)}
    raise ValueError(f"unknown coxeter action: {args.action}")


def _cmd_building(args) -> dict:
    spec = _building_spec(args)
    if args.action == "ball":
        ball = rab.ChamberBall(spec, args.L, guard=args.guard)
        return {
            "L": args.L,
            "chamber_count": len(ball),
            "sphere_sizes": ball.sphere_sizes(),
            "oracle_count": rab.chamber_count_oracle(spec, args.L),
        }
    if args.action == "kak":
        bc = kb.representatives(spec, args.L, guard=args.guard)
        report = kb.double_coset_disjointness_check(bc)
        return {
            "L": args.L,
            "representatives": sorted(
                [" ".join(spec.system.generators[s] for s in word) or "e" for word in bc.reps]),
            "representative_count": len(bc.reps),
            "disjointness": report.disjoint,
        }
    if args.action == "contract":
        with open(args.ws_file) as fh:
            ws = [cox.word_from_names(spec.system, w) for w in json.load(fh)]
        res = kb.building_contraction_witness(ws, spec, args.L, guard=args.guard)
        if isinstance(res, kb.NoBuildingWitness):
            return {"witness": None, "reason": res.reason, "L": args.L}
        return {
            "L": args.L,
            "generator": res.generator,
            "chain": [" ".join(w) for w in res.chain_words],
            "distances": list(res.distances),
            "fixed_ball_radii": list(res.fixed_ball_radii),
            "witness_nontrivial": not res.witness.is_identity_on_ball(),
        }
    raise ValueError(f"unknown building action: {args.action}")


# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="tdlc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "text"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--guard", type=int, default=None)

    p = sub.add_parser("tree", help="build a regular or label-regular tree ball")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--label-config", default=None)
    p.add_argument("--root-label", default=None)
    common(p)

    p = sub.add_parser("ugroup", help="enumerate a universal-group stabilizer ball")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--generators", default=None, help="JSON list of one-line permutations")
    p.add_argument("--local-group", default=None, help="path to a local group JSON file")
    p.add_argument("--plus-k", type=int, default=None)
    p.add_argument("--pk-k", type=int, default=None)
    common(p)

    p = sub.add_parser("kak-tree", help="tree KAK representatives and partition certificate")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--radius", type=int, default=2, help="portrait support radius")
    p.add_argument("--max-sphere", type=int, default=2)
    p.add_argument("--generators", default=None)
    p.add_argument("--local-group", default=None)
    common(p)

    p = sub.add_parser("contract-tree", help="contraction witness for translation powers")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--radius", type=int, default=10)
    p.add_argument("--powers", type=int, default=8)
    p.add_argument("--step", default="1,2", help="translation word, comma-separated colors")
    p.add_argument("--generators", default=None)
    p.add_argument("--local-group", default=None)
    common(p)

    p = sub.add_parser("padic", help="exact checks for the rank-one matrix example")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--matrices", type=int, default=100)
    common(p)

    p = sub.add_parser("coxeter", help="right-angled Coxeter computations")
    p.add_argument("action", choices=["nf", "wall", "profile", "root-growth"])
    p.add_argument("--config", required=True)
    p.add_argument("--word", default=None)
    p.add_argument("--gen", default=None)
    p.add_argument("--max-length", type=int, default=8)
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--words-file", default=None)
    common(p)

    for name in ("building", "kak-building", "contract-building"):
        p = sub.add_parser(name, help="right-angled building pipelines")
        if name == "building":
            p.add_argument("action", choices=["ball", "kak", "contract"])
        p.add_argument("--spec", required=True)
        p.add_argument("--L", type=int, required=True)
        p.add_argument("--ws-file", default=None)
        common(p)

    return parser


_HANDLERS = {
    "tree": _cmd_tree,
    "ugroup": _cmd_ugroup,
    "kak-tree": _cmd_kak_tree,
    "contract-tree": _cmd_contract_tree,
    "padic": _cmd_padic,
    "coxeter": _cmd_coxeter,
    "building": _cmd_building,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = args.command
    if command == "kak-building":
        command, args.action = "building", "kak"
    elif command == "contract-building":
        command, args.action = "building", "contract"
    try:
        report = _HANDLERS[command](args)
    except (GuardExceeded, CertificationError) as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    _emit(report, args)
    return 0


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))
