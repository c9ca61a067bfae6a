"""Batch front door: build generic prefixes, verify them, amalgamate.

Exit codes: 0 success, 1 check failed, 2 usage or parse error,
3 post-build verification failed, 4 precondition violation.
Set GENERIC_LOG=debug for step tracing on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from genstruct import analysis, autorder, classes, forcing, structures

log = logging.getLogger("genstruct")

BUILD_CLASSES = classes.TAGS + ("AutOrder",)


def _parse_args(argv: list[str]):
    parser = argparse.ArgumentParser(prog="genstruct", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="build a generic prefix")
    build.add_argument("--class", dest="tag", required=True)
    build.add_argument("--n", type=int, default=0)
    build.add_argument("--steps", type=int, default=None)
    build.add_argument("--seed", type=lambda s: int(s) & (2**64 - 1), default=0)
    build.add_argument("--verify", action="store_true")
    build.add_argument("--format", choices=("json", "dot"), default="json")
    build.add_argument("--out", default=None)
    build.add_argument("--alpha0", type=int, default=0)
    build.add_argument("--ext-size", type=int, default=3,
                       help="largest extension target scheduled for graph-like classes")

    check = sub.add_parser("check", help="run a verifier over a structure file")
    check.add_argument("--class", dest="tag", required=True)
    check.add_argument("--check", dest="verifier", required=True,
                       choices=("extension", "universality", "homogeneity", "density"))
    check.add_argument("--in", dest="infile", required=True)
    check.add_argument("--k", type=int, default=2)
    check.add_argument("--ids", default="", help="comma ids for the density check")
    check.add_argument("--out", default=None)

    am = sub.add_parser("amalgamate", help="amalgamate two inputs over a base")
    am.add_argument("--op", choices=("class", "crossing", "auto"), required=True)
    am.add_argument("--class", dest="tag", default=None)
    am.add_argument("--left", required=True)
    am.add_argument("--right", required=True)
    am.add_argument("--base", default=None)
    am.add_argument("--root", default="", help="comma ids of the crossing root")
    am.add_argument("--points", default="", help="s,sbar,t,tbar for crossing")
    am.add_argument("--a", type=int, default=None)
    am.add_argument("--b", type=int, default=None)
    am.add_argument("--out", default=None)

    return parser.parse_args(argv)


def _write_out(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text + "\n")
        return
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")
    os.replace(tmp, path)


def _emit(path: str | None, payload: dict) -> None:
    _write_out(path, json.dumps(payload, separators=(",", ":")))


# --- build -----------------------------------------------------------------


def default_schedule(tag: str, n: int, ext_size: int) -> list[forcing.DenseRequirement]:
    reqs = [forcing.point_requirement(tag, m) for m in range(n)]
    if tag == "LinearOrder":
        for a in range(n):
            for b in range(a + 1, n):
                reqs.append(forcing.between_requirement(a, b))
        return reqs
    if tag == "LinearGraph":
        for a in range(n):
            for b in range(a + 1, n):
                reqs.append(forcing.connectivity_requirement(a, b))
        return reqs
    reqs.extend(extension_schedule(tag, n, ext_size))
    return reqs


def extension_schedule(tag: str, n: int, ext_size: int) -> list[forcing.DenseRequirement]:
    """Extension requirements for every target type of at most ext_size
    points, every induced small side, and every injection into 0..n-1."""
    from itertools import permutations

    out: list[forcing.DenseRequirement] = []
    ground = list(range(n))
    for size in range(ext_size + 1):
        for target in classes.enumerate_members(tag, size):
            universe = target.sorted_universe()
            for r in range(len(universe) + 1):
                from itertools import combinations

                for subset in combinations(universe, r):
                    source = structures.induced_substructure(target, set(subset))
                    f = structures.inclusion_embedding(source, target)
                    for image in permutations(ground, r):
                        i = dict(zip(subset, image))
                        out.append(forcing.extension_requirement(i, f, tag))
    return out


def _build_generic(args) -> tuple[int, dict]:
    schedule = default_schedule(args.tag, args.n, args.ext_size)
    steps = args.steps
    if steps is None:
        steps = 8 * len(schedule) + 8 if schedule else 0
    if not schedule:
        steps = 0
    chain = forcing.generic_build(args.tag, schedule, steps, args.seed)
    if log.isEnabledFor(logging.DEBUG):
        for line in chain.log_lines():
            log.debug("%s", line)
        log.debug("built %s prefix: %d elements, %d logged steps",
                  args.tag, len(chain.final.universe), len(chain.log))
    payload = chain.to_json_dict()
    if args.verify:
        problems = []
        for a, b in zip(chain.steps, chain.steps[1:]):
            if not forcing.stronger(b, a):
                problems.append("chain monotonicity broken")
        visited = {name for _, name, _ in chain.log}
        for req in schedule:
            # Only requirements actually scheduled before the step bound
            # are promised; satisfaction is upward closed, so a clean run
            # keeps them met at the end.
            if req.name in visited and not req.satisfied(chain.final):
                problems.append(f"unsatisfied requirement {req.name}")
        if problems:
            payload["verify"] = problems
            return 3, payload
    return 0, payload


def _build_aut(args) -> tuple[int, dict]:
    steps = args.steps
    if steps is None:
        schedule_len = len(autorder.default_aut_schedule(args.n, args.alpha0))
        steps = 8 * schedule_len + 8 if schedule_len else 0
    cond, report = autorder.build_automorphic_order(args.n, steps, args.seed, args.alpha0)
    payload = autorder.aut_to_json_dict(cond)
    payload["log"] = report
    if args.verify:
        problems = []
        verdict = autorder.validate_aut_condition(cond)
        if not verdict.valid:
            problems.append(f"invalid condition: item {verdict.item}")
        for m in range(args.n):
            if not autorder.orbit_straddles(cond, args.alpha0, m):
                problems.append(f"orbit misses {m}")
        if problems:
            payload["verify"] = problems
            return 3, payload
    return 0, payload


def _to_dot(payload: dict, tag: str) -> str:
    lines = ["digraph g {"]
    if tag in ("LinearOrder", "AutOrder"):
        order = structures.from_json_dict({k: payload[k] for k in ("sig", "universe", "interp")}) \
            if "sig" in payload else structures.from_json_dict(payload["final"])
        seq = classes.chain_of(order)
        lines.extend(f'  "{a}" -> "{b}";' for a, b in zip(seq, seq[1:]))
        for x, y in payload.get("phi", []):
            lines.append(f'  "{x}" -> "{y}" [style=dashed];')
    else:
        body = payload.get("final", payload)
        m = structures.from_json_dict({k: body[k] for k in ("sig", "universe", "interp")})
        for x in m.sorted_universe():
            lines.append(f'  "{x}";')
        seen = set()
        for name, tuples in m.interp:
            for t in sorted(tuples):
                if frozenset(t) not in seen or len(t) != 2:
                    seen.add(frozenset(t))
                    lines.append(f'  "{t[0]}" -> "{t[1]}" [label="{name}"];')
    lines.append("}")
    return "\n".join(lines)


def cmd_build(args) -> int:
    if args.tag not in BUILD_CLASSES:
        print(f"unknown class {args.tag!r}", file=sys.stderr)
        return 2
    if args.n < 0 or (args.steps is not None and args.steps < 0):
        print("n and steps must be nonnegative", file=sys.stderr)
        return 2
    code, payload = _build_aut(args) if args.tag == "AutOrder" else _build_generic(args)
    if args.format == "dot":
        _write_out(args.out, _to_dot(payload, args.tag))
    else:
        _emit(args.out, payload)
    return code


# --- check -----------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        with open(args.infile, encoding="utf-8") as fh:
            data = json.load(fh)
        m = structures.from_json_dict({k: data[k] for k in ("sig", "universe", "interp")})
    except (OSError, ValueError, KeyError, structures.StructureError) as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    try:
        if args.verifier == "extension":
            report = analysis.extension_property_report(m, args.tag, args.k)
        elif args.verifier == "universality":
            report = analysis.universality_check(m, args.tag, args.k)
        elif args.verifier == "homogeneity":
            report = analysis.one_point_homogeneity(m, args.tag, args.k)
        else:
            ids = {int(x) for x in args.ids.split(",") if x.strip()}
            report = analysis.interval_density_check(m, ids)
    except structures.StructureError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    _write_out(args.out, report.to_json())
    return 0 if report.passed else 1


# --- amalgamate --------------------------------------------------------------


def _load_structure(path: str) -> structures.FinStructure:
    with open(path, encoding="utf-8") as fh:
        return structures.from_json_dict(json.load(fh))


def _ids(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_amalgamate(args) -> int:
    try:
        if args.op == "class":
            if args.tag is None or args.base is None:
                print("--class and --base are required", file=sys.stderr)
                return 2
            base = _load_structure(args.base)
            left = _load_structure(args.left)
            right = _load_structure(args.right)
            f = structures.inclusion_embedding(base, left)
            g = structures.inclusion_embedding(base, right)
            am = classes.amalgamate(args.tag, f, g)
            _emit(args.out, {
                "result": structures.to_json_dict(am.result),
                "left_map": sorted(am.emb_left.as_dict().items()),
                "right_map": sorted(am.emb_right.as_dict().items()),
            })
            return 0
        if args.op == "crossing":
            if args.tag is None:
                print("--class is required", file=sys.stderr)
                return 2
            points = _ids(args.points)
            if len(points) != 4:
                print("--points must be s,sbar,t,tbar", file=sys.stderr)
                return 2
            p_s = forcing.Condition(args.tag, _load_structure(args.left))
            p_t = forcing.Condition(args.tag, _load_structure(args.right))
            spec = forcing.CrossingSpec(*points)
            out = forcing.crossing_amalgamation(p_s, p_t, frozenset(_ids(args.root)), spec)
            _emit(args.out, {"result": structures.to_json_dict(out.structure)})
            return 0
        # auto: amalgamate order-with-map conditions over their shared part
        with open(args.left, encoding="utf-8") as fh:
            p1 = autorder.aut_from_json_dict(json.load(fh))
        with open(args.right, encoding="utf-8") as fh:
            p2 = autorder.aut_from_json_dict(json.load(fh))
        if args.a is None or args.b is None:
            print("--a and --b are required", file=sys.stderr)
            return 2
        root = p1.universe & p2.universe
        if len(p1.chain) != len(p2.chain):
            print("NotIsomorphicExtensions: sides differ in size", file=sys.stderr)
            return 4
        # The order isomorphism between equal-length chains is index-wise;
        # the amalgamation op rejects it if it fails to fix the root.
        h = dict(zip(p1.chain, p2.chain))
        out = autorder.amalgamate_partial_automorphisms(p1, p2, root, h, args.a, args.b)
        payload = autorder.aut_to_json_dict(out)
        payload["h"] = sorted(h.items())
        _emit(args.out, payload)
        return 0
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    except structures.StructureError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def main(argv: list[str] | None = None) -> int:
    if os.environ.get("GENERIC_LOG", "").lower() == "debug":
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr,
                            format="%(name)s %(levelname)s %(message)s")
    try:
        args = _parse_args(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command == "build":
        return cmd_build(args)
    if args.command == "check":
        return cmd_check(args)
    return cmd_amalgamate(args)


if __name__ == "__main__":
    sys.exit(main())
