"""Command-line front end.

Every command prints one JSON report::

    {"command": ..., "inputs": ..., "verdict": "pass|fail|info|error",
     "details": ..., "witnesses": ...}

Exit status: 0 for pass/info, 1 when a check fails, 2 for usage or input
errors.  Inputs come from ``--in FILE`` or standard input; a report produced
by another command is accepted wherever the object it carries is expected,
so commands compose in pipelines (``gen P ... | poset verify-P``).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Callable

from . import construct, cutspace, lattice, poset, topology
from .errors import (
    NotALattice,
    NotDistributive,
    NotSeparablePrecondition,
    PosetKitError,
)
from .exact import parse_fraction


class InputError(Exception):
    """Bad or missing input; maps to exit status 2."""


EXIT = {"pass": 0, "info": 0, "fail": 1, "error": 2}


def report(command: str, inputs: dict, verdict: str, details: Any = None, witnesses: Any = None) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "verdict": verdict,
        "details": {} if details is None else details,
        "witnesses": [] if witnesses is None else witnesses,
    }


# ---------------------------------------------------------------------------
# input helpers


def _read_json(args) -> Any:
    src = getattr(args, "infile", None)
    try:
        if src in (None, "-"):
            if src is None and sys.stdin.isatty():
                raise InputError("no input: pass --in FILE or pipe JSON on stdin")
            text = sys.stdin.read()
        else:
            with open(src, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {src}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def _read_file(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load {path}: {exc}") from exc


def _unwrap(data: Any, key: str) -> Any:
    """Pull ``key`` out of a report's details, or return data unchanged."""
    if isinstance(data, dict) and "command" in data and "details" in data:
        details = data["details"]
        if isinstance(details, dict) and key in details:
            return details[key]
        raise InputError(f"report from {data['command']!r} carries no {key!r}")
    return data


def _poset(data: Any, cap: int) -> poset.FinitePoset:
    data = _unwrap(data, "poset")
    if not isinstance(data, dict) or "elements" not in data:
        raise InputError("expected poset JSON {elements, le}")
    return poset.from_json(data, cap=cap)


def _ids(text: str | None) -> list[str]:
    if not text:
        return []
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _space(data: Any, P: poset.FinitePoset | None, topo_name: str) -> topology.FiniteSpace:
    if data is not None:
        if not isinstance(data, dict) or "universe" not in data:
            raise InputError("expected space JSON {universe, subbase}")
        return topology.space_from_json(data)
    if P is None:
        raise InputError("no space given")
    if topo_name == "discrete":
        return topology.discrete_space(P)
    if topo_name == "indiscrete":
        return topology.indiscrete_space(P)
    return topology.interval_topology(P)


def _fragment(args) -> cutspace.Fragment:
    if getattr(args, "infile", None) is not None:
        data = _unwrap(_read_json(args), "fragment")
        try:
            return cutspace.fragment_from_json(data)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed fragment JSON: {exc}") from exc
    if args.depth is None or args.width is None:
        raise InputError("give --in FRAGMENT or both --depth and --width")
    rats = None
    if args.rationals:
        rats = [parse_fraction(t) for t in args.rationals.split(",")]
    return cutspace.build_fragment(args.depth, args.width, rats, seed=args.seed, cap=args.cap)


def _inputs(args, *names: str) -> dict:
    out = {}
    for n in names:
        v = getattr(args, n, None)
        if v is not None:
            out[n] = v
    return out


# ---------------------------------------------------------------------------
# poset


def cmd_poset_components(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    part = poset.order_components(P)
    blocks = [list(b) for b in part.blocks]
    return report("poset components", _inputs(args, "infile"), "info",
                  {"components": len(blocks), "blocks": blocks})


def _cone(kind: str) -> Callable:
    def run(args) -> dict:
        P = _poset(_read_json(args), args.cap)
        ids = _ids(args.ids)
        fn = poset.down_set if kind == "downset" else poset.up_set
        return report(f"poset {kind}", _inputs(args, "infile", "ids"), "info", {"set": list(fn(P, ids))})
    return run


def cmd_poset_interval(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    if args.x is None or args.y is None:
        raise InputError("interval needs --x and --y")
    return report("poset interval", _inputs(args, "infile", "x", "y"), "info",
                  {"set": list(poset.interval(P, args.x, args.y))})


def cmd_poset_iso(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    if args.other is None:
        raise InputError("iso needs --other FILE")
    Q = _poset(_read_file(args.other), args.cap)
    m = poset.find_isomorphism(P, Q, seed=args.seed)
    details = {"isomorphic": m is not None}
    if m is not None:
        details["mapping"] = {k: m[k] for k in P.elements}
    return report("poset iso", _inputs(args, "infile", "other", "seed"), "pass" if m else "fail", details)


def cmd_poset_verify_p(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    try:
        checks = construct.verify_P(P)
    except ValueError as exc:
        raise InputError(f"not a P(n,w) truncation: {exc}") from exc
    n, w = construct.infer_parameters(P)
    ok = all(c.ok for c in checks)
    return report("poset verify-P", {**_inputs(args, "infile"), "depth": n, "width": w},
                  "pass" if ok else "fail", {"checks": [c.to_json() for c in checks]})


# ---------------------------------------------------------------------------
# lattice


def _lattice_or_poset(data: Any, cap: int):
    data = _unwrap(data, "lattice") if isinstance(data, dict) and "command" in data and "lattice" in data.get("details", {}) else data
    if isinstance(data, dict) and "poset" in data and "elements" not in data:
        inner = _unwrap(data["poset"], "poset") if isinstance(data["poset"], dict) else data["poset"]
        return "lattice", poset.from_json(inner, cap=cap)
    return "poset", _poset(data, cap)


def _as_lattice(P: poset.FinitePoset) -> lattice.FiniteLattice:
    return lattice.lattice_from_poset(P)


def cmd_lattice_check(args) -> dict:
    _, P = _lattice_or_poset(_read_json(args), args.cap)
    try:
        L = _as_lattice(P)
    except NotALattice as exc:
        return report("lattice check", _inputs(args, "infile"), "fail", {"lattice": False, "error": str(exc)})
    rep = lattice.check_bounded_distributive(L)
    return report("lattice check", _inputs(args, "infile"), "pass" if rep.ok else "fail",
                  {"lattice": True, **rep.to_json()},
                  [list(v) for v in rep.violations[:1]])


def _distributive_or_fail(command: str, args, L) -> dict | None:
    rep = lattice.check_bounded_distributive(L)
    if rep.ok:
        return None
    return report(command, _inputs(args, "infile"), "fail",
                  {"error": "NotDistributive", **rep.to_json()},
                  [list(v) for v in rep.violations[:1]])


def cmd_lattice_ideals(args) -> dict:
    _, P = _lattice_or_poset(_read_json(args), args.cap)
    L = _as_lattice(P)
    bad = _distributive_or_fail("lattice ideals", args, L)
    if bad:
        return bad
    primes = lattice.prime_ideals(L)
    jirr = lattice.join_irreducibles(L)
    return report("lattice ideals", _inputs(args, "infile"), "info", {
        "prime_ideals": [list(p) for p in primes],
        "join_irreducibles": list(jirr),
        "counts_agree": len(primes) == len(jirr),
    })


def cmd_lattice_spectrum(args) -> dict:
    _, P = _lattice_or_poset(_read_json(args), args.cap)
    L = _as_lattice(P)
    bad = _distributive_or_fail("lattice spectrum", args, L)
    if bad:
        return bad
    S = lattice.prime_spectrum_poset(L)
    return report("lattice spectrum", _inputs(args, "infile"), "info", {"poset": S.to_json(), "size": len(S)})


def cmd_lattice_roundtrip(args) -> dict:
    kind, P = _lattice_or_poset(_read_json(args), args.cap)
    if kind == "poset":
        mapping = lattice.round_trip_poset(P)
        details = {"direction": "poset -> lattice -> poset", "mapping": mapping}
    else:
        L = _as_lattice(P)
        bad = _distributive_or_fail("lattice roundtrip", args, L)
        if bad:
            return bad
        mapping = lattice.round_trip_lattice(L)
        details = {"direction": "lattice -> poset -> lattice", "mapping": mapping}
    return report("lattice roundtrip", _inputs(args, "infile"), "pass", details)


# ---------------------------------------------------------------------------
# topology


def cmd_topo_subbase(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    return report("topo subbase", _inputs(args, "infile"), "info",
                  {"subbase": [list(s) for s in topology.interval_subbase(P)]})


def cmd_topo_generate(args) -> dict:
    data = _read_json(args)
    if not isinstance(data, dict) or "universe" not in data:
        raise InputError("expected {universe, subbase}")
    T = topology.generate_topology([str(u) for u in data["universe"]],
                                   [[str(e) for e in s] for s in data.get("subbase", [])],
                                   cap=args.cap if args.cap_given else topology.MATERIALIZE_CAP)
    opens = T.open_sets()
    return report("topo generate", _inputs(args, "infile"), "info",
                  {"opens": [list(o) for o in opens], "count": len(opens)})


def cmd_topo_cover(args) -> dict:
    P = _poset(_read_json(args), args.cap)
    cert = topology.certify_subbasic_cover(P, _ids(args.A), _ids(args.B))
    details = cert.to_json()
    details["witness_covers"] = cert.kind == topology.NOT_A_COVER or topology.witness_covers(P, cert)
    ok = details["witness_covers"] and (cert.kind != topology.CROSS or len(cert.witness) <= 2)
    return report("topo cover-certify", _inputs(args, "infile", "A", "B"), "info" if ok else "fail",
                  details, details["witness"])


def cmd_topo_priestley(args) -> dict:
    data = _read_json(args)
    if isinstance(data, dict) and "poset" in data and "elements" not in data:
        P = _poset(data["poset"], args.cap)
        T = _space(data.get("space"), P, args.topology)
    else:
        P = _poset(data, args.cap)
        T = _space(None, P, args.topology)
    rep = topology.check_priestley(P, T)
    return report("topo priestley", {**_inputs(args, "infile"), "topology": args.topology if "space" not in (data or {}) else "given"},
                  "pass" if rep.ok else "fail", {k: v for k, v in rep.to_json().items() if k != "witnesses"},
                  rep.to_json()["witnesses"])


def cmd_topo_union(args) -> dict:
    data = _read_json(args)
    if not isinstance(data, dict) or "parts" not in data:
        raise InputError("expected {parts: [{poset, space?}, ...]}")
    parts = []
    for item in data["parts"]:
        P = _poset(item["poset"] if "poset" in item else item, args.cap)
        parts.append((P, _space(item.get("space") if "poset" in item else None, P, "discrete")))
    if args.k is None or args.x is None:
        raise InputError("union-subbase needs --k and --x")
    U = topology.union_subbase(parts, args.k, args.x)
    rep = topology.check_priestley(U.poset, U.space, with_witnesses=False)
    details = U.to_json()
    details["priestley"] = {k: v for k, v in rep.to_json().items() if k != "witnesses"}
    return report("topo union-subbase", _inputs(args, "infile", "k", "x"), "pass" if rep.ok else "fail", details)


# ---------------------------------------------------------------------------
# generation


def cmd_gen_p(args) -> dict:
    if args.depth is None or args.width is None:
        raise InputError("gen P needs --depth and --width")
    P = construct.generate_P(args.depth, args.width, cap=args.cap)
    return report("gen P", _inputs(args, "depth", "width"), "info", {"poset": P.to_json(), "size": len(P)})


# ---------------------------------------------------------------------------
# cut space


def _frag_inputs(args, F: cutspace.Fragment) -> dict:
    return {
        **_inputs(args, "infile"),
        "depth": F.depth,
        "width": F.width,
        "seed": F.seed,
        "rationals": [str(r) for r in F.rationals],
    }


def cmd_cut_build(args) -> dict:
    F = _fragment(args)
    problems = cutspace.check_invariants(F)
    return report("cutspace build", _frag_inputs(args, F), "pass" if not problems else "fail",
                  {"fragment": F.to_json(), "points": len(F.points), "invariant_violations": problems})


def cmd_cut_iso(args) -> dict:
    F = _fragment(args)
    rep = cutspace.order_iso_check(F, seed=args.seed)
    return report("cutspace iso", _frag_inputs(args, F), "pass" if rep.ok else "fail", rep.to_json())


def cmd_cut_separate(args) -> dict:
    F = _fragment(args)
    if args.u is None or args.v is None:
        raise InputError("separate needs --u and --v")
    try:
        u, v = cutspace.parse_point(args.u, F), cutspace.parse_point(args.v, F)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    U, case = cutspace.explain_witness(F, u, v)
    u_in, v_in = cutspace.membership(u, U), cutspace.membership(v, U)
    dec = cutspace.is_decreasing(F, U)
    ok = u_in and not v_in and dec
    return report("cutspace separate", {**_frag_inputs(args, F), "u": u.label, "v": v.label},
                  "pass" if ok else "fail",
                  {"case": case, "u_in": u_in, "v_in": v_in, "decreasing": dec},
                  {"blocks": U.to_json()})


def cmd_cut_sweep(args) -> dict:
    F = _fragment(args)
    rep = cutspace.sweep(F)
    return report("cutspace sweep", _frag_inputs(args, F), "pass" if rep.ok else "fail", rep.to_json())


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, *, fragment: bool = False):
    p.add_argument("--in", dest="infile", metavar="FILE", help="input JSON (default: stdin)")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    p.add_argument("--pretty", action="store_true", help="human-readable text instead of JSON")
    p.add_argument("--seed", type=int, default=0, help="seed for search order and placement (default 0)")
    p.add_argument("--cap", type=int, default=None, help="universe size cap")
    if fragment:
        p.add_argument("--depth", type=int)
        p.add_argument("--width", type=int)
        p.add_argument("--rationals", metavar="S0,S1,...", help="enumeration prefix as fractions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posetkit", description="Finite order theory and duality toolkit.")
    groups = parser.add_subparsers(dest="group", required=True, metavar="GROUP")

    g = groups.add_parser("poset", help="poset queries").add_subparsers(dest="action", required=True, metavar="ACTION")
    p = g.add_parser("components"); _common(p); p.set_defaults(func=cmd_poset_components)
    for kind in ("downset", "upset"):
        p = g.add_parser(kind); _common(p); p.add_argument("--ids", default="", help="comma-separated ids")
        p.set_defaults(func=_cone(kind))
    p = g.add_parser("interval"); _common(p); p.add_argument("--x"); p.add_argument("--y")
    p.set_defaults(func=cmd_poset_interval)
    p = g.add_parser("iso"); _common(p); p.add_argument("--other", metavar="FILE")
    p.set_defaults(func=cmd_poset_iso)
    p = g.add_parser("verify-P"); _common(p); p.set_defaults(func=cmd_poset_verify_p)

    g = groups.add_parser("lattice", help="lattice duality").add_subparsers(dest="action", required=True, metavar="ACTION")
    for name, fn in (("check", cmd_lattice_check), ("ideals", cmd_lattice_ideals),
                     ("spectrum", cmd_lattice_spectrum), ("roundtrip", cmd_lattice_roundtrip)):
        p = g.add_parser(name); _common(p); p.set_defaults(func=fn)

    g = groups.add_parser("topo", help="finite topology").add_subparsers(dest="action", required=True, metavar="ACTION")
    p = g.add_parser("subbase"); _common(p); p.set_defaults(func=cmd_topo_subbase)
    p = g.add_parser("generate"); _common(p); p.set_defaults(func=cmd_topo_generate)
    p = g.add_parser("cover-certify"); _common(p)
    p.add_argument("--A", default="", help="ids a giving X\\(a]"); p.add_argument("--B", default="", help="ids b giving X\\[b)")
    p.set_defaults(func=cmd_topo_cover)
    p = g.add_parser("priestley"); _common(p)
    p.add_argument("--topology", choices=("discrete", "indiscrete", "interval"), default="discrete",
                   help="topology when the input is a bare poset")
    p.set_defaults(func=cmd_topo_priestley)
    p = g.add_parser("union-subbase"); _common(p); p.add_argument("--k", type=int); p.add_argument("--x")
    p.set_defaults(func=cmd_topo_union)

    g = groups.add_parser("gen", help="generators").add_subparsers(dest="action", required=True, metavar="ACTION")
    p = g.add_parser("P"); _common(p, fragment=True); p.set_defaults(func=cmd_gen_p)

    g = groups.add_parser("cutspace", help="cut-space fragment").add_subparsers(dest="action", required=True, metavar="ACTION")
    for name, fn in (("build", cmd_cut_build), ("iso", cmd_cut_iso), ("sweep", cmd_cut_sweep)):
        p = g.add_parser(name); _common(p, fragment=True); p.set_defaults(func=fn)
    p = g.add_parser("separate"); _common(p, fragment=True)
    p.add_argument("--u", help="point: empty, full, (0,r), (0,r], gap:a|b or x[...]")
    p.add_argument("--v")
    p.set_defaults(func=cmd_cut_separate)
    return parser


def _pretty(obj: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, ensure_ascii=False)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict) and v:
                lines.append(f"{pad}-")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v, ensure_ascii=False)}")
    else:
        lines.append(f"{pad}{json.dumps(obj, ensure_ascii=False)}")
    return lines


def render(rep: dict, pretty: bool) -> str:
    if pretty:
        head = f"{rep['command']}: {rep['verdict'].upper()}"
        body = _pretty({k: rep[k] for k in ("inputs", "details", "witnesses") if rep[k]})
        return "\n".join([head, *body]) + "\n"
    return json.dumps(rep, ensure_ascii=False) + "\n"


_NOT_ECHOED = {"func", "group", "action", "out", "pretty", "cap_given"}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.cap_given = args.cap is not None
    if args.cap is None:
        args.cap = poset.DEFAULT_UNIVERSE_CAP
    command = f"{args.group} {args.action}"
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in _NOT_ECHOED and v is not None and v != ""}
    try:
        rep = args.func(args)
    except InputError as exc:
        rep = report(command, echo, "error", {"error": "InputError", "message": str(exc)})
    except (NotALattice, NotDistributive) as exc:
        rep = report(command, echo, "fail", {"error": type(exc).__name__, "message": str(exc)})
    except NotSeparablePrecondition as exc:
        rep = report(command, echo, "error", {"error": type(exc).__name__, "message": str(exc)})
    except (PosetKitError, ValueError, KeyError, IndexError) as exc:
        rep = report(command, echo, "error", {"error": type(exc).__name__, "message": str(exc)})
    text = render(rep, args.pretty)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT[rep["verdict"]]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
