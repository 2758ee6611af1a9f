"""Command-line front end.

Exit codes, uniform across subcommands:
  0  success (for ``verify``: every subset passed)
  1  domain rejection: inadmissible structure, unauthorized subset, protocol
     violation, or failed verification
  2  unreadable input: file missing or malformed
  3  capacity cap exceeded

Outputs are deterministic byte-for-byte for fixed (inputs, seed, flags).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import access, protocol, scheme
from ._backend import active_backend
from .sparse import MAX_QUBITS, SecretQubit, SparseEngineError, SparseState
from .tableau import TableauError


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Exit(2, f"cannot read {path}: {exc.strerror}") from exc


def _load_structure(path: str) -> access.AccessStructure:
    try:
        return access.parse_structure(_read(path))
    except access.AccessStructureError as exc:
        raise _Exit(2, f"{path}: {exc}") from exc


def _load_tree(path: str) -> scheme.SchemeTree:
    try:
        return scheme.parse_tree(_read(path))
    except scheme.SchemeError as exc:
        raise _Exit(2, f"{path}: {exc}") from exc


def _parse_secret(values: list[str]) -> SecretQubit:
    try:
        re_a, im_a, re_b, im_b = (float(v) for v in values)
        return SecretQubit(re_a + 1j * im_a, re_b + 1j * im_b)
    except (ValueError, SparseEngineError) as exc:
        raise _Exit(2, f"bad secret amplitudes: {exc}") from exc


def _subset_mask(tree: scheme.SchemeTree, spec_text: str) -> int:
    names = [p for chunk in spec_text.split(",") for p in chunk.split()]
    index = {lab: i for i, lab in enumerate(tree.labels)}
    mask = 0
    for name in names:
        if name not in index:
            raise _Exit(2, f"unknown player {name!r}; roster is {' '.join(tree.labels)}")
        mask |= 1 << index[name]
    return mask


def cmd_check(args) -> int:
    a = _load_structure(args.structure)
    admissible = a.is_quantum_admissible()
    maximal = admissible and a.is_maximal()
    payload = {
        "players": list(a.labels),
        "minimal_sets": [a.subset_name(m) for m in a.minimal_sets],
        "admissible": admissible,
        "maximal": maximal,
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("players:", " ".join(a.labels))
        print("normalized:", a.describe())
        if not admissible:
            print("not admissible: two authorized sets are disjoint")
        else:
            print("admissible,", "maximal" if maximal else "not maximal")
    return 0 if admissible else 1


def cmd_compile(args) -> int:
    a = _load_structure(args.structure)
    try:
        tree = scheme.compile_structure(a)
    except scheme.SchemeError as exc:
        msg = str(exc)
        code = 3 if "cap" in msg else 1
        raise _Exit(code, msg) from exc
    text = scheme.format_tree(tree)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)
    st = scheme.stats(tree)
    payload = {
        "output": args.output,
        "total_leaves": st.total_leaves,
        "discarded_leaves": st.discarded_leaves,
        "per_player": dict(st.per_player),
        "depth": st.depth,
        "encode_nodes": st.encode_nodes,
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"wrote {args.output}")
        print(f"leaves: {st.total_leaves} ({st.discarded_leaves} discarded)")
        print("per player:", " ".join(f"{k}={v}" for k, v in st.per_player))
        print(f"depth: {st.depth}  encode nodes: {st.encode_nodes}")
    return 0


def _pick_engine(choice: str, leaves: int) -> str:
    if choice == "auto":
        return "sparse" if leaves <= MAX_QUBITS else "stabilizer"
    return choice


def cmd_share(args) -> int:
    tree = _load_tree(args.tree)
    secret = _parse_secret(args.secret)
    engine = _pick_engine(args.engine, tree.leaf_count)
    try:
        session = protocol.share(secret, tree, engine=engine, seed=args.seed)
    except (protocol.ProtocolError, SparseEngineError, TableauError) as exc:
        raise _Exit(3, str(exc)) from exc
    if session.sparse is not None:
        text = session.sparse.dumps()
    else:
        reg = session.tableau.register
        lines = [session.tableau.dumps().rstrip("\n")]
        lines += [f"register {v.real:.17g} {v.imag:.17g}" for v in reg]
        text = "\n".join(lines) + "\n"
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {args.output} ({engine} engine, {tree.leaf_count} leaves)")
    return 0


def cmd_recover(args) -> int:
    tree = _load_tree(args.tree)
    mask = _subset_mask(tree, args.subset)
    try:
        state = SparseState.loads(_read(args.state), seed=args.seed)
    except SparseEngineError as exc:
        raise _Exit(2, f"{args.state}: {exc}") from exc
    if state.qubit_count != tree.leaf_count:
        raise _Exit(2, "state dump does not match the tree's leaf count")
    canon = protocol.canonical_tableau(tree)
    support = list(tree.leaves_of(mask))
    if not canon.recoverable(support):
        raise _Exit(1, f"subset {args.subset!r} is not authorized to recover")
    plan = canon.synthesize_recovery(support)
    for gate, qs in plan.gates:
        state.apply_gate(gate, *qs)
    rho = state.partial_trace([plan.target]).to_dense()
    vals, vecs = np.linalg.eigh(rho)
    purity = float(vals[-1])
    v = vecs[:, -1]
    lead = v[np.argmax(np.abs(v))]
    v = v * np.conj(lead) / abs(lead)
    payload = {
        "subset": args.subset,
        "target_leaf": plan.target,
        "alpha": [float(v[0].real), float(v[0].imag)],
        "beta": [float(v[1].real), float(v[1].imag)],
        "purity": purity,
    }
    if args.expect:
        want = _parse_secret(args.expect)
        fid = float(
            np.real(np.conj(want.as_vector()) @ rho @ want.as_vector())
        )
        payload["fidelity"] = fid
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"recovered on leaf {plan.target}: "
              f"alpha={v[0]:.12g} beta={v[1]:.12g} purity={purity:.12g}")
        if "fidelity" in payload:
            print(f"fidelity vs expected: {payload['fidelity']:.12g}")
    return 0


def cmd_run(args) -> int:
    tree = _load_tree(args.tree)
    try:
        program = protocol.parse_program(_read(args.circuit))
    except protocol.ProtocolError as exc:
        raise _Exit(2, f"{args.circuit}: {exc}") from exc
    engine = _pick_engine(
        args.engine,
        (len(program.secrets) + program.ancilla_budget) * tree.leaf_count,
    )
    try:
        result = protocol.run_circuit(program, tree, engine=engine, seed=args.seed)
    except protocol.ProtocolError as exc:
        raise _Exit(1, str(exc)) from exc
    payload = {
        "engine": engine,
        "measurements": {name: bit for name, bit in result.measurements},
        "records": [
            {
                "wire": r.wire,
                "parity": r.parity,
                "correction_applied": r.correction_applied,
                "bits": [bit for _, bit in r.leaf_outcomes],
            }
            for r in result.records
        ],
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"engine: {engine}")
        for rec in result.records:
            bits = "".join(str(b) for _, b in rec.leaf_outcomes)
            print(f"{rec.wire}: bits={bits} parity={rec.parity}"
                  + (" correction=SX" if rec.correction_applied else ""))
        for name, bit in result.measurements:
            print(f"measured {name} -> {bit}")
        if not result.records:
            print("no measurements")
    return 0


def cmd_verify(args) -> int:
    tree = _load_tree(args.tree)
    n = tree.player_count
    subsets = None
    if args.sample is not None:
        rng = np.random.default_rng(args.seed)
        subsets = sorted(
            int(s) for s in rng.choice(1 << n, size=min(args.sample, 1 << n),
                                       replace=False)
        )
    report = protocol.verify_scheme(
        tree, subsets=subsets, seed=args.seed, tolerance=args.tolerance
    )
    if args.json:
        payload = {
            "engine": report.engine,
            "leaves": report.tree_leaves,
            "all_passed": report.all_passed,
            "rows": [
                {
                    "subset": r.name,
                    "authorized": r.authorized,
                    "passed": r.passed,
                    "detail": r.detail,
                }
                for r in report.rows
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"engine: {report.engine}  leaves: {report.tree_leaves}")
        width = max(len(r.name) for r in report.rows)
        for r in report.rows:
            status = "PASS" if r.passed else "FAIL"
            kind = "authorized  " if r.authorized else "unauthorized"
            print(f"{r.name:<{width}}  {kind}  {status}  {r.detail}")
        passed = sum(r.passed for r in report.rows)
        print(f"{passed}/{len(report.rows)} PASS")
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steaneshare",
        description="Quantum secret sharing on concatenated seven-qubit codes.",
    )
    parser.add_argument(
        "--version", action="store_true", help="print version and backend"
    )
    sub = parser.add_subparsers(dest="command")

    def common(p, engine=True):
        p.add_argument("--seed", type=int, default=1, help="RNG seed (default 1)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if engine:
            p.add_argument(
                "--engine",
                choices=["auto", "sparse", "stabilizer"],
                default="auto",
                help="simulation engine (auto: sparse up to 26 leaves)",
            )

    p = sub.add_parser("check", help="validate an access-structure file")
    p.add_argument("structure")
    common(p, engine=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="compile a structure into a share tree")
    p.add_argument("structure")
    p.add_argument("-o", "--output", required=True, help="tree file to write")
    common(p, engine=False)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("share", help="share a secret under a tree")
    p.add_argument("tree")
    p.add_argument(
        "--secret", nargs=4, required=True, metavar=("RE_A", "IM_A", "RE_B", "IM_B")
    )
    p.add_argument("-o", "--output", required=True, help="state dump to write")
    common(p)
    p.set_defaults(func=cmd_share)

    p = sub.add_parser("recover", help="recover a secret from a sparse state dump")
    p.add_argument("tree")
    p.add_argument("state")
    p.add_argument("--set", dest="subset", required=True,
                   help="player subset, e.g. 'B,C'")
    p.add_argument("--expect", nargs=4, metavar=("RE_A", "IM_A", "RE_B", "IM_B"),
                   help="report fidelity against this secret")
    common(p, engine=False)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("run", help="run a logical circuit on shared secrets")
    p.add_argument("circuit")
    p.add_argument("--tree", required=True)
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="verify recoverability and secrecy per subset")
    p.add_argument("tree")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--all-subsets", action="store_true", default=True,
                       help="test every subset (default)")
    group.add_argument("--sample", type=int, default=None,
                       help="test a random sample of N subsets")
    p.add_argument("--tolerance", type=float, default=1e-9,
                   help="recovery fidelity tolerance (default 1e-9)")
    common(p, engine=False)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        from importlib.metadata import version

        print(f"steaneshare {version('steaneshare')} (kernels: {active_backend()})")
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
