"""Command line harness: simulate, verify, threshold, codes, bounds.

Exit codes: 0 success, 1 protocol abort or failed check, 2 bad input.
Data goes to stdout (or ``--out``); progress goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import bounds as bd
from . import gf2codes as gf2
from . import protocol as pr
from .errors import CapacityError, InputError
from .evesim import attacks as atk
from .evesim import conditional as cond
from .evesim import parity

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _progress(done, total):
    print(f"  {done}/{total}", file=sys.stderr)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_seed(args):
    if args.seed is None:
        raise InputError("--seed is required for this command")


def _attack_list(spec: str | None) -> list[str]:
    names = [a.strip() for a in (spec or "").split(",") if a.strip()]
    if not names:
        raise InputError("empty attack list")
    return names


# --------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    _require_seed(args)
    params = pr.ProtocolParams(args.n, args.p_allowed, args.eps_rel, args.eps_sec, args.m)
    names = _attack_list(args.attack)
    if len(names) != 1:
        raise InputError("simulate takes exactly one attack")
    adversary = atk.attack_by_name(names[0])
    if args.code:
        code, pa = gf2.read_code(args.code)
        if pa is None:
            raise InputError("code file carries no PA masks")
    else:
        code, pa = pr.default_code(params)
    print(f"simulate: {args.trials} trials of {names[0]}", file=sys.stderr)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", pr.ContractWarning)
        runs = pr.run_campaign(params, code, pa, adversary, args.seed, args.trials, args.workers,
                               progress=_progress)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    summary = {"attack": names[0], "seed": args.seed, **pr.summarize(runs)}
    lines = [tr.to_json() for tr in runs] if args.transcripts else []
    lines.append(json.dumps({"summary": summary}))
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if summary["pass_rate"] > 0 else EXIT_FAIL


# --------------------------------------------------------------------------
# verify

def _resolve_joint(name: str, D: int, rng, symmetrize: bool):
    a = atk.random_attack(D, 1, rng) if name == "random" else atk.attack_by_name(name)
    a = atk.as_joint(a, D)
    if symmetrize and not a.symmetrized:
        a = atk.symmetrize(a)
    return a


def _contexts(D: int):
    n = D // 2
    for b in range(1 << D):
        for s in cond.all_splits(D):
            for i_T in range(1 << n):
                for j_T in range(1 << n):
                    yield b, s, i_T, j_T


def verify_attack(a, n: int, alphas=(0.01, 0.05, 0.1, 0.5, 1.0)) -> dict:
    """Largest residual of every lemma-level check for one joint attack."""
    D = 2 * n
    ch = cond.AttackChannel(a)
    res = dict.fromkeys(["eta_orthogonality", "info_vs_disturbance", "eta_completeness",
                         "phi_shift_invariance", "test_prob_independence", "bound_chain"], 0.0)
    code = gf2.CodeSpec.full_space(n)
    masks = [gf2.from_int(v, n) for v in range(1, 1 << n)]
    for b, s, i_T, j_T in _contexts(D):
        P = cond.test_outcome_probabilities(a, b, s, i_T, channel=ch)
        if P[:, j_T].min() <= 1e-12:
            continue
        res["test_prob_independence"] = max(res["test_prob_independence"], float(np.ptp(P[:, j_T])))
        tab = cond.conditional_states(a, b, s, i_T, j_T, channel=ch)
        phis = cond.purify(tab)
        eta = cond.eta_decompose(phis)
        res["eta_orthogonality"] = max(res["eta_orthogonality"], eta.overlap_residual())
        res["eta_completeness"] = max(res["eta_completeness"], abs(eta.d_sq.sum() - 1))
        res["phi_shift_invariance"] = max(res["phi_shift_invariance"], cond.phi_shift_residual(phis))
        pc = cond.conjugate_error_distribution(a, b, s, i_T, j_T, channel=ch)
        res["info_vs_disturbance"] = max(res["info_vs_disturbance"], float(np.abs(pc - eta.d_sq).max()))
        for v in masks:
            ens = parity.parity_density_matrices(phis, code, [], v)
            tr = parity.trace_distinguishability(ens)
            for al in alphas:
                tight = parity.sd_bound_tight(eta, gf2.weight(v), al)
                res["bound_chain"] = max(res["bound_chain"], tr - tight)
    return res


def _sym_preserves_errors(name, D, rng) -> float:
    a = _resolve_joint(name, D, rng, symmetrize=False)
    if a.symmetrized or a.total_qubits + D > 12:
        return 0.0
    s = atk.symmetrize(a)
    return max(float(np.abs(cond.error_distribution(a, b) - cond.error_distribution(s, b)).max())
               for b in range(1 << D))


def cmd_verify(args) -> int:
    _require_seed(args)
    names = _attack_list(args.attack)
    if args.n not in (1, 2):
        raise InputError("verify enumerates exhaustively and needs n in {1, 2}")
    rng = np.random.default_rng(args.seed)
    D = 2 * args.n
    report = []
    for name in names:
        for k in range(args.trials if name == "random" else 1):
            label = f"{name}#{k}" if name == "random" else name
            state = rng.bit_generator.state
            a = _resolve_joint(name, D, rng, symmetrize=not args.no_symmetrize)
            print(f"verify: {label} ({a.total_qubits} qubits)", file=sys.stderr)
            res = verify_attack(a, args.n)
            rng.bit_generator.state = state
            res["symmetrization_preserves_errors"] = _sym_preserves_errors(name, D, rng)
            checks = {key: {"max_residual": float(val), "passed": bool(val <= TOL)} for key, val in res.items()}
            if args.n == 1 and a.symmetrized:
                avg = bd.empirical_average_information(1, a)
                checks["averaged_information"] = {"lhs": avg.lhs, "rhs": avg.rhs, "passed": avg.holds}
            report.append({"attack": label, "symmetrized": a.symmetrized, "checks": checks})
    all_passed = all(c["passed"] for r in report for c in r["checks"].values())
    _emit(args, json.dumps({"seed": args.seed, "n": args.n, "all_passed": all_passed,
                            "results": report}, indent=2) + "\n")
    if args.expect_fail:
        return EXIT_OK if not all_passed else EXIT_FAIL
    return EXIT_OK if all_passed else EXIT_FAIL


# --------------------------------------------------------------------------
# threshold

CSV_COLUMNS = ["p_a", "secret_rate", "g1", "g2", "feasible"]


def threshold_rows(start, stop, step, n, r_over_n, m_over_n, eps_rel, eps_sec) -> list[dict]:
    if step <= 0 or not 0 <= start <= stop <= 0.25:
        raise InputError("need 0 <= start <= stop <= 0.25 and step > 0")
    rows = []
    for p in np.arange(start, stop + step / 2, step):
        p = round(float(p), 12)
        rep = bd.rate_report(p, n, r_over_n, m_over_n, eps_rel, eps_sec)
        rows.append({"p_a": p, "secret_rate": bd.secret_rate(p), "g1": rep.g1, "g2": rep.g2,
                     "feasible": rep.feasible})
    return rows


def cmd_threshold(args) -> int:
    rows = threshold_rows(args.start, args.stop, args.step, args.n, args.r_over_n, args.m_over_n,
                          args.eps_rel, args.eps_sec)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({"threshold": bd.threshold_solve(), "rows": rows}, indent=2) + "\n"
    _emit(args, text)
    return EXIT_OK


# --------------------------------------------------------------------------
# codes

def cmd_codes(args) -> int:
    if args.certify:
        code, pa = gf2.read_code(args.certify)
        out = {"n": code.n, "k": code.k, "d": gf2.min_distance(code)}
        if pa is not None:
            hv, dd = gf2.pa_distances(code, pa)
            out.update(hat_v=hv, d_dagger=dd)
        _emit(args, json.dumps(out) + "\n")
        return EXIT_OK
    _require_seed(args)
    rng = np.random.default_rng(args.seed)
    print(f"codes: searching ({args.n}, r={args.r}) with d >= {args.min_d}", file=sys.stderr)
    try:
        code = gf2.search_code(args.n, args.r, args.min_d, rng, max_tries=args.trials)
    except RuntimeError as exc:
        print(f"codes: {exc}", file=sys.stderr)
        return EXIT_FAIL
    pa = None
    if args.masks:
        pa = _random_masks(code, args.masks, rng)
    if args.format == "json":
        out = {"n": code.n, "k": code.k, "d": code.d, "t": code.t,
               "H": [gf2.to_str(row) for row in code.H]}
        if pa is not None:
            out.update(masks=[gf2.to_str(v) for v in pa.masks], hat_v=pa.hat_v, d_dagger=pa.d_dagger)
        text = json.dumps(out) + "\n"
    else:
        text = gf2.dumps_code(code, pa)
    _emit(args, text)
    return EXIT_OK


def _random_masks(code, m, rng):
    for _ in range(10_000):
        masks = rng.integers(0, 2, (m, code.n), dtype=np.uint8)
        if gf2.rank(np.vstack([code.H, masks])) == code.r + m:
            return gf2.make_pa(code, masks)
    raise InputError("could not draw independent PA masks")


# --------------------------------------------------------------------------
# bounds

def cmd_bounds(args) -> int:
    f = args.formula
    if f == "h2":
        out = {"p": args.p, "h2": bd.h2(args.p)}
    elif f == "hoeffding":
        out = {"n": args.n, "eps": args.eps, "bound": bd.hoeffding_tail(args.n, args.eps, args.one_sided)}
    elif f == "gallager":
        rn = 0.5 if args.r_over_n is None else args.r_over_n
        out = {"n": args.n, "r_over_n": rn, "delta": args.delta,
               "c_delta": bd.gallager_constant(args.delta),
               "raw": bd.gallager_failure(args.n, rn, args.delta, raw=True),
               "bound": bd.gallager_failure(args.n, rn, args.delta)}
    elif f == "rate":
        rep = bd.rate_report(args.p_a, args.n, args.r_over_n, args.m_over_n, args.eps_rel, args.eps_sec)
        out = json.loads(rep.to_json())
        out["secret_rate"] = bd.secret_rate(args.p_a)
    elif f == "criterion":
        out = json.loads(bd.criterion_constants(args.m, args.eps_sec, args.eps_rel).to_json())
    elif f == "sd":
        alpha = args.alpha if args.alpha is not None else args.tail ** 0.5
        if alpha <= 0:
            raise InputError("alpha must be positive")
        tight = alpha + args.tail / alpha
        out = {"alpha": alpha, "tail": args.tail, "sd_tight": tight, "sd_loose": 2 ** args.r * tight,
               "m_total": parity.total_info_bound(args.m, alpha, args.tail)}
    elif f == "threshold":
        p = bd.threshold_solve()
        out = {"threshold": p, "residual": bd.h2(2 * p) + bd.h2(p) - 1}
    else:
        raise InputError(f"unknown formula {f}")
    _emit(args, json.dumps(out) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parsing

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qkdlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--config", help="key=value file; command-line flags win")

    s = sub.add_parser("simulate", help="run protocol campaigns")
    common(s)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--p-allowed", type=float, default=0.1)
    s.add_argument("--eps-rel", type=float, default=0.05)
    s.add_argument("--eps-sec", type=float, default=0.05)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--attack", default="identity")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--code", help="code file (n k / rows / PA m / masks)")
    s.add_argument("--transcripts", action="store_true", help="emit every transcript as a JSON line")
    s.add_argument("--format", choices=["json"], default="json")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="exhaustive lemma checks")
    common(v)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--attack", default="identity,swap,random")
    v.add_argument("--trials", type=int, default=3, help="number of random attacks")
    v.add_argument("--no-symmetrize", action="store_true")
    v.add_argument("--expect-fail", action="store_true")
    v.add_argument("--format", choices=["json"], default="json")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("threshold", help="p_a sweep of rate and feasibility")
    common(t)
    t.add_argument("--n", type=int, default=10**6)
    t.add_argument("--r-over-n", type=float, help="parity-check fraction (default: balanced)")
    t.add_argument("--m-over-n", type=float, default=0.0)
    t.add_argument("--eps-rel", type=float, default=1e-6)
    t.add_argument("--eps-sec", type=float, default=1e-6)
    t.add_argument("--start", type=float, default=0.0)
    t.add_argument("--stop", type=float, default=0.1)
    t.add_argument("--step", type=float, default=0.005)
    t.add_argument("--format", choices=["json", "csv"], default="csv")
    t.set_defaults(func=cmd_threshold)

    c = sub.add_parser("codes", help="random linear code search and certification")
    common(c)
    c.add_argument("--n", type=int, default=15)
    c.add_argument("--r", type=int, default=12)
    c.add_argument("--min-d", type=int, default=7)
    c.add_argument("--masks", type=int, default=0)
    c.add_argument("--trials", type=int, default=100_000, help="maximum codes to draw")
    c.add_argument("--certify", help="report d, hat_v and d_dagger of a code file")
    c.add_argument("--format", choices=["text", "json"], default="text")
    c.set_defaults(func=cmd_codes)

    b = sub.add_parser("bounds", help="evaluate one formula")
    common(b)
    b.add_argument("formula", choices=["h2", "hoeffding", "gallager", "rate", "criterion", "sd",
                                       "threshold"])
    b.add_argument("--p", type=float, default=0.5)
    b.add_argument("--p-a", type=float, default=0.05)
    b.add_argument("--n", type=int, default=200)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--one-sided", action="store_true")
    b.add_argument("--r-over-n", type=float, help="default: balanced for rate, 0.5 for gallager")
    b.add_argument("--m-over-n", type=float, default=0.1)
    b.add_argument("--delta", type=float, default=0.2)
    b.add_argument("--eps-rel", type=float, default=0.01)
    b.add_argument("--eps-sec", type=float, default=0.01)
    b.add_argument("--m", type=int, default=1)
    b.add_argument("--alpha", type=float)
    b.add_argument("--tail", type=float, default=0.0)
    b.add_argument("--r", type=int, default=0)
    b.set_defaults(func=cmd_bounds)
    return p


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{ln}: expected key=value")
            key, val = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _apply_config(parser, argv, args):
    conf = read_config(args.config)
    sp = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sp._actions}
    unknown = sorted(set(conf) - set(known) - {"config"})
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    typed = {}
    for k, v in conf.items():
        act = known[k]
        if isinstance(act, argparse._StoreTrueAction):
            typed[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            typed[k] = v   # argparse applies the type to string defaults
    sp.set_defaults(**typed)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.func(args)
    except (UsageError, InputError, CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
