"""Command-line entry point ``abcs``.

Exit codes: 0 success, 1 a verification failed or an I/O error, 2 usage
error, 3 the run finished but its result is degenerate.
"""
from __future__ import annotations

import argparse
import functools
import math
import sys

import numpy as np

from ..divergence import (CapUniform, DegenerateSampleError, VonMisesFisher,
                          conditional_divergence_suite, equator_tail_experiment,
                          exact_divergence, random_bipartite_pair, renyi_mc)
from ..hashing import exhaustive_kwise_check
from ..linalg import (exact_bilinear, make_promise_instance, sample_haar_orthogonal,
                      sample_unit_vector)
from ..protocol import DEFAULT_NET_CAP, run_protocol_approx, run_protocol_decision, tradeoff_sweep
from ..rng import Rng
from ..sketch import DEFAULT_CAPACITY_FACTOR, AbcStreamer
from .io import (EQUATOR_SCHEMA, TRADEOFF_SCHEMA, RunConfig, StreamFile, write_csv)
from .parallel import parallel_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3

DEFAULTS = {
    "n": 64, "seed": 0, "eps": 0.25, "k": 3.0,
    "capacity_factor": DEFAULT_CAPACITY_FACTOR, "alpha": 2.0, "kappa": 2.0,
    "trials": 200,
}
BIPARTITE_ORDERS = (2.0, 4.0, 64.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _order(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"order must be positive, got {text}")
    return v


def _k_list(text: str) -> list[float]:
    try:
        out = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("k list is empty")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="abcs", description="Sketches and protocols for a^T B c.")
    p.add_argument("--config", help="JSON run config; flags override it")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-instance", help="write a promise instance as a stream file")
    g.add_argument("--n", type=int)
    g.add_argument("--label", type=int, choices=(-1, 1), default=1)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", dest="output", required=True)

    s = sub.add_parser("run-streaming", help="run the streaming decision algorithm on a file")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--text", action="store_true", help="input holds one value per line")
    s.add_argument("--capacity-factor", type=float)
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)

    r = sub.add_parser("run-protocol", help="simulate the three-player protocol")
    r.add_argument("--n", type=int)
    r.add_argument("--k", type=float)
    r.add_argument("--eps", type=float)
    r.add_argument("--seed", type=int)
    r.add_argument("--label", type=int, choices=(-1, 1), default=1)
    r.add_argument("--mode", choices=("decide", "approx"), default="decide")
    r.add_argument("--net-cap", type=int, default=DEFAULT_NET_CAP)

    w = sub.add_parser("sweep-tradeoff", help="charlie/bob bits against k")
    w.add_argument("--n", type=int)
    w.add_argument("--k-list", type=_k_list, default=[1.0, 2.0, 3.0, 4.0])
    w.add_argument("--seeds", type=int, dest="trials")
    w.add_argument("--seed", type=int)
    w.add_argument("--net-cap", type=int, default=DEFAULT_NET_CAP)
    w.add_argument("--out", dest="output", required=True)

    d = sub.add_parser("divergence", help="Monte Carlo Renyi divergence against uniform")
    _family_args(d)
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--allow-heavy", action="store_true")

    e = sub.add_parser("equator", help="random-equator restriction experiment")
    _family_args(e)
    e.add_argument("--t", type=float, default=0.3)
    e.add_argument("--trials", type=int)
    e.add_argument("--samples", type=int, default=10_000)
    e.add_argument("--out", dest="output", required=True)

    h = sub.add_parser("verify-hash", help="exhaustively check k-wise independence")
    h.add_argument("--k", type=int, required=True)
    h.add_argument("--m", type=int, required=True)
    h.add_argument("--order", type=int)

    b = sub.add_parser("verify-bipartite", help="check the conditional divergence bounds")
    b.add_argument("--size", type=int, default=4)
    b.add_argument("--campaigns", type=int, default=1000)
    b.add_argument("--ell", type=float, default=2.0)
    b.add_argument("--seed", type=int)
    return p


def _family_args(p):
    p.add_argument("--family", choices=("cap", "vmf"), default="vmf")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=_order)
    p.add_argument("--kappa", type=float)
    p.add_argument("--cap-measure", type=float, default=0.25)
    p.add_argument("--seed", type=int)


def _resolve(args) -> RunConfig:
    """Flags over config file over built-in defaults."""
    base = RunConfig(**DEFAULTS)
    if args.config:
        base = base.merged(vars(RunConfig.load(args.config)))
    flags = {k: getattr(args, k, None) for k in DEFAULTS}
    flags["command"] = args.command
    flags["output"] = getattr(args, "output", None)
    return base.merged(flags)


def _density(args, cfg: RunConfig):
    center = np.zeros(cfg.n)
    center[0] = 1.0
    if args.family == "cap":
        return CapUniform.with_measure(center, args.cap_measure)
    return VonMisesFisher(center, cfg.kappa)


def cmd_gen_instance(args, cfg, out) -> int:
    inst = make_promise_instance(cfg.n, args.label, Rng(cfg.seed))
    StreamFile.from_instance(inst).write(cfg.output)
    print(f"wrote n={cfg.n} label={args.label:+d} to {cfg.output}", file=out)
    return EXIT_OK


def cmd_run_streaming(args, cfg, out) -> int:
    if args.text:
        with open(args.input, encoding="utf-8") as fh:
            sf = StreamFile.from_text(fh.read())
    else:
        sf = StreamFile.read(args.input)
    st = AbcStreamer(sf.n, cfg.capacity_factor, args.reps, Rng(cfg.seed))
    for lo in range(0, sf.values.size, 1 << 16):
        st.feed(sf.values[lo:lo + (1 << 16)])
    decision, report = st.decide()
    print(f"{decision:+d}", file=out)
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK


def cmd_run_protocol(args, cfg, out) -> int:
    base = Rng(cfg.seed)
    if args.mode == "decide":
        inst = make_promise_instance(cfg.n, args.label, base.child(1))
        decision, tr = run_protocol_decision(inst, cfg.k, base.child(2), net_cap=args.net_cap)
        print(f"{decision:+d}", file=out)
        degenerate = False
    else:
        gen = base.child(1).generator()
        a, c = sample_unit_vector(cfg.n, gen), sample_unit_vector(cfg.n, gen)
        B = sample_haar_orthogonal(cfg.n, gen)
        est, tr = run_protocol_approx(a, B, c, cfg.eps, cfg.k, base.child(2), net_cap=args.net_cap)
        print(f"estimate={est:.12g}", file=out)
        print(f"exact={exact_bilinear(a, B, c):.12g}", file=out)
        degenerate = bool(tr.notes.get("aborted"))
    for who, bits in tr.totals.items():
        print(f"{who}_bits={bits}", file=out)
    print(f"net_size={tr.notes['net_size']}", file=out)
    print(f"alpha={tr.notes['alpha']:.12g}", file=out)
    if tr.notes.get("k_exceeds_n_over_4"):
        print("warning: k > n/4, the net guarantee does not apply", file=out)
    return EXIT_DEGENERATE if degenerate else EXIT_OK


def cmd_sweep_tradeoff(args, cfg, out) -> int:
    rows = tradeoff_sweep(cfg.n, args.k_list, cfg.trials, Rng(cfg.seed),
                          net_cap=args.net_cap, map_fn=parallel_map)
    write_csv([[r.k, r.net_size, r.charlie_bits, r.bob_bits, r.trials, r.error_rate]
               for r in rows], TRADEOFF_SCHEMA, cfg.output)
    for r in rows:
        print(f"k={r.k:g} charlie_bits={r.charlie_bits} bob_bits={r.bob_bits} "
              f"error_rate={r.error_rate:.4g}", file=out)
    return EXIT_OK


def cmd_divergence(args, cfg, out) -> int:
    spec = _density(args, cfg)
    try:
        est = renyi_mc(spec, cfg.alpha, args.samples, Rng(cfg.seed), allow_heavy=args.allow_heavy)
    except DegenerateSampleError as exc:
        print(f"degenerate: {exc}", file=out)
        return EXIT_DEGENERATE
    print(f"value={est.value:.12g}", file=out)
    print(f"stderr={est.stderr:.12g}", file=out)
    print(f"exact={exact_divergence(spec, cfg.alpha):.12g}", file=out)
    print(f"samples={est.samples}", file=out)
    return EXIT_OK


def cmd_equator(args, cfg, out) -> int:
    spec = _density(args, cfg)
    rep = equator_tail_experiment(spec, cfg.alpha, args.t, cfg.trials, Rng(cfg.seed),
                                  samples=args.samples, map_fn=parallel_map)
    write_csv([[i, tr.mass, tr.restricted.value, rep.full_divergence, tr.degenerate]
               for i, tr in enumerate(rep.records)], EQUATOR_SCHEMA, cfg.output)
    masses = np.array([tr.mass for tr in rep.records])
    print(f"tail_fraction={rep.tail_fraction:.12g}", file=out)
    print(f"degenerate={rep.degenerate}", file=out)
    print(f"mean_mass={masses.mean():.12g}", file=out)
    print(f"d_alpha_full={rep.full_divergence:.12g}", file=out)
    print(f"exponent={rep.exponent:.12g}", file=out)
    return EXIT_DEGENERATE if rep.degenerate else EXIT_OK


def cmd_verify_hash(args, cfg, out) -> int:
    ok = exhaustive_kwise_check(args.k, args.m, order=args.order)
    print("PASS" if ok else "FAIL", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _bipartite_campaign(size: int, ell: float, rng: Rng) -> int:
    f, g = random_bipartite_pair(size, size, rng)
    return sum(len(conditional_divergence_suite(f, g, a, ell).violations)
               for a in BIPARTITE_ORDERS)


def cmd_verify_bipartite(args, cfg, out) -> int:
    if not 1 <= args.size <= 12:
        raise UsageError("--size must lie in [1, 12]")
    base = Rng(cfg.seed)
    run = functools.partial(_bipartite_campaign, args.size, args.ell)
    violations = sum(parallel_map(run, [base.child(i) for i in range(args.campaigns)]))
    print(f"campaigns={args.campaigns} violations={violations}", file=out)
    print("PASS" if violations == 0 else "FAIL", file=out)
    return EXIT_OK if violations == 0 else EXIT_FAIL


COMMANDS = {
    "gen-instance": cmd_gen_instance,
    "run-streaming": cmd_run_streaming,
    "run-protocol": cmd_run_protocol,
    "sweep-tradeoff": cmd_sweep_tradeoff,
    "divergence": cmd_divergence,
    "equator": cmd_equator,
    "verify-hash": cmd_verify_hash,
    "verify-bipartite": cmd_verify_bipartite,
}


def cli_main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _resolve(args)
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FAIL


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
