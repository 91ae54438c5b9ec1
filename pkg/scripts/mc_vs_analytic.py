"""Compare seeded Monte Carlo runs with the analytic pipeline, round by round.

    python3 scripts/mc_vs_analytic.py --q 0.05 0.1 0.13 --n-codes 1000000 --g 3
"""
import argparse
import math

from qpferqkd.rates import ProtocolVariant, symmetric
from qpferqkd.sim import SimConfig, run_protocol
from qpferqkd.solver import pipeline_stages


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, nargs="+", default=[0.05, 0.10, 0.13])
    ap.add_argument("--n-codes", type=int, default=1_000_000)
    ap.add_argument("--g", type=int, default=3)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--variant", choices=["four-state", "six-state"], default="four-state")
    args = ap.parse_args()

    for q in args.q:
        cfg = SimConfig(symmetric(q), ProtocolVariant(args.variant), n_codes=args.n_codes,
                        g=args.g, reps=args.reps, seed=args.seed, abort_threshold=0.99)
        rep = run_protocol(cfg)
        # true frames: compare against decode + rounds without the worst-case step
        stages = pipeline_stages(symmetric(q), ProtocolVariant.SIX_STATE, args.g)
        observed = [(rep.post_decode_empirical, rep.kept_after_parity)]
        observed += list(zip(rep.per_round_empirical, rep.per_round_survivors))
        print(f"q={q}  kept {rep.kept_after_parity}/{rep.sent} (analytic survival {stages[0].survival:.5f})")
        for k, ((emp, n), st) in enumerate(zip(observed, stages)):
            z = [
                (x - p) / math.sqrt(max(p * (1 - p), 1e-12) / n)
                for x, p in zip(emp.as_tuple(), st.rates.as_tuple())
            ]
            print(f"  round {k}: n={n:<8d} " + " ".join(f"{l}={x:.5f}({s:+.1f}σ)" for l, x, s in zip("IXYZ", emp.as_tuple(), z)))
        print(f"  final bit={rep.final_bit_flip_rate:.5f} phase={rep.final_phase_flip_rate:.5f} "
              f"converged={rep.converged} yield={rep.yield_:.3g}")


if __name__ == "__main__":
    main()
