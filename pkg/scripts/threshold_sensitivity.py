"""Threshold for every family/variant plus the eta, g_max and r_max sweep.

Also reports the plain two-way pipeline (no 2-qubit code) for comparison.

    python3 scripts/threshold_sensitivity.py [--out reports/thresholds.json]
"""
import argparse
import pathlib

from qpferqkd.cli import dumps
from qpferqkd.rates import FamilyKind, ProtocolVariant
from qpferqkd.solver import sensitivity_table, threshold

CASES = [
    (FamilyKind.SYMMETRIC, ProtocolVariant.FOUR_STATE),
    (FamilyKind.SYMMETRIC, ProtocolVariant.SIX_STATE),
    (FamilyKind.ASYMMETRIC_NO_Y, ProtocolVariant.FOUR_STATE),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("reports/thresholds.json"))
    args = ap.parse_args()

    out = []
    for family, variant in CASES:
        coded = threshold(family, variant)
        plain = threshold(family, variant, decode=False)
        rows = sensitivity_table(family, variant)
        name = f"{family.value}/{variant.value}"
        print(f"{name}: q*={coded.q_star:.5f} rate={coded.threshold_bit_flip_rate:.5f} "
              f"witness=(g={coded.witness_schedule.g}, reps={coded.witness_schedule.reps}) "
              f"plain rate={plain.threshold_bit_flip_rate:.5f}")
        for r in rows:
            print(f"    {r['parameter']:>6}={r['value']:<10} rate={r['threshold_bit_flip_rate']:.5f}")
        out.append({
            "case": name,
            "q_star": coded.q_star,
            "threshold_bit_flip_rate": coded.threshold_bit_flip_rate,
            "witness": {"g": coded.witness_schedule.g, "reps": coded.witness_schedule.reps},
            "plain_threshold_bit_flip_rate": plain.threshold_bit_flip_rate,
            "sensitivity": rows,
        })
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(dumps({"cases": out}))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
