"""Per-instance objective gaps of the ADMM fits against the grid and vertex oracles.

    python scripts/oracle_check.py --instances 10
"""
import argparse

from panda_lda.cli import oracle_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for r in oracle_report(args.instances, (1, 2, 3), args.seed)["records"]:
        print(f"p={r['p']} {r['method']:6s} objective {r['objective']:.6f} oracle {r['oracle']:.6f}"
              f" gap {r['gap']:.1e} violation {r['violation']:.1e}")


if __name__ == "__main__":
    main()
