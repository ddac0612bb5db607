"""Avoided-crossing gap scaling at the aligned/kink transition: per-size
exponents of gap ~ (B / N Jbar)^alpha and their linear dependence on N."""

import argparse

from ionspins.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-list", default="3,5,7,9")
    parser.add_argument("--beta", type=float, default=10.0)
    parser.add_argument("--samples", default="8")
    parser.add_argument("--out", default="out_gap_scaling")
    args = parser.parse_args()
    return cli_main(
        [
            "gap",
            "--n-list", args.n_list,
            "--beta", str(args.beta),
            "--samples", args.samples,
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    raise SystemExit(main())
