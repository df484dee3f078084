#!/usr/bin/env python3
"""Duality residuals |delta + E_P - S(B)| on random pure three-qubit states."""

import argparse

import numpy as np

from wiretap.measures import duality_residual
from wiretap.optimize import OptimizerConfig
from wiretap.qcore import DensityOperator, LabeledSpace


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--restarts", type=int, default=5)
    parser.add_argument("--max-iters", type=int, default=1500)
    args = parser.parse_args()

    gen = np.random.default_rng(args.seed)
    space = LabeledSpace.of(("Ap", 2), ("Bp", 2), ("Cp", 2))
    cfg = OptimizerConfig(seed=args.seed, restarts=args.restarts, max_iters=args.max_iters)
    residuals = []
    for i in range(args.count):
        v = gen.standard_normal(8) + 1j * gen.standard_normal(8)
        v /= np.linalg.norm(v)
        psi = DensityOperator(space, np.outer(v, v.conj()))
        r = duality_residual(psi, cfg=cfg)
        residuals.append(r)
        print(f"state {i}: residual {r:.3e}")
    print(f"max residual over {args.count} states: {max(residuals):.3e}")


if __name__ == "__main__":
    main()
