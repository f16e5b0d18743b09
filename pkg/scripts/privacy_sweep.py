#!/usr/bin/env python3
"""Algebraic privacy audit of every shipped scheme on a grid, with the canned
mutations as negative controls.  Writes one JSON record per (scheme, params).

    python3 scripts/privacy_sweep.py --max-n 5 --out results/privacy.json
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from liftpir import audit as A
from liftpir.oneshot import make_scheme
from liftpir.refine import refined_length
from liftpir.retrieval import lifted_config
from liftpir.storage import StorageConfig


def builders(N, K, T, M):
    cfg = lifted_config(N, K, T, M)
    yield "lifted", cfg, A.lifted_builder(cfg)
    os_cfg = StorageConfig(N, K, T, M, K)
    yield "one_shot", os_cfg, A.one_shot_builder(make_scheme(os_cfg))
    if M == 2:
        ref = StorageConfig(N, K, T, 2, refined_length(N, K))
        yield "refined", ref, A.refined_builder(make_scheme(ref))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--max-k", type=int, default=2)
    ap.add_argument("--max-t", type=int, default=2)
    ap.add_argument("--max-m", type=int, default=4)
    ap.add_argument("--max-length", type=int, default=500, help="skip instances with larger L")
    ap.add_argument("--out", type=Path, default=Path("results/privacy.json"))
    args = ap.parse_args()

    records = []
    for N in range(2, args.max_n + 1):
        for K in range(1, min(args.max_k, N - 1) + 1):
            for T in range(1, min(args.max_t, N - K) + 1):
                for M in range(1, args.max_m + 1):
                    for name, cfg, b in builders(N, K, T, M):
                        if cfg.L > args.max_length:
                            continue
                        t0 = time.perf_counter()
                        honest = A.audit_privacy(b, cfg).passed
                        caught = {}
                        for kind in A.MUTATIONS:
                            try:
                                caught[kind] = not A.audit_privacy(A.mutated(b, kind), cfg).passed
                            except ValueError:
                                caught[kind] = None  # nothing to mutate (e.g. M = 1)
                        records.append({"scheme": name, "N": N, "K": K, "T": T, "M": M, "L": cfg.L,
                                        "honest_pass": honest, "mutations_caught": caught,
                                        "seconds": round(time.perf_counter() - t0, 3)})
                        print(f"{name:8s} N={N} K={K} T={T} M={M} L={cfg.L:4d} "
                              f"honest={'pass' if honest else 'FAIL'} caught={caught}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(records, indent=1))
    bad = [r for r in records if not r["honest_pass"]]
    print(f"{len(records)} audits, {len(bad)} honest failures -> {args.out}")


if __name__ == "__main__":
    main()
