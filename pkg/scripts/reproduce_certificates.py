"""Build, verify and audit the reference certificates.

Writes certificate JSON and audit CSV files into the output directory and
prints one summary line per certificate.

    python scripts/reproduce_certificates.py --out runs/certificates
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from dimlab.audit import default_battery, empirical_agreement_audit, standard_probes
from dimlab.construction import (BVParams, HolderParams, StaircasePlan, build_bv_certificate,
                                 build_holder_certificate, center_from_spec)
from dimlab.serialize import dump_json
from dimlab.verify import certificate_to_json, verify_certificate


def run(name, cert, out: Path, battery_size: int, seed: int, jobs: int) -> bool:
    t = time.time()
    checks = verify_certificate(cert)
    probes = standard_probes(cert, n_random=2, seed=seed)
    battery = default_battery(cert, probes, size=battery_size, seed=seed)
    audit = empirical_agreement_audit(cert, battery, probes, jobs=jobs)
    dump_json(certificate_to_json(cert), out / f"{name}.json")
    (out / f"{name}.audit.csv").write_text(audit.to_csv())
    ok = cert.accepted and all(c.ok for c in checks) and audit.ok
    worst = max((r.max_meets for r in audit.rows), default=0)
    cost = max((r.cover_cost for r in audit.rows), default=0.0)
    print(f"{name}: (m,k)=({cert.plan.m},{cert.plan.k}) accepted={cert.accepted} "
          f"checks={sum(c.ok for c in checks)}/{len(checks)} audit_pairs={len(audit.rows)} "
          f"max_meets={worst} max_cost={cost:.4f} {'OK' if ok else 'FAILED'} "
          f"[{time.time() - t:.1f}s]")
    return ok


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/certificates")
    ap.add_argument("--battery", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    zero = center_from_spec("constant:c=0")
    holder = HolderParams("1/2", 2, 1, 1)
    bv = BVParams(2, 1, 1)
    results = [
        run("holder_solved", build_holder_certificate(holder, zero), out,
            args.battery, args.seed, args.jobs),
        run("holder_2000_7", build_holder_certificate(holder, zero, StaircasePlan(2000, 7, 1)),
            out, args.battery, args.seed, args.jobs),
        run("bv_solved", build_bv_certificate(bv, zero), out, args.battery, args.seed, args.jobs),
    ]
    return 0 if all(results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
