"""Oscillation period of the log-capacitor LC circuit against initial charge.

At small amplitude the period approaches that of the linearised circuit,
2 pi sqrt(L Q0 / V0); larger charges probe the exponential stiffening.
"""

import argparse
import math

import numpy as np

from htoda.circuit import make_log_capacitor_circuit, simulate_lc
from htoda.dynamics import measure_period
from htoda.serialize import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=1.0)
    ap.add_argument("--Q0", type=float, default=1.0)
    ap.add_argument("--V0", type=float, default=1.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--T", type=float, default=40.0)
    ap.add_argument("--amplitudes", default="0.001,0.01,0.1,0.3,0.6,1.0,1.5")
    ap.add_argument("--out", default="lc_period.csv")
    args = ap.parse_args()

    spec = make_log_capacitor_circuit(args.L, args.Q0, args.V0)
    linear = 2 * math.pi * math.sqrt(args.L * args.Q0 / args.V0)
    rows = []
    for amp in (float(a) for a in args.amplitudes.split(",")):
        traj = simulate_lc(spec, amp, 0.0, args.dt, int(round(args.T / args.dt)))
        period = measure_period(traj.t, traj.q[:, 0])
        rows.append([amp, period, period / linear])
        print(f"Q(0)={amp:<6g} period {period:.6f}  ratio to linear {period / linear:.5f}")
    write_csv(args.out, ["Q_initial", "period", "ratio_to_linear"], np.array(rows))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
