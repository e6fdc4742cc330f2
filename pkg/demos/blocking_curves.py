"""Closed-form blocking curves: how retry opportunities buy reliability.

Walks the fixed point p_c = 1 - (1 - (1-p0)(1-p_c^m))^(Q-1) across system
sizes and attempt budgets, printing the per-packet channel-access failure
probability p_c^m.  With a single sensing opportunity per packet the failure
probability sits near 1e-2 for just two transmitters; a second staggered
opportunity pushes the same operating point to ~1e-4.
"""

from fbesim import p_failure, solve_pc

P0 = 0.99
QS = range(2, 11)
ATTEMPTS = (1, 2, 3, 4)


def main() -> None:
    header = "Q     " + "".join(f"m={m:<12}" for m in ATTEMPTS)
    print(f"per-packet failure probability at p0={P0}")
    print(header)
    for q in QS:
        cells = []
        for m in ATTEMPTS:
            pc = solve_pc(P0, m, q)
            cells.append(f"{p_failure(pc, m):<12.3e}")
        print(f"{q:<6}" + "".join(cells))
    print()
    print("single point with its pieces, Q=2, m=2:")
    pc = solve_pc(P0, 2, 2)
    print(f"  blocking per attempt p_c = {pc:.6e}")
    print(f"  per-packet failure p_c^2 = {p_failure(pc, 2):.6e}")


if __name__ == "__main__":
    main()
