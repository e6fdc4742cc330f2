"""Priority-arranged grids: absolute protection for the top rank.

Builds the rank-staggered offset layout (each rank senses 40 us deeper into
the higher ranks' occupancy span), prints the materialized geometry, then
cross-checks the rank recursion p_ci = 1 - prod_{j<i}(1 - (1-p0)(1-p_cj))
against a seeded simulation.  Rank 1's sensing slot sits inside everyone
else's idle tail, so it records exactly zero drops.
"""

from fbesim import (priority_chain, run, ScenarioSpec, SchemeKind,
                    uniform_transmitters, validate_scenario)

Q = 5
P0 = 0.99
FRAMES = 2_000_000


def main() -> None:
    spec = ScenarioSpec(
        scheme=SchemeKind.PRIORITY_ARRANGED,
        transmitters=uniform_transmitters(Q, P0, k_max=0),
        base_period=1000, cot=650, priority_offset_step=40,
        horizon_frames=FRAMES, seed=7)
    scenario = validate_scenario(spec)
    print("materialized grids (rank = ue order):")
    for i, cfgs in enumerate(scenario.ue_configs):
        o = cfgs[0].offset
        print(f"  rank {i+1}: frames start at {o} us + k*1000, "
              f"senses [{(o - 25) % 1000}, {o or 1000}) us of each period")
    chain = priority_chain(P0, Q)
    res = run(scenario)
    print(f"\nrank  analytic   simulated  (drops/packets over {FRAMES} frames)")
    for i, (pc, ue) in enumerate(zip(chain, res.per_ue)):
        print(f"{i+1:<5} {pc:<10.5f} {ue.p_failure_emp:<10.5f} "
              f"({ue.drops}/{ue.packets})")
    assert res.per_ue[0].drops == 0, "top rank must never be blocked"
    print("\ntop rank recorded zero drops, as the geometry guarantees.")


if __name__ == "__main__":
    main()
