"""End-to-end tour: scenario file -> validation -> simulation -> CSV.

Writes a small scenario config, parses and validates it (watch a broken one
get rejected with the violated constraint named), runs seeded replications,
and persists the comparison row the sweep tooling would emit.
"""

import tempfile
from pathlib import Path

from fbesim import parse_scenario_file, validate_scenario, errors
from fbesim.experiments import run_replications, summarize_point, write_csv

GOOD = """\
scheme = priority_arranged
q = 4
p0 = 0.95
k_max = 0
period_us = 1000
cot_us = 650
priority_offset_us = 40
horizon_frames = 500000
seed = 11
"""

BAD = GOOD.replace("q = 4", "q = 10")  # ten staggered slots no longer fit


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        good = tmp / "ranked.cfg"
        good.write_text(GOOD)
        spec = parse_scenario_file(good)
        scenario = validate_scenario(spec)
        print(f"validated: q={scenario.q}, offsets="
              f"{[c[0].offset for c in scenario.ue_configs]}")

        bad = tmp / "crowded.cfg"
        bad.write_text(BAD)
        try:
            validate_scenario(parse_scenario_file(bad))
        except errors.InfeasibleIdlePeriod as exc:
            print(f"rejected as expected: InfeasibleIdlePeriod: {exc}")

        merged = run_replications(scenario, spec.horizon_frames,
                                  seeds=[11, 12], workers=1)
        for u in merged.per_ue:
            print(f"  rank {u.ue_id+1}: {u.drops}/{u.packets} dropped, "
                  f"mean alignment {u.mean_alignment_us:.0f} us")
        rows = summarize_point(spec, merged, seed=11)
        out = tmp / "ranked.csv"
        write_csv(rows, out)
        print("\ncsv written:")
        print(out.read_text(), end="")


if __name__ == "__main__":
    main()
