"""Run both maneuver courses at dt=1e-3 and print the worst cross-track error.

The printed value is the oracle behind CROSS_TRACK_BOUND and the square-course
regression in tests/test_sim.py. Rerun after touching the controller.
"""

import argparse

from magclimb.experiments import CROSS_TRACK_BOUND, Scenario, ScenarioConfig, run_maneuver_course


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dt", type=float, default=1e-3)
    args = parser.parse_args()

    res = run_maneuver_course(ScenarioConfig(Scenario.MANEUVER_COURSE, dt=args.dt))
    for row in res.rows:
        print(f"{row['course']:<8} completed={row['completed']} max_cross_track={row['max_cross_track_m']:.6f} m "
              f"time_per_m={row['time_per_m_s']:.4f} s/m")
    worst = max(row["max_cross_track_m"] for row in res.rows)
    print(f"worst={worst:.6f} m  bound={CROSS_TRACK_BOUND} m  within={worst <= CROSS_TRACK_BOUND}")


if __name__ == "__main__":
    main()
