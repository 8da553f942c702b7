"""Pull a slightly-wrong pose onto an observed segment with ICP.

Point-to-point ICP with a shrinking match radius (1 cm decaying 10% per
iteration, 10 iterations) cleans up small pose errors in a couple of
milliseconds.  The capture basin is small on purpose: the radius
schedule rejects far-away pairings, so a grossly wrong initialization
simply finds no matches and survives unchanged instead of diverging.
"""

import time

import numpy as np

from pcpose import (
    IcpSchedule,
    Pose,
    apply_pose,
    geodesic_distance,
    icp_point_to_point,
    identity_pose,
)


def main() -> None:
    rng = np.random.default_rng(21)
    model = rng.normal(size=(256, 3))
    model *= 0.06 / np.abs(model).max()

    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    truth = Pose(axis * np.radians(1.5), [0.003, -0.002, 0.001])
    observed = apply_pose(truth, model)

    schedule = IcpSchedule(iterations=10, initial_radius=0.01, decay=0.9)
    print("match radius per iteration (m):",
          np.round([schedule.radius(i) for i in range(10)], 5))

    t0 = time.perf_counter()
    result = icp_point_to_point(model, observed, identity_pose(), schedule)
    ms = (time.perf_counter() - t0) * 1000

    rot_err = np.degrees(geodesic_distance(truth.rotation,
                                           result.refined.rotation))
    trans_err = np.linalg.norm(np.subtract(truth.translation,
                                           result.refined.translation))
    print(f"\nstarted 1.5 deg / ~4 mm off, refined in {ms:.1f} ms:")
    print(f"  rotation error    {rot_err:.4f} deg")
    print(f"  translation error {trans_err * 1000:.4f} mm")
    print(f"  final rmse {result.final_rmse:.2e} m, "
          f"matched {result.matched_fraction:.0%}")

    # Move the target a meter away: nothing inside the radius, so the
    # initial pose is returned untouched.
    far = icp_point_to_point(model, observed + [1.0, 0.0, 0.0],
                             identity_pose(), schedule)
    print(f"\ntarget 1 m away: matched {far.matched_fraction:.0%}, "
          f"pose unchanged "
          f"{np.allclose(far.refined.rotation, [0, 0, 0])}, "
          f"rmse {far.final_rmse}")


if __name__ == "__main__":
    main()
