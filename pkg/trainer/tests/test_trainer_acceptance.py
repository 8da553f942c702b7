"""End-to-end acceptance checks for the trainer package.

Each test appends one "[SECONDARY] <name>: PASS/FAIL (detail)" line
that the terminal summary echoes, then asserts, so a red run still
reports every criterion with its measured numbers.

The generator library appears only as the read-only parity oracle for
the loss components; everything else reaches it through batch files
and the command line.
"""

import time

import numpy as np
import torch

from pcpose.geometry import geodesic_distance as oracle_geodesic
from pcpose.metrics import chamfer_distance as oracle_chamfer

import helpers_data
from poselearn import (PoseNet, chamfer, evaluate_model, geodesic,
                       make_refine_fn, read_batch_files, tiny_config,
                       train)

# Frozen training budget for the desk-scale criterion; the bars are
# median rotation < 15 deg, median translation < 10 mm, mean
# reconstruction Chamfer < 5 mm on held-out segments, within 50 epochs
# and 30 minutes.  The step-decay milestones keep the fixed-rate Adam
# run from stalling in its oscillation band.
LEARN_EPOCHS = 50
LEARN_SEED = 77
LEARN_LR_STEPS = (25, 40)
LEARN_LR_GAMMA = 0.25


def record(name: str, ok: bool, detail: str) -> bool:
    verdict = "PASS" if ok else "FAIL"
    helpers_data.SECONDARY_LINES.append(
        f"[SECONDARY] {name}: {verdict} ({detail})")
    return ok


def test_gradient_check_tiny_preset():
    """Central-difference gradient verification at the tiny preset."""
    torch.manual_seed(21)
    cfg = tiny_config()
    net = PoseNet(cfg).double().eval()
    rng = np.random.default_rng(22)
    segments = torch.from_numpy(rng.normal(size=(2, cfg.points, 3)) * 0.05)
    class_ids = torch.tensor([0, 1])
    mu = torch.from_numpy(rng.normal(size=(2, 3)) * 0.02)
    target = torch.from_numpy(rng.normal(size=(2, cfg.points, 3)) * 0.05)
    rot = torch.from_numpy(rng.normal(size=(2, 3)) * 0.4)
    trans = torch.from_numpy(rng.normal(size=(2, 3)) * 0.02)

    checked, worst = helpers_data.finite_difference_check(
        net, segments, class_ids, mu, target, rot, trans, rng)
    ok = record("loss gradient check", checked == 20 and worst < 1e-3,
                f"worst rel err {worst:.2e} over {checked} parameters, "
                "tiny preset")
    assert ok


def test_permutation_invariance_and_loss_parity():
    """Latent codes ignore point order; loss components match the
    generator's metric implementations."""
    torch.manual_seed(31)
    cfg = tiny_config()
    net = PoseNet(cfg).eval()
    rng = np.random.default_rng(32)
    segments = torch.from_numpy(
        rng.normal(size=(3, cfg.points, 3)) * 0.05).float()
    class_ids = torch.tensor([0, 1, 0])

    with torch.no_grad():
        base = net.encode(segments, class_ids)
        perm_worst = 0.0
        for _ in range(5):
            perm = torch.from_numpy(rng.permutation(cfg.points))
            shuffled = net.encode(segments[:, perm, :], class_ids)
            perm_worst = max(perm_worst, float((base - shuffled).abs().max()))

    parity_worst = 0.0
    for _ in range(20):
        a = rng.normal(size=(rng.integers(20, 60), 3)) * 0.05
        b = rng.normal(size=(rng.integers(20, 60), 3)) * 0.05
        ours = float(chamfer(torch.from_numpy(a).unsqueeze(0),
                             torch.from_numpy(b).unsqueeze(0))[0])
        parity_worst = max(parity_worst, abs(ours - oracle_chamfer(a, b)))
    for _ in range(20):
        r1 = rng.normal(size=3) * rng.uniform(0.1, 1.0)
        r2 = rng.normal(size=3) * rng.uniform(0.1, 1.0)
        ours = float(geodesic(torch.from_numpy(r1).unsqueeze(0),
                              torch.from_numpy(r2).unsqueeze(0))[0])
        parity_worst = max(parity_worst, abs(ours - oracle_geodesic(r1, r2)))

    ok = record("permutation invariance and loss parity",
                perm_worst < 1e-5 and parity_worst < 1e-5,
                f"latent drift {perm_worst:.2e}, metric parity "
                f"{parity_worst:.2e}")
    assert ok


def test_desk_scale_learning(workspace):
    """Train the tiny preset on the synthesized two-class dataset and
    hold it to the error bars on held-out segments; ICP refinement
    through the generator CLI must not worsen mean ADD."""
    t0 = time.monotonic()
    model, history = train(workspace.train_files, tiny_config(),
                           seed=LEARN_SEED, epochs=LEARN_EPOCHS,
                           lr_steps=LEARN_LR_STEPS,
                           lr_gamma=LEARN_LR_GAMMA)
    train_minutes = (time.monotonic() - t0) / 60.0

    heldout = read_batch_files(workspace.heldout_files)
    report = evaluate_model(model, heldout, workspace.model_clouds)
    summary = report["summary"]
    rot_deg = np.degrees(summary["median_rotation_error"])
    trans_mm = summary["median_translation_error"] * 1000.0
    recon_mm = summary["mean_recon_chamfer"] * 1000.0

    # ICP leg on a slice of the held-out set; one CLI subprocess per
    # sample keeps this to a fraction of the training time.
    subset = _slice(heldout, 48)
    refined = evaluate_model(model, subset, workspace.model_clouds,
                             refine_fn=make_refine_fn(
                                 {c: str(p) for c, p in
                                  workspace.model_files.items()}))
    add_before = refined["summary"]["mean_add"]
    add_after = refined["summary"]["mean_add_refined"]

    ok = record(
        "desk-scale learning",
        (train_minutes <= 30.0 and LEARN_EPOCHS <= 50
         and rot_deg < 15.0 and trans_mm < 10.0 and recon_mm < 5.0
         and add_after <= add_before),
        f"{LEARN_EPOCHS} epochs in {train_minutes:.1f} min; held-out "
        f"median rot {rot_deg:.2f} deg, median trans {trans_mm:.2f} mm, "
        f"mean recon {recon_mm:.2f} mm; ICP mean ADD "
        f"{add_before * 1000:.2f} -> {add_after * 1000:.2f} mm on 48")
    assert ok
    assert all(np.isfinite(epoch["total"]) for epoch in history)


def _slice(data, count):
    import dataclasses
    return dataclasses.replace(
        data, **{name: getattr(data, name)[:count]
                 for name in ("class_ids", "means", "rotations",
                              "translations", "segments", "targets")})
