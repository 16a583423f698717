"""Scenarios for the reference LOS and through-wall experiments.

Each fixture pins the clear-path level and the obstructed plateaus to the
measured dBm values; the path-loss model is calibrated backwards from the
clear level so the noiseless trace sits exactly on it. Every fixture starts
with 15 s of clear signal so the detector can calibrate.
"""

from __future__ import annotations

from rssimotion.errors import ValidationError
from rssimotion.propagation import (
    DEFAULT_NOISE_SIGMA_DB,
    DEFAULT_SAMPLE_PERIOD_MS,
    WALL_LOSS_DB,
    ObstructionEvent,
    PathLossModel,
    Scenario,
)

FIXTURE_BSSID = "02:00:00:00:00:01"

# (distance m, clear level dBm, walls, [(start s, length s, drop dB, label)], duration s)
_TABLE = {
    "fig5_los_2p5m": (2.5, -50.0, (), [(15, 8, 15.0, "human")], 60),
    "fig6_los_5p3m": (5.3, -52.0, (), [(15, 8, 12.0, "human")], 60),
    "fig7_two_people": (5.3, -53.0, (), [
        (15, 6, 9.0, "human-A"),
        (55, 6, 11.0, "human-B"),
    ], 95),
    # one 250 ms sample
    "fig8_fast_crossing": (2.5, -50.0, (), [(20, 0.25, 11.0, "human-fast")], 60),
    "fig9_wall": (4.0, -55.0, (("concrete-wall", WALL_LOSS_DB),), [
        (15, 4, 5.0, "wall-crossing-receiver-side"),
        (50, 4, 15.0, "wall-crossing-AP-side"),
    ], 90),
    "fig10_wall_repeated": (4.0, -51.0, (("concrete-wall", WALL_LOSS_DB),), [
        (15, 1.5, 10.0, "wall-crossing-receiver-side"),
        (21, 1.5, 19.0, "wall-crossing-AP-side"),
        (27, 1.5, 10.0, "wall-crossing-receiver-side"),
        (33, 1.5, 19.0, "wall-crossing-AP-side"),
    ], 70),
}

FIXTURE_IDS = tuple(_TABLE)


def experiment_fixture(name: str) -> Scenario:
    """Return the scenario for one of :data:`FIXTURE_IDS`."""
    try:
        distance, clear_dbm, walls, events, duration_s = _TABLE[name]
    except KeyError:
        raise ValidationError(
            f"unknown fixture {name!r}; valid ids: {', '.join(FIXTURE_IDS)}"
        ) from None
    wall_total = sum(loss for _, loss in walls)
    model = PathLossModel.calibrated(clear_dbm + wall_total, distance)
    obstructions = tuple(
        ObstructionEvent(int(start * 1000), int((start + length) * 1000), loss, label)
        for start, length, loss, label in events
    )
    return Scenario(
        bssid=FIXTURE_BSSID,
        distance_m=distance,
        path_loss=model,
        static_losses_db=walls,
        obstructions=obstructions,
        noise_sigma_db=DEFAULT_NOISE_SIGMA_DB,
        sample_period_ms=DEFAULT_SAMPLE_PERIOD_MS,
        duration_ms=duration_s * 1000,
        seed=0,
    )
