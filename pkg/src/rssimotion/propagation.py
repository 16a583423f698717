"""Deterministic synthetic RSSI traces.

Large-scale loss follows the log-distance law::

    rssi(d) = rssi_at_d0 - 10 * n * log10(d / d0) - sum(static losses)

Transient obstructions (people, moving objects) subtract their insertion loss
while active, overlapping obstructions add in dB, and i.i.d. Gaussian noise in
dB is drawn from a generator seeded by the scenario. Output RSSI is quantised
to 0.01 dB, the resolution of the trace file format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rssimotion.core import RssiSample, parse_bssid
from rssimotion.errors import DomainError, RssiMotionError, ValidationError

FREE_SPACE_EXPONENT = 2.0
INDOOR_EXPONENT = 3.0
HUMAN_LOSS_DB = 12.0
WALL_LOSS_DB = 10.0
DEFAULT_NOISE_SIGMA_DB = 1.5
DEFAULT_SAMPLE_PERIOD_MS = 250

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class PathLossModel:
    rssi_at_d0: float
    d0_m: float = 1.0
    exponent_n: float = FREE_SPACE_EXPONENT

    def __post_init__(self) -> None:
        problems = self.violations()
        if problems:
            raise ValidationError(problems)

    def violations(self) -> list[str]:
        problems = []
        if not math.isfinite(self.rssi_at_d0):
            problems.append(f"rssi_at_d0 must be finite, got {self.rssi_at_d0!r}")
        if not (math.isfinite(self.d0_m) and self.d0_m > 0):
            problems.append(f"d0_m must be > 0, got {self.d0_m!r}")
        if not 1.5 <= self.exponent_n <= 6.0:
            problems.append(f"exponent_n must lie in [1.5, 6.0], got {self.exponent_n!r}")
        return problems

    @classmethod
    def calibrated(cls, rssi_dbm: float, distance_m: float, *, d0_m: float = 1.0,
                   exponent_n: float = FREE_SPACE_EXPONENT) -> PathLossModel:
        """Model whose prediction at ``distance_m`` equals ``rssi_dbm``."""
        return cls(rssi_dbm + 10.0 * exponent_n * math.log10(distance_m / d0_m), d0_m, exponent_n)

    @classmethod
    def indoor(cls, rssi_at_d0: float, d0_m: float = 1.0) -> PathLossModel:
        return cls(rssi_at_d0, d0_m, INDOOR_EXPONENT)


@dataclass(frozen=True)
class ObstructionEvent:
    """A transient obstruction active on ``start_ms <= t < end_ms``."""

    start_ms: int
    end_ms: int
    insertion_loss_db: float = HUMAN_LOSS_DB
    label: str = "human"

    def violations(self) -> list[str]:
        problems = []
        if not self.start_ms < self.end_ms:
            problems.append(f"obstruction {self.label!r}: start_ms must be < end_ms "
                            f"({self.start_ms} >= {self.end_ms})")
        if not (math.isfinite(self.insertion_loss_db) and self.insertion_loss_db >= 0):
            problems.append(f"obstruction {self.label!r}: insertion_loss_db must be >= 0, "
                            f"got {self.insertion_loss_db!r}")
        return problems

    def active(self, timestamps_ms: np.ndarray) -> np.ndarray:
        return (timestamps_ms >= self.start_ms) & (timestamps_ms < self.end_ms)


@dataclass(frozen=True)
class Scenario:
    bssid: str
    distance_m: float
    path_loss: PathLossModel
    static_losses_db: tuple[tuple[str, float], ...] = ()
    obstructions: tuple[ObstructionEvent, ...] = ()
    noise_sigma_db: float = DEFAULT_NOISE_SIGMA_DB
    sample_period_ms: int = DEFAULT_SAMPLE_PERIOD_MS
    duration_ms: int = 60_000
    seed: int = 0
    channel: int | None = None

    def __post_init__(self) -> None:
        # accept lists from JSON / callers, store tuples
        object.__setattr__(self, "static_losses_db",
                           tuple((str(lbl), float(loss)) for lbl, loss in self.static_losses_db))
        object.__setattr__(self, "obstructions", tuple(self.obstructions))

    def violations(self) -> list[str]:
        problems = []
        try:
            parse_bssid(self.bssid)
        except RssiMotionError as exc:
            problems.append(str(exc))
        problems.extend(self.path_loss.violations())
        if not (math.isfinite(self.distance_m) and self.distance_m >= self.path_loss.d0_m):
            problems.append(f"distance_m must be >= d0_m ({self.path_loss.d0_m}), got {self.distance_m!r}")
        for label, loss in self.static_losses_db:
            if not (math.isfinite(loss) and loss >= 0):
                problems.append(f"static loss {label!r} must be >= 0 dB, got {loss!r}")
        for ob in self.obstructions:
            problems.extend(ob.violations())
        if not (math.isfinite(self.noise_sigma_db) and self.noise_sigma_db >= 0):
            problems.append(f"noise_sigma_db must be >= 0, got {self.noise_sigma_db!r}")
        if not self.sample_period_ms > 0:
            problems.append(f"sample_period_ms must be > 0, got {self.sample_period_ms!r}")
        if not self.duration_ms > 0:
            problems.append(f"duration_ms must be > 0, got {self.duration_ms!r}")
        elif self.sample_period_ms > 0 and self.duration_ms < self.sample_period_ms:
            problems.append("duration_ms must be >= sample_period_ms")
        if not -(1 << 63) <= self.seed <= _SEED_MASK:
            problems.append(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.channel is not None and self.channel <= 0:
            problems.append(f"channel must be positive, got {self.channel!r}")
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ValidationError(problems)

    @property
    def total_static_loss_db(self) -> float:
        return sum(loss for _, loss in self.static_losses_db)

    def timestamps(self) -> np.ndarray:
        count = -(-self.duration_ms // self.sample_period_ms)
        return np.arange(count, dtype=np.int64) * self.sample_period_ms


def expected_rssi(model: PathLossModel, distance_m: float, static_losses_db: float = 0.0) -> float:
    """Noise-free RSSI at ``distance_m`` behind ``static_losses_db`` of permanent loss."""
    if not distance_m >= model.d0_m:
        raise DomainError(f"distance {distance_m!r} m is inside the reference distance {model.d0_m} m")
    return model.rssi_at_d0 - 10.0 * model.exponent_n * math.log10(distance_m / model.d0_m) - static_losses_db


def quantize_db(values: np.ndarray) -> list[float]:
    # text round trip guarantees the value survives a 2-decimal file exactly
    return [float(f"{v:.2f}") for v in values.tolist()]


def noiseless_levels(scenario: Scenario) -> np.ndarray:
    """Unquantised noise-free RSSI at every sample timestamp."""
    scenario.validate()
    ts = scenario.timestamps()
    level = expected_rssi(scenario.path_loss, scenario.distance_m, scenario.total_static_loss_db)
    levels = np.full(ts.shape, level, dtype=float)
    for ob in scenario.obstructions:
        levels[ob.active(ts)] -= ob.insertion_loss_db
    return levels


def simulate(scenario: Scenario) -> list[RssiSample]:
    levels = noiseless_levels(scenario)
    if scenario.noise_sigma_db > 0:
        rng = np.random.default_rng(scenario.seed & _SEED_MASK)
        levels = levels + rng.normal(0.0, scenario.noise_sigma_db, levels.shape)
    bssid = parse_bssid(scenario.bssid)
    ts = scenario.timestamps().tolist()
    return [RssiSample(t, bssid, v, scenario.channel) for t, v in zip(ts, quantize_db(levels))]


# JSON mapping ---------------------------------------------------------------

_SCENARIO_KEYS = {"bssid", "distance_m", "path_loss", "static_losses_db", "obstructions",
                  "noise_sigma_db", "sample_period_ms", "duration_ms", "seed", "channel"}
_REQUIRED_SCENARIO_KEYS = {"bssid", "distance_m", "path_loss", "duration_ms"}
_MODEL_KEYS = {"rssi_at_d0", "d0_m", "exponent_n"}
_OBSTRUCTION_KEYS = {"start_ms", "end_ms", "insertion_loss_db", "label"}
_STATIC_KEYS = {"label", "loss_db"}


def _check_keys(obj, allowed: set[str], required: set[str], where: str, problems: list[str]) -> bool:
    if not isinstance(obj, dict):
        problems.append(f"{where}: expected an object, got {type(obj).__name__}")
        return False
    for key in sorted(set(obj) - allowed):
        problems.append(f"{where}: unknown key {key!r}")
    for key in sorted(required - set(obj)):
        problems.append(f"{where}: missing key {key!r}")
    return True


def _number(obj: dict, key: str, where: str, problems: list[str], default=None, integer=False):
    value = obj.get(key, default)
    if integer:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"{where}.{key}: expected an integer, got {value!r}")
            return default
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{where}.{key}: expected a number, got {value!r}")
        return default
    return float(value)


def model_from_dict(obj) -> PathLossModel:
    problems: list[str] = []
    if _check_keys(obj, _MODEL_KEYS, {"rssi_at_d0"}, "path_loss", problems) and "rssi_at_d0" in obj:
        rssi_at_d0 = _number(obj, "rssi_at_d0", "path_loss", problems)
        d0_m = _number(obj, "d0_m", "path_loss", problems, 1.0)
        exponent_n = _number(obj, "exponent_n", "path_loss", problems, FREE_SPACE_EXPONENT)
        if not problems:
            return PathLossModel(rssi_at_d0, d0_m, exponent_n)
    raise ValidationError(problems)


def model_to_dict(model: PathLossModel) -> dict:
    return {"rssi_at_d0": model.rssi_at_d0, "d0_m": model.d0_m, "exponent_n": model.exponent_n}


def scenario_from_dict(obj) -> Scenario:
    """Build a Scenario from its JSON form, reporting every violation at once."""
    problems: list[str] = []
    if not _check_keys(obj, _SCENARIO_KEYS, _REQUIRED_SCENARIO_KEYS, "scenario", problems) or any(
        "missing key" in p for p in problems
    ):
        raise ValidationError(problems)
    try:
        model = model_from_dict(obj["path_loss"])
    except ValidationError as exc:
        problems.extend(exc.violations)
        model = None

    statics = []
    for i, item in enumerate(obj.get("static_losses_db", [])):
        where = f"static_losses_db[{i}]"
        if _check_keys(item, _STATIC_KEYS, _STATIC_KEYS, where, problems):
            statics.append((str(item.get("label", "")), _number(item, "loss_db", where, problems, 0.0)))
    obstructions = []
    for i, item in enumerate(obj.get("obstructions", [])):
        where = f"obstructions[{i}]"
        if _check_keys(item, _OBSTRUCTION_KEYS, {"start_ms", "end_ms"}, where, problems):
            obstructions.append(ObstructionEvent(
                _number(item, "start_ms", where, problems, 0, integer=True),
                _number(item, "end_ms", where, problems, 0, integer=True),
                _number(item, "insertion_loss_db", where, problems, HUMAN_LOSS_DB),
                str(item.get("label", "human")),
            ))
    bssid = obj["bssid"]
    if not isinstance(bssid, str):
        problems.append(f"scenario.bssid: expected a string, got {bssid!r}")
    channel = obj.get("channel")
    if channel is not None and (isinstance(channel, bool) or not isinstance(channel, int)):
        problems.append(f"scenario.channel: expected an integer, got {channel!r}")
    scalars = dict(
        distance_m=_number(obj, "distance_m", "scenario", problems, 1.0),
        noise_sigma_db=_number(obj, "noise_sigma_db", "scenario", problems, DEFAULT_NOISE_SIGMA_DB),
        sample_period_ms=_number(obj, "sample_period_ms", "scenario", problems,
                                 DEFAULT_SAMPLE_PERIOD_MS, integer=True),
        duration_ms=_number(obj, "duration_ms", "scenario", problems, 1, integer=True),
        seed=_number(obj, "seed", "scenario", problems, 0, integer=True),
    )
    if problems:
        raise ValidationError(problems)
    scenario = Scenario(bssid=bssid, path_loss=model, static_losses_db=tuple(statics),
                        obstructions=tuple(obstructions), channel=channel, **scalars)
    scenario.validate()
    return scenario


def scenario_to_dict(scenario: Scenario) -> dict:
    out = {
        "bssid": scenario.bssid,
        "distance_m": scenario.distance_m,
        "path_loss": model_to_dict(scenario.path_loss),
        "static_losses_db": [{"label": lbl, "loss_db": loss} for lbl, loss in scenario.static_losses_db],
        "obstructions": [
            {"start_ms": ob.start_ms, "end_ms": ob.end_ms,
             "insertion_loss_db": ob.insertion_loss_db, "label": ob.label}
            for ob in scenario.obstructions
        ],
        "noise_sigma_db": scenario.noise_sigma_db,
        "sample_period_ms": scenario.sample_period_ms,
        "duration_ms": scenario.duration_ms,
        "seed": scenario.seed,
    }
    if scenario.channel is not None:
        out["channel"] = scenario.channel
    return out
