"""Mamdani fuzzy inference for incremental PID gain scheduling.

Inputs are the tracking error and its rate, normalised onto [-1, 1] and
fuzzified over seven uniformly spaced triangular sets (NB, NM, NS, ZO, PS,
PM, PB). A 7x7 rule table per output gain fires with min-AND, aggregates
with max, and defuzzifies by centroid on a fixed 201-point output grid.
The scaled centroid is an additive gain delta.

Rule tables live in a plain-text grid file; see data/fuzzy_rules.txt for
the format. Tables for the kp and ki outputs must be antisymmetric under
(e, edot) -> (-e, -edot); the loader rejects tables that are not.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError
from .pid import GainBounds, PidGains, clamp_gains
from .validation import check_finite, check_positive

LEVEL_NAMES = ("NB", "NM", "NS", "ZO", "PS", "PM", "PB")
_LEVEL_INDEX = {name: i for i, name in enumerate(LEVEL_NAMES)}
_N_LEVELS = 7
_GRID_POINTS = 201


class TriangularPartition:
    """Uniform triangular sets with half overlap over a closed interval.

    Neighbouring memberships are computed as complementary pairs, so they
    sum to exactly 1.0 at every point of the interval. Inputs outside the
    interval saturate at the nearest edge set.
    """

    def __init__(self, n=_N_LEVELS, lo=-1.0, hi=1.0):
        if n < 2 or hi <= lo:
            raise ConfigError(f"invalid partition: n={n}, [{lo}, {hi}]")
        self.n = n
        self.lo = float(lo)
        self.hi = float(hi)
        self.peaks = np.linspace(lo, hi, n)
        self.width = (self.hi - self.lo) / (n - 1)

    def memberships(self, x):
        """Degrees of membership of scalar x in each of the n sets."""
        x = min(max(float(x), self.lo), self.hi)
        cell = min(int((x - self.lo) / self.width), self.n - 2)
        up = (x - self.peaks[cell]) / self.width
        up = min(max(up, 0.0), 1.0)
        out = np.zeros(self.n)
        out[cell] = 1.0 - up
        out[cell + 1] = up
        return out

    def grid_memberships(self, ys):
        """Membership of every grid point in every set, shape (n, len(ys))."""
        ys = np.asarray(ys, dtype=float)
        dist = np.abs(ys[None, :] - self.peaks[:, None]) / self.width
        return np.clip(1.0 - dist, 0.0, 1.0)


_PARTITION = TriangularPartition()
_GRID = np.linspace(-1.0, 1.0, _GRID_POINTS)
_GRID_MF = _PARTITION.grid_memberships(_GRID)


@dataclass(frozen=True)
class RuleTable:
    """7x7 consequent-level grids, one per output gain."""

    kp: np.ndarray
    ki: np.ndarray
    kd: np.ndarray

    def __post_init__(self):
        for name in ("kp", "ki"):
            grid = getattr(self, name)
            mirrored = 6 - grid[::-1, ::-1]
            if not np.array_equal(grid, mirrored):
                bad = np.argwhere(grid != mirrored)[0]
                raise ConfigError(
                    f"[{name}] rule table is not antisymmetric at row {bad[0]}, col {bad[1]}"
                )
        # a settled loop must not drift any gain
        for name in ("kp", "ki", "kd"):
            if getattr(self, name)[3, 3] != 3:
                raise ConfigError(f"[{name}] rule table centre cell must be ZO")


@dataclass(frozen=True)
class FuzzyScale:
    """Input normalisation ranges and per-step output scaling."""

    error_range: float = 0.2
    derror_range: float = 2.0
    kp_step: float = 0.05
    ki_step: float = 0.05
    kd_step: float = 0.001

    def __post_init__(self):
        for name in ("error_range", "derror_range", "kp_step", "ki_step", "kd_step"):
            check_positive(name, getattr(self, name))


def parse_rule_table(text: str) -> RuleTable:
    """Parse the three [kp]/[ki]/[kd] blocks of a rule-table file."""
    blocks = {}
    current = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            if current is not None:
                blocks[current] = rows
            current = line[1:-1].strip().lower()
            rows = []
            continue
        if current is None:
            raise ConfigError(f"rule line {lineno} appears before any [section]")
        tokens = line.split()
        if len(tokens) != _N_LEVELS:
            raise ConfigError(f"line {lineno}: expected 7 levels, got {len(tokens)}")
        try:
            rows.append([_LEVEL_INDEX[t.upper()] for t in tokens])
        except KeyError as exc:
            raise ConfigError(f"line {lineno}: unknown level {exc.args[0]!r}") from None
    if current is not None:
        blocks[current] = rows

    missing = {"kp", "ki", "kd"} - set(blocks)
    if missing:
        raise ConfigError(f"rule table missing sections: {sorted(missing)}")
    grids = {}
    for name in ("kp", "ki", "kd"):
        if len(blocks[name]) != _N_LEVELS:
            raise ConfigError(f"[{name}] must have 7 rows, got {len(blocks[name])}")
        grids[name] = np.asarray(blocks[name], dtype=int)
    return RuleTable(**grids)


def load_rule_table(path) -> RuleTable:
    with open(path, encoding="utf-8") as fh:
        return parse_rule_table(fh.read())


def default_rule_table() -> RuleTable:
    text = resources.files("pidlab").joinpath("data/fuzzy_rules.txt").read_text(encoding="utf-8")
    return parse_rule_table(text)


def _defuzzify(weights: np.ndarray, consequents: np.ndarray) -> float:
    # max-aggregate the clipped consequent sets, then take the centroid
    level_w = np.zeros(_N_LEVELS)
    np.maximum.at(level_w, consequents.ravel(), weights.ravel())
    agg = np.max(np.minimum(level_w[:, None], _GRID_MF), axis=0)
    total = agg.sum()
    if total == 0.0:
        return 0.0
    return float((agg * _GRID).sum() / total)


def fuzzy_adjustment(error, derror, table: RuleTable, scale: FuzzyScale = FuzzyScale()):
    """Raw (dkp, dki, dkd) for one inference step, before any clamping."""
    error = check_finite("error", error)
    derror = check_finite("derror", derror)
    mu_e = _PARTITION.memberships(error / scale.error_range)
    mu_d = _PARTITION.memberships(derror / scale.derror_range)
    fire = np.minimum.outer(mu_e, mu_d)
    return (
        _defuzzify(fire, table.kp) * scale.kp_step,
        _defuzzify(fire, table.ki) * scale.ki_step,
        _defuzzify(fire, table.kd) * scale.kd_step,
    )


def fuzzy_step(
    error,
    derror,
    gains: PidGains,
    bounds: GainBounds,
    table: RuleTable,
    scale: FuzzyScale = FuzzyScale(),
) -> PidGains:
    """Adapt gains one step from the observed error and error rate."""
    dkp, dki, dkd = fuzzy_adjustment(error, derror, table, scale)
    return clamp_gains(PidGains(gains.kp + dkp, gains.ki + dki, gains.kd + dkd), bounds)
