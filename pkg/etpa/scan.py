"""
Parameter sweeps and their CSV persistence.

A scan evaluates a point function on the cartesian product of its axes.
Rows always come out in lexicographic axis order, whatever the number of
worker processes, and a failing point leaves NaNs plus a message in the
'error' column instead of aborting the sweep.
"""

import io
import itertools
import logging
import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import DomainError, EtpaError, ScanError

logger = logging.getLogger(__name__)

ERROR_COLUMN = "error"
AXIS_KEY = "axis"
_SCALES = ("linear", "log")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple
    scale: str = "linear"

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not self.name:
            raise DomainError("axis needs a name")
        if self.scale not in _SCALES:
            raise DomainError(f"axis {self.name}: unknown scale {self.scale!r}")
        if not values:
            raise DomainError(f"axis {self.name} has no values")
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"axis {self.name} holds non-finite values")
        steps = np.diff(values)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise DomainError(f"axis {self.name} must be strictly monotone")
        if self.scale == "log" and min(values) <= 0:
            raise DomainError(f"log axis {self.name} needs positive values")

    def __len__(self):
        return len(self.values)

    @classmethod
    def linear(cls, name, start, stop, num):
        return cls(name, tuple(np.linspace(start, stop, int(num))), "linear")

    @classmethod
    def log(cls, name, start, stop, num):
        if start <= 0 or stop <= 0:
            raise DomainError(f"log axis {name} needs positive end points")
        return cls(name, tuple(np.geomspace(start, stop, int(num))), "log")


def parse_grid(name, text):
    '''
        builds an Axis from "start:stop:num" or "start:stop:num:log", or from a
        comma separated list of values (optionally ending in ":log")
    '''
    text = str(text).strip()
    scale = "linear"
    if text.endswith(":log"):
        text, scale = text[: -len(":log")], "log"
    try:
        if "," in text or ":" not in text:
            values = [float(v) for v in text.split(",") if v.strip()]
            return Axis(name, tuple(values), scale)
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid for {name} must look like start:stop:num[:log], got {text!r}")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        if isinstance(e, DomainError):
            raise
        raise DomainError(f"cannot parse grid for {name}: {text!r} ({e})") from e
    if num < 1:
        raise DomainError(f"grid for {name} needs at least one point")
    if scale == "log":
        return Axis.log(name, start, stop, num)
    return Axis.linear(name, start, stop, num)


@dataclass
class ScanResult:
    axes: list
    frame: pd.DataFrame
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = math.prod(len(a) for a in self.axes)
        if len(self.frame) != expected:
            raise DomainError(f"scan table has {len(self.frame)} rows, axes need {expected}")

    @property
    def columns(self):
        return list(self.frame.columns)

    def column(self, name):
        '''values of one column as a numpy array'''
        return self.frame[name].to_numpy()

    @property
    def failed(self):
        if ERROR_COLUMN not in self.frame:
            return 0
        return int((self.frame[ERROR_COLUMN].astype(str) != "").sum())


# ------------------------------------------------------------------
# Sweeps
# ------------------------------------------------------------------
def _evaluate_point(task):
    evaluate, point = task
    try:
        return dict(evaluate(point)), ""
    except (EtpaError, ArithmeticError, ValueError) as e:
        return None, f"{type(e).__name__}: {e}"


def run_scan(evaluate, axes, parallelism=1, desc=None, queue=None, provenance=None, progress=True):
    '''
        evaluates evaluate(point) for every point of the axis product. The
        point function returns a mapping of column name to value and must be
        picklable when parallelism > 1.

        progress goes to a tqdm bar and, when given, to a multiprocessing
        queue as ("PROGRESS", percent) messages followed by ("DONE", rows)
    '''
    axes = list(axes)
    if not axes:
        raise DomainError("a scan needs at least one axis")
    points = list(itertools.product(*(a.values for a in axes)))
    tasks = [(evaluate, p) for p in points]
    total = len(tasks)
    logger.info("scan %s: %d points on %d worker(s)", desc or "", total, parallelism)

    outcomes = []

    def collect(results):
        for i, outcome in enumerate(tqdm(results, total=total, desc=desc, disable=not progress), 1):
            outcomes.append(outcome)
            if queue is not None:
                queue.put(("PROGRESS", int(i / total * 100)))

    if parallelism <= 1 or total == 1:
        collect(map(_evaluate_point, tasks))
    else:
        pool = multiprocessing.Pool(min(parallelism, total))
        try:
            collect(pool.imap(_evaluate_point, tasks, chunksize=1))
            pool.close()
        except BaseException:
            pool.terminate()
            raise
        finally:
            pool.join()

    # axis columns win over point values of the same name
    names = []
    axis_names = {a.name for a in axes}
    for values, _ in outcomes:
        for key in values or ():
            if key not in names and key not in axis_names:
                names.append(key)
    rows = []
    errors = []
    for point, (values, message) in zip(points, outcomes):
        row = {a.name: v for a, v in zip(axes, point)}
        for key in names:
            row[key] = float(values.get(key, math.nan)) if values is not None else math.nan
        if message:
            logger.warning("scan point %s failed: %s", dict(zip((a.name for a in axes), point)), message)
        errors.append(message)
        rows.append(row)

    failures = [m for m in errors if m]
    if len(failures) == total:
        raise ScanError(f"all {total} scan points failed; first error: {failures[0]}")

    frame = pd.DataFrame(rows, columns=[a.name for a in axes] + names)
    if failures:
        frame[ERROR_COLUMN] = errors
    if queue is not None:
        queue.put(("DONE", len(frame)))
    return ScanResult(axes, frame, dict(provenance or {}))


# ------------------------------------------------------------------
# CSV
# ------------------------------------------------------------------
def _clean(value):
    return str(value).replace("\n", " ").replace("\r", " ")


def _check_columns(columns):
    if len(columns) == 0:
        raise DomainError("scan table has no columns")
    for name in columns:
        if not str(name).strip() or str(name).startswith("Unnamed:"):
            raise DomainError("scan table has an unnamed column")


def write_csv(result, path):
    '''
        writes '#'-prefixed provenance and axis lines followed by one header
        row and the data. path may be a filename or an open text handle
    '''
    _check_columns(result.frame.columns)
    if AXIS_KEY in result.provenance:
        raise DomainError(f"provenance key {AXIS_KEY!r} is reserved for axis lines")
    lines = [f"# {_clean(k)}={_clean(v)}" for k, v in result.provenance.items()]
    lines += [f"# {AXIS_KEY}={a.name}:{a.scale}" for a in result.axes]
    body = result.frame.to_csv(index=False, float_format="%.17g", na_rep="nan", lineterminator="\n")
    text = "".join(line + "\n" for line in lines) + body
    if hasattr(path, "write"):
        path.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        raise OSError(e.errno, f"cannot write scan result: {e.strerror}", str(path)) from e


def read_csv(path):
    '''reads a file written by write_csv back into a ScanResult'''
    if hasattr(path, "read"):
        text = path.read()
    else:
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as e:
            raise OSError(e.errno, f"cannot read scan result: {e.strerror}", str(path)) from e

    provenance = {}
    scales = {}
    body_lines = []
    lines = text.splitlines(keepends=True)
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_lines = lines[i:]
            break
        key, _, value = line[1:].strip().partition("=")
        if key == AXIS_KEY:
            name, _, scale = value.rpartition(":")
            scales[name] = scale
        else:
            provenance[key] = value
    if not body_lines:
        raise DomainError(f"{path}: no header row")

    frame = pd.read_csv(io.StringIO("".join(body_lines)), float_precision="round_trip")
    _check_columns(frame.columns)
    if ERROR_COLUMN in frame:
        frame[ERROR_COLUMN] = frame[ERROR_COLUMN].fillna("").astype(str)
    for name in frame.columns:
        if name != ERROR_COLUMN and frame[name].isna().all() and name in scales:
            raise DomainError(f"{path}: axis column {name} is empty")
    axes = [Axis(name, tuple(pd.unique(frame[name])), scale) for name, scale in scales.items()]
    return ScanResult(axes, frame, provenance)
