"""Fixation-locked EEG epochs and time-resolved surprisal regression.

Epochs are stored as a little-endian float32 binary tensor in C order
(trial, channel, time) with a JSON sidecar and a per-trial metadata CSV.
For every channel and timepoint, trial amplitudes are regressed on
[intercept, surprisal] by ordinary least squares; the solver is QR-based
and matches the normal-equations solution.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

EPOCH_DTYPE = "float32-le"
EPOCH_ORDER = "trial_channel_time"
BETA_ORDER = "channel_time_param"

TRIALS_COLUMNS = ("sentence_id", "token_index", "lexical_surprisal", "syntactic_surprisal")

PREDICTORS = ("syntactic", "lexical")


@dataclass(frozen=True)
class TrialInfo:
    sentence_id: str
    token_index: int
    lexical_surprisal: float
    syntactic_surprisal: float


@dataclass(frozen=True)
class EpochSet:
    subject: str
    data: np.ndarray          # (trials, channels, timepoints)
    sfreq: float
    tmin: float
    trials: tuple[TrialInfo, ...]

    def times(self) -> np.ndarray:
        """Time of sample k in seconds: tmin + k / sfreq."""
        return self.tmin + np.arange(self.data.shape[2]) / self.sfreq

    def surprisal(self, predictor: str = "syntactic") -> np.ndarray:
        if predictor == "syntactic":
            return np.array([t.syntactic_surprisal for t in self.trials])
        if predictor == "lexical":
            return np.array([t.lexical_surprisal for t in self.trials])
        raise ValueError(f"unknown predictor {predictor!r}")


@dataclass(frozen=True)
class BetaSeries:
    subject: str
    beta: np.ndarray          # (channels, timepoints, 2): intercept, slope
    sfreq: float
    tmin: float
    predictor: str


def save_epochs(epochs: EpochSet, directory, stem: str) -> Path:
    """Write <stem>.json / <stem>.dat / <stem>.trials.csv; returns the sidecar path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_trials, n_channels, n_timepoints = epochs.data.shape
    sidecar = {
        "subject": epochs.subject,
        "n_trials": int(n_trials),
        "n_channels": int(n_channels),
        "n_timepoints": int(n_timepoints),
        "sfreq": float(epochs.sfreq),
        "tmin": float(epochs.tmin),
        "dtype": EPOCH_DTYPE,
        "order": EPOCH_ORDER,
        "payload": f"{stem}.dat",
        "trials": f"{stem}.trials.csv",
    }
    sidecar_path = directory / f"{stem}.json"
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8")
    (directory / f"{stem}.dat").write_bytes(
        np.ascontiguousarray(epochs.data, dtype="<f4").tobytes()
    )
    with open(directory / f"{stem}.trials.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_COLUMNS)
        for t in epochs.trials:
            writer.writerow(
                [t.sentence_id, t.token_index, t.lexical_surprisal, t.syntactic_surprisal]
            )
    return sidecar_path


def load_epochs(header, payload=None, trials=None) -> EpochSet:
    """Load and validate an epoch file set from its JSON sidecar.

    ``payload`` and ``trials`` default to the file names the sidecar
    declares, resolved next to it.
    """
    header = Path(header)
    try:
        sidecar = json.loads(header.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read sidecar {header}: {exc}") from None

    for key in ("n_trials", "n_channels", "n_timepoints", "sfreq", "tmin"):
        if key not in sidecar:
            raise DataError(f"sidecar field {key!r} is missing")
    if sidecar.get("dtype", EPOCH_DTYPE) != EPOCH_DTYPE:
        raise DataError(f"sidecar field 'dtype' must be {EPOCH_DTYPE!r}, got {sidecar.get('dtype')!r}")
    if sidecar.get("order", EPOCH_ORDER) != EPOCH_ORDER:
        raise DataError(f"sidecar field 'order' must be {EPOCH_ORDER!r}, got {sidecar.get('order')!r}")

    n_trials = int(sidecar["n_trials"])
    n_channels = int(sidecar["n_channels"])
    n_timepoints = int(sidecar["n_timepoints"])

    payload = Path(payload) if payload else header.parent / sidecar.get("payload", header.stem + ".dat")
    raw = payload.read_bytes()
    expected = n_trials * n_channels * n_timepoints * 4
    if len(raw) != expected:
        raise DataError(
            f"payload size mismatch for field 'payload': {len(raw)} bytes, expected {expected}"
        )
    data = np.frombuffer(raw, dtype="<f4").reshape(n_trials, n_channels, n_timepoints)
    if np.isnan(data).any():
        raise DataError("payload contains NaN values")

    trials = Path(trials) if trials else header.parent / sidecar.get("trials", header.stem + ".trials.csv")
    rows = _load_trials(trials)
    if len(rows) != n_trials:
        raise DataError(
            f"trial metadata row count mismatch for field 'trials': {len(rows)} rows, expected {n_trials}"
        )
    return EpochSet(
        subject=str(sidecar.get("subject", header.stem)),
        data=np.asarray(data, dtype=float),
        sfreq=float(sidecar["sfreq"]),
        tmin=float(sidecar["tmin"]),
        trials=tuple(rows),
    )


def _load_trials(path: Path) -> list[TrialInfo]:
    rows: list[TrialInfo] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in TRIALS_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"trial metadata is missing column(s): {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=2):
            try:
                info = TrialInfo(
                    sentence_id=row["sentence_id"],
                    token_index=int(row["token_index"]),
                    lexical_surprisal=float(row["lexical_surprisal"]),
                    syntactic_surprisal=float(row["syntactic_surprisal"]),
                )
            except (TypeError, ValueError):
                raise DataError(f"trial metadata row {row_no}: non-numeric field") from None
            if not (math.isfinite(info.lexical_surprisal) and math.isfinite(info.syntactic_surprisal)):
                raise DataError(f"trial metadata row {row_no}: surprisal must be finite")
            rows.append(info)
    return rows


def regress_timewise(epochs: EpochSet, standardize: bool = True, predictor: str = "syntactic") -> BetaSeries:
    """OLS of trial amplitudes on [1, surprisal] at every channel x timepoint.

    With ``standardize`` the predictor is z-scored across trials first, so
    slopes are in microvolts per standard deviation of surprisal. The
    QR-based solve matches (X'X)^-1 X'Y to high precision; channels that
    are flat across trials get slope 0.
    """
    n_trials, n_channels, n_timepoints = epochs.data.shape
    if n_trials < 3:
        raise DataError(f"need at least 3 trials, got {n_trials}")
    x = epochs.surprisal(predictor)
    sd = x.std(ddof=1)
    if sd == 0.0:
        raise DataError("surprisal predictor has zero variance")
    if standardize:
        x = (x - x.mean()) / sd

    design = np.column_stack([np.ones(n_trials), x])
    q, r = np.linalg.qr(design)
    y = epochs.data.reshape(n_trials, n_channels * n_timepoints)
    coef = np.linalg.solve(r, q.T @ y)                      # (2, channels*timepoints)
    beta = coef.T.reshape(n_channels, n_timepoints, 2)
    return BetaSeries(
        subject=epochs.subject,
        beta=beta,
        sfreq=epochs.sfreq,
        tmin=epochs.tmin,
        predictor=predictor,
    )


def roi_average(beta: BetaSeries, roi) -> np.ndarray:
    """Mean slope across a set of channel indices, one value per timepoint."""
    channels = sorted(set(int(c) for c in roi))
    if not channels:
        raise DataError("ROI must contain at least one channel index")
    n_channels = beta.beta.shape[0]
    for c in channels:
        if not 0 <= c < n_channels:
            raise DataError(f"ROI channel {c} out of range 0..{n_channels - 1}")
    return beta.beta[channels, :, 1].mean(axis=0)


def save_beta(series: BetaSeries, directory, stem: str) -> Path:
    """Write a BetaSeries in the same binary format with its own sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_channels, n_timepoints, n_params = series.beta.shape
    sidecar = {
        "subject": series.subject,
        "predictor": series.predictor,
        "n_channels": int(n_channels),
        "n_timepoints": int(n_timepoints),
        "n_params": int(n_params),
        "sfreq": float(series.sfreq),
        "tmin": float(series.tmin),
        "dtype": EPOCH_DTYPE,
        "order": BETA_ORDER,
        "payload": f"{stem}.dat",
    }
    sidecar_path = directory / f"{stem}.json"
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8")
    (directory / f"{stem}.dat").write_bytes(
        np.ascontiguousarray(series.beta, dtype="<f4").tobytes()
    )
    return sidecar_path


def load_beta(header, payload=None) -> BetaSeries:
    header = Path(header)
    sidecar = json.loads(header.read_text(encoding="utf-8"))
    if sidecar.get("order") != BETA_ORDER:
        raise DataError(f"sidecar field 'order' must be {BETA_ORDER!r}")
    shape = (int(sidecar["n_channels"]), int(sidecar["n_timepoints"]), int(sidecar["n_params"]))
    payload = Path(payload) if payload else header.parent / sidecar.get("payload", header.stem + ".dat")
    raw = payload.read_bytes()
    expected = shape[0] * shape[1] * shape[2] * 4
    if len(raw) != expected:
        raise DataError(f"payload size mismatch for field 'payload': {len(raw)} bytes, expected {expected}")
    beta = np.frombuffer(raw, dtype="<f4").reshape(shape)
    return BetaSeries(
        subject=str(sidecar.get("subject", header.stem)),
        beta=np.asarray(beta, dtype=float),
        sfreq=float(sidecar["sfreq"]),
        tmin=float(sidecar["tmin"]),
        predictor=str(sidecar.get("predictor", "syntactic")),
    )
