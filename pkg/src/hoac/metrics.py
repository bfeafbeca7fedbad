# -*- coding: utf-8 -*-
"""Objective reconstruction metrics."""
import csv
from dataclasses import dataclass

import numpy as np

from . import sph


@dataclass
class OrderRmseReport:
    """Per-order RMS level ratios of a decoded clip against its reference.

    ratio_db[n] = 20*log10( mean over degrees m of RMS(out)/RMS(in) ).
    Channels whose reference is silent are excluded from the mean and
    listed in excluded_channels.
    """
    ratio_db: np.ndarray
    per_channel_ratio: np.ndarray
    excluded_channels: list

    @property
    def max_abs_db(self):
        finite = self.ratio_db[np.isfinite(self.ratio_db)]
        return float(np.max(np.abs(finite))) if len(finite) else np.inf


def rmse_per_order(reference, test, skip_samples=0, silent_rms=1e-9):
    """Per-order RMS ratio between aligned clips of equal geometry.

    Parameters
    ----------
    reference, test : (L, n) arrays, same shape, latency-compensated
    skip_samples : int
        Leading samples excluded (smoothing convergence interval).
    silent_rms : float
        Reference channels below this RMS are excluded and reported.
    """
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    test = np.atleast_2d(np.asarray(test, dtype=float))
    if reference.shape != test.shape:
        raise ValueError("clip geometry mismatch "
                         f"{reference.shape} vs {test.shape}")
    order = sph.order_of_channels(reference.shape[0])
    ref = reference[:, skip_samples:]
    out = test[:, skip_samples:]
    if ref.shape[1] == 0:
        raise ValueError("no samples left after skip interval")
    rms_ref = np.sqrt(np.mean(ref ** 2, axis=1))
    rms_out = np.sqrt(np.mean(out ** 2, axis=1))
    excluded = np.flatnonzero(rms_ref <= silent_rms)
    ratio = np.divide(rms_out, rms_ref,
                      out=np.full_like(rms_out, np.nan),
                      where=rms_ref > silent_rms)
    per_n = sph.channel_orders(order)
    ratio_db = np.full(order + 1, np.nan)
    for n in range(order + 1):
        sel = (per_n == n) & np.isfinite(ratio)
        if sel.any():
            ratio_db[n] = 20.0 * np.log10(np.mean(ratio[sel]))
    return OrderRmseReport(ratio_db=ratio_db, per_channel_ratio=ratio,
                           excluded_channels=excluded.tolist())


def relative_error_db(reference, test, skip_samples=0):
    """Total relative reconstruction error in dB over all channels."""
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    test = np.atleast_2d(np.asarray(test, dtype=float))
    ref = reference[:, skip_samples:]
    out = test[:, skip_samples:]
    err = np.sum((out - ref) ** 2)
    sig = np.sum(ref ** 2)
    if sig <= 0:
        raise ValueError("silent reference")
    if err == 0:
        return -np.inf
    return 10.0 * np.log10(err / sig)


def per_channel_error_db(reference, test, skip_samples=0):
    """Relative error per channel in dB; silent channels give -inf."""
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    test = np.atleast_2d(np.asarray(test, dtype=float))
    ref = reference[:, skip_samples:]
    out = test[:, skip_samples:]
    err = np.sum((out - ref) ** 2, axis=1)
    sig = np.sum(ref ** 2, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10.0 * np.log10(err / sig)
    return np.where(sig > 0, db, -np.inf)


def write_metrics_csv(path, report):
    """CSV report: one row per order plus the exclusion list."""
    with open(path, "w", newline="", encoding="utf-8") as fp:
        w = csv.writer(fp)
        w.writerow(["order", "rms_ratio_db"])
        for n, db in enumerate(report.ratio_db):
            w.writerow([n, f"{db:.4f}"])
        w.writerow([])
        w.writerow(["excluded_channels",
                    " ".join(map(str, report.excluded_channels))])
