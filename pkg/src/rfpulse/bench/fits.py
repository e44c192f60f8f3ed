"""Least-squares fits used to read physical quantities off datasets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

__all__ = ["FitResult", "FitError", "fit_model"]

_PARAM_NAMES = {
    "lorentzian": ("center", "width", "amplitude", "offset"),
    "exponential_decay": ("amplitude", "decay", "offset"),
    "sinusoid": ("amplitude", "frequency", "phase", "offset"),
}


@dataclass
class FitResult:
    params: dict[str, float]
    residual_norm: float
    notes: tuple[str, ...] = ()


class FitError(RuntimeError):
    """Fit did not converge; carries the best iterate found."""

    def __init__(self, message: str, best: dict[str, float]):
        super().__init__(message)
        self.best = best


def _lorentzian(x, center, width, amplitude, offset):
    return offset + amplitude / (1.0 + (2.0 * (x - center) / width) ** 2)


def _exponential_decay(x, amplitude, decay, offset):
    return offset + amplitude * np.exp(-x / decay)


def _sinusoid(x, amplitude, frequency, phase, offset):
    return offset + amplitude * np.sin(2.0 * np.pi * frequency * x + phase)


def _init_lorentzian(x, y):
    offset = float(np.median(y))
    deviation = y - offset
    peak = int(np.argmax(np.abs(deviation)))
    amplitude = float(deviation[peak])
    # width from the half-prominence span
    above = np.abs(deviation) >= abs(amplitude) / 2.0
    if above.sum() > 1:
        width = float(x[above].max() - x[above].min())
    else:
        width = float((x.max() - x.min()) / 10.0)
    return [float(x[peak]), width or float(x.max() - x.min()) / 10.0, amplitude, offset]


def _init_exponential(x, y):
    offset = float(y[-1])
    amplitude = float(y[0] - y[-1])
    decay = float((x.max() - x.min()) / 3.0) or 1.0
    return [amplitude, decay, offset]


def _init_sinusoid(x, y):
    offset = float(np.mean(y))
    detrended = y - offset
    dx = float(np.mean(np.diff(x)))
    spectrum = np.fft.rfft(detrended)
    freqs = np.fft.rfftfreq(len(x), dx)
    bin_idx = int(np.argmax(np.abs(spectrum[1:]))) + 1 if len(spectrum) > 1 else 0
    frequency = float(freqs[bin_idx]) or 1.0 / (x.max() - x.min())
    amplitude = 2.0 * float(np.abs(spectrum[bin_idx])) / len(x)
    phase = float(np.angle(spectrum[bin_idx])) + np.pi / 2.0
    return [amplitude or float(np.std(y)), frequency, phase, offset]


_MODELS = {
    "lorentzian": (_lorentzian, _init_lorentzian),
    "exponential_decay": (_exponential_decay, _init_exponential),
    "sinusoid": (_sinusoid, _init_sinusoid),
}


def fit_model(kind: str, xs, ys) -> FitResult:
    """Least-squares fit of a named model; see _PARAM_NAMES for outputs.

    Raises FitError (carrying the best iterate) when the optimizer hits the
    iteration cap without converging, and ValueError for underdetermined
    input.
    """
    if kind not in _MODELS:
        raise ValueError(f"unknown fit model '{kind}'")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    names = _PARAM_NAMES[kind]
    if len(x) < 2 * len(names):
        raise ValueError(f"need at least {2 * len(names)} points to fit a {kind}")
    model, init = _MODELS[kind]
    p0 = init(x, y)

    def residuals(p):
        return model(x, *p) - y

    result = least_squares(residuals, p0, max_nfev=5000)
    params = dict(zip(names, (float(v) for v in result.x)))
    if not result.success:
        raise FitError(f"{kind} fit did not converge", best=params)
    residual_norm = float(np.linalg.norm(result.fun))

    notes: list[str] = []
    m, n = result.jac.shape
    column_norms = np.linalg.norm(result.jac, axis=0)
    reference = max(column_norms.max(), 1e-300)
    for name, norm in zip(names, column_norms):
        # a vanishing Jacobian column means the data says nothing about it
        if norm < 1e-12 * reference:
            notes.append(f"{name} poorly constrained")
    if m > n and not notes:
        # rough parameter uncertainties from the Jacobian at the solution
        try:
            covariance = np.linalg.inv(result.jac.T @ result.jac) * (
                2.0 * result.cost / (m - n)
            )
            sigmas = np.sqrt(np.clip(np.diag(covariance), 0.0, np.inf))
            for name, value, sigma in zip(names, result.x, sigmas):
                if sigma > abs(value):
                    notes.append(f"{name} poorly constrained")
        except np.linalg.LinAlgError:
            notes.append("covariance singular")
    return FitResult(params=params, residual_norm=residual_norm, notes=tuple(notes))
