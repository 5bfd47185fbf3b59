"""Time-domain integration of the linearized Langevin equations (classical thermal noise).

State vector: (dx2, dp2, Re da, Im da). The drift is linear and constant, so
each step applies the exact propagator Phi = expm(A dt) and the exact
response to the constant gravitational force; the thermal momentum kick of
variance 2 gamma_m m2 kB T dt is injected at mid-step, g = expm(A dt/2) e_p.
Optical input noise is not simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._kernels import Propagator, resolve_backend
from .errors import ConfigError, NumericalFailure, UnstableSystemError
from .gravity import Scenario, scenario_force_set
from .params import ParameterSet
from .spectrum import D_zero, baseline_variance, widening
from .steady import SteadyState, drift_matrix, stability_check

NOISE_MODES = ("ClassicalThermal",)
CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_total: float
    seed: int = 0
    noise_mode: str = "ClassicalThermal"
    scenario: Scenario | None = None
    record_stride: int = 1000
    force: float | None = None  # overrides the scenario force when set
    burn_in: float | None = None  # defaults to 10/gamma_m

    def check(self, params: ParameterSet) -> None:
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"unsupported noise mode {self.noise_mode!r}")
        limit = 0.05 * min(1 / params.kappa, 1 / params.omega_2, 1 / params.gamma_m)
        if not 0 < self.dt < limit:
            raise ConfigError(f"dt must be in (0, {limit:.4g}) s for these parameters")
        if self.t_total < 50 / params.gamma_m:
            raise ConfigError(f"t_total must be >= 50/gamma_m = {50 / params.gamma_m:.4g} s")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.burn_in is not None and not (10 / params.gamma_m <= self.burn_in < self.t_total):
            raise ConfigError("burn_in must be >= 10/gamma_m and shorter than t_total")

    def burn(self, params: ParameterSet) -> float:
        return self.burn_in if self.burn_in is not None else 10.0 / params.gamma_m

    @classmethod
    def default(cls, params: ParameterSet, **kw) -> "SimConfig":
        """Largest allowed step (90% of the limit) and the minimum averaging window."""
        dt = 0.9 * 0.05 * min(1 / params.kappa, 1 / params.omega_2, 1 / params.gamma_m)
        kw.setdefault("t_total", 50.0 / params.gamma_m)
        return cls(dt=dt, **kw)


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # (N, 4): dx2, dp2, Re da, Im da
    mean: float
    second_moment: float
    n_stats: int
    seed: int
    force: float = 0.0

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def var(self) -> float:
        return self.second_moment - self.mean**2

    def to_rows(self):
        return np.column_stack([self.t, self.states])


def discretize(params: ParameterSet, steady: SteadyState, dt: float, force: float, temperature: float | None = None):
    """(Phi, c, g) for one step of length dt."""
    A = drift_matrix(params, steady)
    # balance the badly scaled SI matrix before exponentiating
    B, T = linalg.matrix_balance(A, permute=False)
    Tinv = np.diag(1.0 / np.diag(T))
    n = A.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = B * dt
    aug[:n, n:] = np.eye(n) * dt
    E = linalg.expm(aug)
    phi = T @ E[:n, :n] @ Tinv
    psi = T @ E[:n, n:] @ Tinv  # integral_0^dt expm(A s) ds
    half = T @ linalg.expm(B * (0.5 * dt)) @ Tinv
    temp = params.T if temperature is None else temperature
    sigma = math.sqrt(2 * params.gamma_m * params.m2 * params.kB * temp * dt)
    e_p = np.array([0.0, 1.0, 0.0, 0.0])
    return phi, psi @ (force * e_p), half @ (sigma * e_p)


def resolve_force(params: ParameterSet, steady: SteadyState, config: SimConfig) -> float:
    if config.force is not None:
        return float(config.force)
    if config.scenario is None:
        return 0.0
    return scenario_force_set(params, steady)[config.scenario].f


def simulate(params: ParameterSet, steady: SteadyState, config: SimConfig,
             backend: str | None = None) -> Trajectory:
    config.check(params)
    if not stability_check(params, steady).stable:
        raise UnstableSystemError("refusing to integrate unstable linearized dynamics")
    backend = resolve_backend(backend)
    force = resolve_force(params, steady, config)
    phi, c, g = discretize(params, steady, config.dt, force)
    prop = Propagator(phi, c, g, backend)

    n_steps = int(round(config.t_total / config.dt))
    burn = int(math.ceil(config.burn(params) / config.dt))
    stride = config.record_stride
    rng = np.random.default_rng(config.seed)
    noisy = g.any()

    state = np.zeros(4)
    rows = [state.copy()]
    s1 = s2 = 0.0
    n_stat = 0
    buf = np.empty(CHUNK)
    done = 0
    while done < n_steps:
        k = min(CHUNK, n_steps - done)
        noise = buf[:k]
        if noisy:
            rng.standard_normal(out=noise)
        else:
            noise[:] = 0.0
        rec = np.empty((k // stride + 1, 4))
        nr, a, b, ns, bad = prop.run(state, noise, done, burn, stride, rec)
        if bad >= 0:
            raise NumericalFailure(f"non-finite state at step {bad}", step=bad)
        rows.append(rec[:nr])
        s1 += a
        s2 += b
        n_stat += ns
        done += k
    states = np.vstack(rows)
    t = np.concatenate([[0.0], np.arange(1, len(states)) * stride * config.dt])
    if n_stat == 0:
        raise ConfigError("no samples after burn-in")
    return Trajectory(t, states, s1 / n_stat, s2 / n_stat, n_stat, config.seed, force)


def autocorrelation_time(traj: Trajectory, params: ParameterSet, dt_sample: float) -> float:
    """1/e decay time of the envelope |<z(t+tau) z*(t)>| with z = x + i p/(m2 omega_2)."""
    z = traj.states[:, 0] + 1j * traj.states[:, 1] / (params.m2 * params.omega_2)
    z = z - z.mean()
    n = len(z)
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    Z = np.fft.fft(z, nfft)
    acf = np.fft.ifft(Z * np.conj(Z))[:n] / np.arange(n, 0, -1)
    mag = np.abs(acf) / abs(acf[0])
    below = np.nonzero(mag < math.exp(-1.0))[0]
    if len(below) == 0:
        raise NumericalFailure("autocorrelation did not decay within the record")
    i = int(below[0])
    # log-linear interpolation between samples i-1 and i
    l0, l1 = math.log(mag[i - 1]), math.log(mag[i])
    frac = (l0 + 1.0) / (l0 - l1)
    return (i - 1 + frac) * dt_sample


@dataclass
class ValidationVerdict:
    td_second_moment: float
    td_se: float
    fd_variance: float
    rel_diff: float
    variance_pass: bool
    td_mean: float
    mean_se: float
    expected_mean: float
    mean_pass: bool
    seeds: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.variance_pass and self.mean_pass

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def validate_against_frequency_domain(params: ParameterSet, steady: SteadyState, config: SimConfig,
                                      n_seeds: int = 8, spectrum_mode: str = "classical",
                                      backend: str | None = None) -> ValidationVerdict:
    """Time-domain second moment and mean of dx2 against the frequency-domain prediction.

    Seeds are config.seed, config.seed+1, ...; the frequency-domain side uses
    the classical thermal spectrum with optical noise off plus the analytic
    widening, which equals the square of the static displacement.
    """
    if config.noise_mode != "ClassicalThermal" or spectrum_mode != "classical":
        raise ConfigError("time-domain oracle only supports ClassicalThermal against the classical spectrum")
    if n_seeds < 8:
        raise ConfigError("at least 8 seeds are required")
    occ = params.kB * params.T / (params.hbar * params.omega_2)
    if occ < 100:
        raise ConfigError(f"kB T/(hbar omega_2) = {occ:.3g} < 100: classical limit not valid")

    runs = []
    for k in range(n_seeds):
        cfg = SimConfig(**{**config.__dict__, "seed": config.seed + k, "record_stride": max(config.record_stride, 1 << 30)})
        runs.append(simulate(params, steady, cfg, backend))
    runs.sort(key=lambda r: r.seed)
    m2s = np.array([r.second_moment for r in runs])
    means = np.array([r.mean for r in runs])
    force = runs[0].force

    var0, _, _ = baseline_variance(params, steady, thermal="classical", optical_noise=False)
    fd = var0 + widening(params, steady, force)
    td = float(m2s.mean())
    se = float(m2s.std(ddof=1) / math.sqrt(n_seeds))
    rel = abs(td - fd) / fd
    var_ok = rel <= 0.05 or abs(td - fd) <= 3 * se

    k2 = steady.Delta**2 + params.kappa**2
    expected = -k2 * force / D_zero(params, steady)
    mean_td = float(means.mean())
    mean_se = float(means.std(ddof=1) / math.sqrt(n_seeds))
    mean_ok = abs(mean_td - expected) <= 3 * mean_se
    return ValidationVerdict(td, se, fd, rel, var_ok, mean_td, mean_se, expected, mean_ok,
                             [r.seed for r in runs])
