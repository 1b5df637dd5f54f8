"""Virtual-source compact FET model.

Current per unit gated width (uA/um):

    I/W = Q * v * F_sat
    Q     = c_inv * n * phi_t * ln(1 + exp((v_gs - v_t0 + dibl*|v_ds|) / (n*phi_t)))
    F_sat = x / (1 + x^beta)^(1/beta),   x = |v_ds| / V_DSAT
    V_DSAT = v * l_gate / mu
    n     = ss / (phi_t * ln 10)

The form is continuous across all regions: exponential below threshold with
the configured swing, linear at small drain bias, and velocity-saturated at
large bias. p-type devices are evaluated with negated biases and currents
are reported in the normalized (n-type) convention, so forward-bias current
is non-negative for both polarities. Negative normalized v_ds uses the odd
extension, which keeps transient solvers stable around v_ds = 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import ConvergenceError, FitError, ParameterError, SchemaError
from .units import LN10, EPS0_F_PER_M, K_SIO2, UF_CM2_NM_TO_FF_UM, thermal_voltage

BIAS_LIMIT_V = 2.0


@dataclass(frozen=True)
class VSParams:
    """Compact-model parameter set for one FET polarity.

    v        injection velocity, cm/s
    mu       apparent mobility, cm^2/(V*s)
    l_gate   gate length, nm
    c_inv    inversion capacitance, uF/cm^2
    ss       subthreshold swing, mV/dec
    v_t0     threshold voltage at v_ds = 0, V
    dibl     drain-induced barrier lowering delta, V/V
    beta     saturation smoothing exponent
    """

    polarity: str = "n"
    v: float = 1e7
    mu: float = 200.0
    l_gate: float = 10.0
    c_inv: float = 4.0
    ss: float = 70.0
    v_t0: float = 0.25
    dibl: float = 0.1
    beta: float = 1.8
    temperature: float = 300.0

    def __post_init__(self):
        if self.polarity not in ("n", "p"):
            raise ParameterError(f"polarity must be n or p, got {self.polarity!r}")
        for name in ("v", "mu", "l_gate", "c_inv", "beta", "temperature"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.dibl < 0:
            raise ParameterError(f"dibl must be >= 0, got {self.dibl}")
        ss_floor = 59.5 * self.temperature / 300.0
        if self.ss < ss_floor:
            raise ParameterError(f"ss={self.ss} mV/dec below thermal floor {ss_floor:.2f}")

    @property
    def phi_t(self) -> float:
        return thermal_voltage(self.temperature)

    @property
    def n_body(self) -> float:
        """Body factor n = ss / (phi_t * ln 10); >= 1 by the ss floor."""
        return (self.ss * 1e-3) / (self.phi_t * LN10)

    @property
    def v_dsat(self) -> float:
        """Saturation voltage v*l_gate/mu in volts."""
        return self.v * (self.l_gate * 1e-7) / self.mu


@dataclass(frozen=True)
class IVPoint:
    v_gs: float
    v_ds: float
    i_d: float  # uA/um, normalized polarity convention


def _softplus(x):
    """ln(1+e^x) as max(x,0) + log1p(e^-|x|), overflow-safe."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return out if out.ndim else float(out)


def drain_current(p: VSParams, v_gs, v_ds):
    """Drain current per unit width in uA/um.

    Accepts scalars or numpy arrays for the biases. Biases are in the
    device's own sign convention (negative for p-type forward operation);
    the returned current follows the normalized n-type convention.
    """
    v_gs = np.asarray(v_gs, dtype=float)
    v_ds = np.asarray(v_ds, dtype=float)
    if np.any(np.abs(v_gs) > BIAS_LIMIT_V) or np.any(np.abs(v_ds) > BIAS_LIMIT_V):
        raise ParameterError(f"biases must lie within +/-{BIAS_LIMIT_V} V")
    sign = -1.0 if p.polarity == "p" else 1.0
    vgs = sign * v_gs
    vds = sign * v_ds
    sgn_ds = np.sign(vds)
    avds = np.abs(vds)

    nphi = p.n_body * p.phi_t
    q_sheet = (p.c_inv * 1e-6) * nphi * _softplus((vgs - p.v_t0 + p.dibl * avds) / nphi)  # C/cm^2
    x = avds / p.v_dsat
    f_sat = x / (1.0 + x**p.beta) ** (1.0 / p.beta)
    i = 100.0 * q_sheet * p.v * f_sat * sgn_ds  # A/cm -> uA/um is x100
    return i if i.ndim else float(i)


def tune_vt(p: VSParams, i_off_target: float, v_dd: float, max_iter: int = 200) -> VSParams:
    """Shift v_t0 so that I(v_gs=0, v_ds=v_dd) equals the leakage target.

    i_off_target is in nA/um. Newton iteration on v_t0 in log-current space;
    converges to ~1e-14 relative so repeated application is a fixed point.
    """
    if not i_off_target > 0:
        raise ParameterError(f"i_off_target must be > 0, got {i_off_target}")
    target_uA = i_off_target * 1e-3
    sign = -1.0 if p.polarity == "p" else 1.0
    nphi = p.n_body * p.phi_t
    vt = p.v_t0
    for _ in range(max_iter):
        cur = replace(p, v_t0=vt)
        i = drain_current(cur, 0.0, sign * v_dd)
        resid = math.log(i / target_uA)
        if abs(resid) < 1e-14:
            return cur
        eta = (-vt + p.dibl * v_dd) / nphi
        sig = 1.0 / (1.0 + math.exp(-eta))
        sp = _softplus(eta)
        dlogi_dvt = -sig / (nphi * sp)
        step = resid / dlogi_dvt
        vt = vt - step if abs(step) < 0.5 else vt + math.copysign(0.5, resid)
    raise ConvergenceError(f"tune_vt did not converge in {max_iter} iterations")


def c_inv_series(eot: float, c_q: float) -> float:
    """Series combination C_OX*C_Q/(C_OX+C_Q) in uF/cm^2.

    eot is the equivalent oxide thickness in nm, c_q the quantum
    capacitance in uF/cm^2. C_OX = eps_SiO2/EOT.
    """
    if not (eot > 0 and c_q > 0):
        raise ParameterError("eot and c_q must be > 0")
    c_ox = EPS0_F_PER_M * K_SIO2 / (eot * 1e-9) * 100.0  # F/m^2 -> uF/cm^2
    return c_ox * c_q / (c_ox + c_q)


def gate_cap_per_width(p: VSParams) -> float:
    """Intrinsic gate capacitance c_inv*l_gate in fF per um of width."""
    return p.c_inv * p.l_gate * UF_CM2_NM_TO_FF_UM


@dataclass(frozen=True)
class FitResult:
    params: VSParams
    rms_rel_error: float
    n_points: int


def fit_iv(points, fixed, starts: int = 3) -> FitResult:
    """Least-squares extraction of {v, mu, v_t0, dibl, beta} from I-V data.

    `fixed` must provide l_gate, c_inv and ss (and may provide polarity and
    temperature). The objective is the relative current error, so
    subthreshold decades carry the same weight as on-current.
    """
    required = {"l_gate", "c_inv", "ss"}
    missing = required - set(fixed)
    if missing:
        raise ParameterError(f"fixed parameters missing: {sorted(missing)}")
    pts = list(points)
    if len(pts) < 10:
        raise FitError(f"need >= 10 I-V points, got {len(pts)}")
    vgs = np.array([q.v_gs for q in pts])
    vds = np.array([q.v_ds for q in pts])
    i_meas = np.array([q.i_d for q in pts])
    if len(set(zip(vgs.tolist(), vds.tolist()))) < 4:
        raise FitError("degenerate I-V data: too few distinct bias points")
    if np.all(i_meas <= 0):
        raise FitError("degenerate I-V data: no positive currents")

    polarity = fixed.get("polarity", "n")
    temperature = fixed.get("temperature", 300.0)
    floor = 1e-9 * float(np.max(np.abs(i_meas)))

    def residuals(x):
        v, mu, vt0, dibl, beta = x
        p = VSParams(polarity=polarity, v=v, mu=mu, l_gate=fixed["l_gate"],
                     c_inv=fixed["c_inv"], ss=fixed["ss"], v_t0=vt0,
                     dibl=dibl, beta=beta, temperature=temperature)
        i_model = drain_current(p, vgs, vds)
        return (i_model - i_meas) / np.maximum(np.abs(i_meas), floor)

    lo = [1e5, 1.0, -1.0, 0.0, 0.5]
    hi = [1e9, 1e4, 1.0, 0.5, 4.0]
    seeds = [
        [1e7, 200.0, 0.2, 0.1, 1.8],
        [3e7, 500.0, 0.4, 0.05, 1.4],
        [5e6, 80.0, 0.1, 0.2, 2.4],
    ][:starts]
    best = None
    for x0 in seeds:
        try:
            sol = least_squares(residuals, x0, bounds=(lo, hi), method="trf", xtol=1e-12, ftol=1e-12)
        except ValueError as exc:
            raise FitError(f"fit failed: {exc}") from exc
        if best is None or sol.cost < best.cost:
            best = sol
    v, mu, vt0, dibl, beta = best.x
    p = VSParams(polarity=polarity, v=v, mu=mu, l_gate=fixed["l_gate"],
                 c_inv=fixed["c_inv"], ss=fixed["ss"], v_t0=vt0, dibl=dibl,
                 beta=beta, temperature=temperature)
    rms = float(np.sqrt(np.mean(residuals(best.x) ** 2)))
    return FitResult(params=p, rms_rel_error=rms, n_points=len(pts))


# --- device parameter / I-V file formats -----------------------------------

_PARAM_FIELDS = ("polarity", "v", "mu", "l_gate", "c_inv", "ss", "v_t0",
                 "dibl", "beta", "temperature")


def save_params(p: VSParams, path) -> None:
    with open(path, "w") as fh:
        for name in _PARAM_FIELDS:
            fh.write(f"{name}={getattr(p, name)}\n")


def load_params(path) -> VSParams:
    """Key-value device file with exactly the VSParams field names."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _PARAM_FIELDS:
                raise SchemaError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise SchemaError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val.strip()
    missing = set(_PARAM_FIELDS) - set(values)
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    kwargs = {"polarity": values.pop("polarity")}
    kwargs.update({k: float(v) for k, v in values.items()})
    return VSParams(**kwargs)


IV_CSV_HEADER = ["v_gs", "v_ds", "i_d_uA_per_um"]


def load_iv_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != IV_CSV_HEADER:
        raise SchemaError(f"{path}: header must be {','.join(IV_CSV_HEADER)}")
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != 3:
            raise SchemaError(f"{path}:{lineno}: expected 3 columns")
        out.append(IVPoint(float(row[0]), float(row[1]), float(row[2])))
    return out


def save_iv_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(IV_CSV_HEADER)
        for q in points:
            w.writerow([q.v_gs, q.v_ds, q.i_d])
