"""Cap operators, cylinder Dirichlet-to-Neumann eigenvalues, adiabatic limits.

The two compact pieces glued to the cylinder enter every identity checked
here only through their boundary maps, modelled as diagonal
:class:`CapOperator` instances: an eigenvalue function mu(lam) >= 0 on
each magnitude pair plus a separate value on the kernel.  The restricted
family mu(lam) = lam + c (1 + lam^2)^(-beta) (or the degenerate zero cap)
keeps every relative determinant absolutely convergent, which is checked
against the model's growth before use.

Four DtN variants are evaluated per mode: with a Dirichlet interface both
sides read mu + lam coth(lam r), while the spectral-projection (APS)
interface flattens its own sign side to mu + lam exactly.  Absolute
log-determinants of these operators are never formed; only

* differences of two variants over the same cap (absolutely convergent,
  decaying like e^(-2 lam r)),
* the Robin-boundary map determinant, regularized as
  log 2 * zeta_sq(0) + logdet_sq/2 - sum m log(1 - e^(-2 lam r)) + k log(1/r),
* the adiabatic bracket combining both, whose r -> infinity limit is
  -(log 2 * zeta_sq(0) + logdet_sq/2),

plus the coupled two-sided blocks whose minimum eigenvalue certifies
injectivity of the glued boundary operator, and the detector for modes
annihilated by cap + magnitude (the obstruction to all of the above).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from math import fsum

from .errors import ConvergenceError, DomainError, KernelModeError
from .spectral_models import TangentialModel, zeta_abs, zeta_sq, zeta_sq_deriv0

__all__ = [
    "CapOperator",
    "DtNVariant",
    "Block2x2",
    "RegScalar",
    "dtn_eigenvalue",
    "exp_correction_sum",
    "robin_dtn_logdet",
    "robin_dtn_limit",
    "robin_dtn_limit_bound",
    "dtn_difference_logdet",
    "difference_trace",
    "adiabatic_bracket",
    "blocks_min_eig",
    "extended_solution_detect",
    "validate_cap_for_model",
    "load_cap",
    "cap_to_json_dict",
    "fit_exp_decay",
]

_LOG2 = math.log(2.0)
_MAX_MODES = 2_000_000


@dataclass(frozen=True)
class RegScalar:
    """A regularized number together with its assembly decomposition.

    ``pieces`` maps a part name to (coefficient, invariant); the value is
    the sum of the products, re-assertable via :meth:`recombine`.
    """

    value: complex
    pieces: dict
    est_error: float

    def recombine(self) -> complex:
        terms = [complex(c) * complex(v) for c, v in self.pieces.values()]
        return complex(fsum(t.real for t in terms), fsum(t.imag for t in terms))

    @property
    def real(self) -> float:
        return self.value.real

    def to_json_dict(self) -> dict:
        def enc(x):
            x = complex(x)
            return x.real if x.imag == 0.0 else [x.real, x.imag]

        return {
            "value": enc(self.value),
            "pieces": {k: [enc(c), enc(v)] for k, (c, v) in self.pieces.items()},
            "est_error": self.est_error,
        }


# ---------------------------------------------------------------------------
# cap operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapOperator:
    """Diagonal model of a compact piece's boundary map.

    ``mu(lam)`` acts on the magnitude pair; ``kernel_value`` on zero
    modes.  kind "absB_plus" is lam + c (1 + lam^2)^(-beta); kind "zero"
    is the degenerate constant 0.
    """

    kind: str = "absB_plus"
    pert_c: float = 0.0
    pert_beta: float = 1.0
    kernel_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("absB_plus", "zero"):
            raise DomainError(f"unknown cap kind {self.kind!r}")
        if self.pert_c != 0.0 and self.pert_beta < 1.0:
            raise DomainError(f"perturbation exponent must be >= 1, got {self.pert_beta!r}")
        if not math.isfinite(self.kernel_value) or self.kernel_value < 0.0:
            raise DomainError(f"kernel_value must be >= 0, got {self.kernel_value!r}")

    def mu(self, lam: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.pert_c == 0.0:
            return lam
        return lam + self.pert_c * (1.0 + lam * lam) ** (-self.pert_beta)

    def perturbation(self, lam: float) -> float:
        """mu(lam) - lam, the deviation from the pure magnitude cap."""
        return self.mu(lam) - lam


def validate_cap_for_model(cap: CapOperator, model: TangentialModel) -> None:
    """Enforce the cap invariants against a model: mu >= 0 on all modes and
    sum m |mu - lam| / lam finite for the model's growth."""
    if model.kind == "arithmetic":
        if cap.kind == "zero":
            raise DomainError("zero cap is not summable against an infinite model")
        # |p(lam)|/lam ~ |c| lam^(-1-2 beta): need growth < 1 + 2 beta
        if cap.pert_c != 0.0 and model.spectral_growth >= 1.0 + 2.0 * cap.pert_beta:
            raise DomainError(
                f"cap perturbation decay beta={cap.pert_beta} too slow for "
                f"model growth {model.spectral_growth}"
            )
    bound = abs(cap.pert_c) + 1.0
    for lam, _ in model.modes(lam_max=bound):
        if cap.mu(lam) < 0.0:
            raise DomainError(f"cap eigenvalue mu({lam}) = {cap.mu(lam)} is negative")


class DtNVariant(str, Enum):
    M1_DIRICHLET = "M1_Dirichlet"
    M2_DIRICHLET = "M2_Dirichlet"
    M1_APS = "M1_APS"
    M2_APS = "M2_APS"


@dataclass(frozen=True)
class Block2x2:
    """Symmetric per-mode block of the two-sided boundary operator."""

    a: float
    b: float
    c: float

    def eigenvalues(self) -> tuple[float, float]:
        mean = 0.5 * (self.a + self.c)
        rad = math.hypot(0.5 * (self.a - self.c), self.b)
        return mean - rad, mean + rad


def _coth_minus_one(x: float) -> float:
    """coth(x) - 1 = 2 e^(-2x) / (1 - e^(-2x)), stable for large x."""
    e = math.exp(-2.0 * x)
    return 2.0 * e / (1.0 - e)


def dtn_eigenvalue(cap: CapOperator, lam_signed: float, r: float,
                   variant: DtNVariant) -> float:
    """Per-mode eigenvalue of one cylinder DtN variant at signed lam != 0.

    Dirichlet variants give mu + |lam| coth(|lam| r); an APS interface
    flattens its own sign side to mu + |lam| exactly and keeps the coth
    on the other side.
    """
    if lam_signed == 0.0:
        raise KernelModeError("DtN variants are defined on nonzero modes only")
    if r <= 0.0:
        raise DomainError("need r > 0")
    al = abs(lam_signed)
    flat = (variant is DtNVariant.M1_APS and lam_signed > 0.0) or (
        variant is DtNVariant.M2_APS and lam_signed < 0.0)
    extra = 0.0 if flat else al * _coth_minus_one(al * r)
    return cap.mu(al) + al + extra


# ---------------------------------------------------------------------------
# convergent mode sums
# ---------------------------------------------------------------------------

def _adaptive_signed_sum(model: TangentialModel, term, *, what: str):
    """sum over the signed nonzero spectrum of m * term(lam) for terms with
    an exponential envelope; returns (value, tail_estimate)."""
    total = []
    running = 0.0
    prev = None
    tail = 0.0
    zeros = 0
    for lam, m in model.modes(max_count=_MAX_MODES, lam_max=math.inf if model.is_finite else None):
        t = 2.0 * m * term(lam)
        total.append(t)
        running += t
        if not model.is_finite:
            if t == 0.0:
                zeros += 1
                if zeros >= 3:  # identically vanishing or underflowed tail
                    break
            else:
                zeros = 0
            if prev is not None and abs(t) < 1e-17 * (1.0 + abs(running)):
                ratio = abs(t) / abs(prev) if prev != 0.0 else 0.0
                if ratio < 0.9:
                    tail = abs(t) * ratio / (1.0 - ratio)
                    break
        if abs(t) > 0.0:
            prev = t
    else:
        if not model.is_finite:
            raise ConvergenceError(f"{what}: no convergence within {_MAX_MODES} modes")
    return fsum(total), tail


def exp_correction_sum(model: TangentialModel, r: float) -> tuple[float, float]:
    """sum over the signed spectrum of m log(1 - e^(-2 lam r)), with tail bound."""
    if r <= 0.0:
        raise DomainError("need r > 0")
    value, tail = _adaptive_signed_sum(
        model, lambda lam: math.log1p(-math.exp(-2.0 * lam * r)),
        what="exponential correction sum")
    return value, tail


def robin_dtn_limit(model: TangentialModel) -> tuple[float, float]:
    """r -> infinity limit of the Robin-map determinant:
    log 2 * zeta_sq(0) + logdet_sq / 2, with error estimate."""
    z0 = zeta_sq(model, 0.0)
    dz, dz_err = zeta_sq_deriv0(model)
    value = _LOG2 * z0.value.real - 0.5 * dz
    return value, _LOG2 * z0.est_error + 0.5 * dz_err


def robin_dtn_limit_bound(model: TangentialModel, r: float) -> float:
    """Explicit envelope sum m e^(-2 lam r) / (1 - e^(-2 lam_min r)) bounding
    the distance of the Robin-map determinant from its limit."""
    lam_min = model.lambda_min()
    value, tail = _adaptive_signed_sum(
        model, lambda lam: math.exp(-2.0 * lam * r), what="limit envelope")
    return (value + 2.0 * tail) / (1.0 - math.exp(-2.0 * lam_min * r))


def robin_dtn_logdet(model: TangentialModel, r: float) -> RegScalar:
    """Regularized log-determinant of the Robin-boundary map at length r.

    Assembled as log 2 * zeta_sq(0) + logdet_sq/2 - sum_{lam != 0} m
    log(1 - e^(-2 lam r)) + k log(1/r); every piece is recorded.
    """
    if r <= 0.0:
        raise DomainError("need r > 0")
    z0 = zeta_sq(model, 0.0)
    dz, dz_err = zeta_sq_deriv0(model)
    tail_sum, tail_err = exp_correction_sum(model, r)
    k = model.kernel_dim
    pieces = {
        "count_part": (_LOG2, z0.value.real),
        "log_part": (-0.5, dz),
        "linear_in_r": (0.0, zeta_abs(model, -1.0).value.real),
        "convergent_tail": (-1.0, tail_sum),
        "kernel_part": (float(k), -math.log(r)),
    }
    value = fsum(c * v for c, v in pieces.values())
    est = _LOG2 * z0.est_error + 0.5 * dz_err + tail_err + 4e-16 * (abs(value) + 1.0)
    return RegScalar(value=complex(value), pieces=pieces, est_error=est)


def dtn_difference_logdet(model: TangentialModel, cap: CapOperator, r: float,
                          variant_a: DtNVariant, variant_b: DtNVariant) -> float:
    """sum over signed modes of m log(eig_a / eig_b): the relative
    determinant of two DtN variants over the same cap.  Absolutely
    convergent; no regularization enters."""
    validate_cap_for_model(cap, model)
    if r <= 0.0:
        raise DomainError("need r > 0")

    def term(lam: float) -> float:
        # average of the two signed modes of this magnitude
        out = 0.0
        for sgn in (lam, -lam):
            ea = dtn_eigenvalue(cap, sgn, r, variant_a)
            eb = dtn_eigenvalue(cap, sgn, r, variant_b)
            out += 0.5 * math.log1p((ea - eb) / eb)
        return out

    value, _ = _adaptive_signed_sum(model, term, what="DtN difference")
    return value


def difference_trace(model: TangentialModel, cap: CapOperator, r: float,
                     variant_a: DtNVariant, variant_b: DtNVariant) -> float:
    """Trace of the varying part between two DtN variants (the compact
    correction whose vanishing trace drives the shared limits)."""
    validate_cap_for_model(cap, model)

    def term(lam: float) -> float:
        out = 0.0
        for sgn in (lam, -lam):
            out += 0.5 * (dtn_eigenvalue(cap, sgn, r, variant_a)
                          - dtn_eigenvalue(cap, sgn, r, variant_b))
        return out

    value, _ = _adaptive_signed_sum(model, term, what="DtN difference trace")
    return value


def adiabatic_bracket(model: TangentialModel, cap1: CapOperator, cap2: CapOperator,
                      r: float) -> float:
    """The r-dependent bracket of the adiabatic decomposition, written with
    convergent differences:

        -robin_dtn_logdet(r) + [M1 Dirichlet vs APS] + [M2 Dirichlet vs APS].

    Tends to -(log 2 * zeta_sq(0) + logdet_sq/2) as r -> infinity.
    Requires a trivial kernel."""
    if model.kernel_dim != 0:
        raise KernelModeError("adiabatic bracket requires a model with trivial kernel")
    d1 = dtn_difference_logdet(model, cap1, r, DtNVariant.M1_DIRICHLET, DtNVariant.M1_APS)
    d2 = dtn_difference_logdet(model, cap2, r, DtNVariant.M2_DIRICHLET, DtNVariant.M2_APS)
    return -robin_dtn_logdet(model, r).value.real + d1 + d2


def blocks_min_eig(model: TangentialModel, cap1: CapOperator, cap2: CapOperator,
                   r: float) -> tuple[float, float]:
    """Global minimum eigenvalue over all per-mode 2x2 blocks of the
    two-sided boundary operator, and the magnitude where it occurs.

    Block at magnitude lam: [[mu1 + lam + A e^(-2 r lam), -A],
    [-A, mu2 + lam + A e^(-2 r lam)]] with A = 2 lam / (e^(2 r lam) -
    e^(-2 r lam)).  A positive result certifies injectivity at this r;
    a crossing is reported, not raised."""
    if model.kernel_dim != 0:
        raise KernelModeError("two-sided blocks are defined for trivial kernels")
    if r <= 0.0:
        raise DomainError("need r > 0")
    best = math.inf
    best_lam = math.nan
    floor = min(0.0, -abs(cap1.pert_c), -abs(cap2.pert_c))
    settled = 0
    for lam, _ in model.modes(max_count=200_000,
                              lam_max=math.inf if model.is_finite else None):
        e2 = math.exp(-2.0 * r * lam)
        amp = 2.0 * lam * e2 / (1.0 - e2 * e2)
        diag = amp * e2
        block = Block2x2(a=cap1.mu(lam) + lam + diag, b=-amp, c=cap2.mu(lam) + lam + diag)
        lo, _ = block.eigenvalues()
        if lo < best:
            best, best_lam = lo, lam
        # all later blocks are bounded below by lam + floor - amp
        if lam + floor - amp > best:
            settled += 1
            if settled >= 5:
                break
        else:
            settled = 0
    return best, best_lam


def extended_solution_detect(model: TangentialModel, cap1: CapOperator,
                             cap2: CapOperator) -> list[dict]:
    """Modes annihilated by cap + magnitude, the obstruction to the
    adiabatic identities: nonzero modes with mu_i(lam) + lam = 0 within
    1e-12, plus kernel modes whose cap value vanishes."""
    offending = []
    for idx, cap in ((1, cap1), (2, cap2)):
        # mu + lam >= 2 lam - |c|: nothing to scan past (|c| + 1)/2
        lam_stop = 0.5 * (abs(cap.pert_c) + 1.0) + 1.0
        for lam, _ in model.modes(lam_max=lam_stop):
            if cap.mu(lam) + lam <= 1e-12:
                offending.append({"cap": idx, "lam": lam, "kernel": False})
        if model.kernel_dim > 0 and cap.kernel_value <= 1e-12:
            offending.append({"cap": idx, "lam": 0.0, "kernel": True})
    return offending


# ---------------------------------------------------------------------------
# utilities
# ---------------------------------------------------------------------------

def fit_exp_decay(rs, values) -> tuple[float, float]:
    """Least-squares fit of log|v| = logC - rate * r; returns (rate, logC)."""
    pts = [(r, abs(v)) for r, v in zip(rs, values) if abs(v) > 0.0]
    if len(pts) < 2:
        raise DomainError("need at least two nonzero samples for a decay fit")
    n = len(pts)
    xs = [p[0] for p in pts]
    ys = [math.log(p[1]) for p in pts]
    xbar = fsum(xs) / n
    ybar = fsum(ys) / n
    sxx = fsum((x - xbar) ** 2 for x in xs)
    sxy = fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return -slope, ybar - slope * xbar


def cap_to_json_dict(cap: CapOperator) -> dict:
    data = {"mu": cap.kind, "kernel_value": cap.kernel_value}
    if cap.pert_c != 0.0:
        data["pert"] = {"c": cap.pert_c, "beta": cap.pert_beta}
    return data


def cap_from_json_dict(data: dict) -> CapOperator:
    if not isinstance(data, dict) or "mu" not in data:
        raise DomainError("cap file must be a JSON object with a 'mu' field")
    pert = data.get("pert") or {}
    try:
        return CapOperator(
            kind=str(data["mu"]),
            pert_c=float(pert.get("c", 0.0)),
            pert_beta=float(pert.get("beta", 1.0)),
            kernel_value=float(data.get("kernel_value", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise DomainError(f"malformed cap file: {exc}") from exc


def load_cap(source) -> CapOperator:
    """Build a cap from a JSON file path, JSON text, or a parsed dict."""
    if isinstance(source, dict):
        return cap_from_json_dict(source)
    text = source
    if not str(source).lstrip().startswith("{"):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DomainError(f"cannot read cap file {source!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in cap file: {exc}") from exc
    return cap_from_json_dict(data)
