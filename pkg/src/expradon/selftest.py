"""Built-in invariant suites used by ``expradon selftest`` and ``expradon bench``.

Each suite returns a list of :class:`Row` objects; a suite passes when every
row does.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .grids import ConstantAttenuation, DetectorGrid, RadialAttenuation, RadialGrid, derivative_s
from .inversion import invert, kernel_oracle, kernel_unified
from .phantoms import default_phantom, phantom_harmonics
from .projector import fourier_in_s, project_harmonic
from .range_checks import (
    check_evenness,
    check_fourier_evenness,
    check_moments,
    check_moments_derivative,
    check_novikov_harmonic,
)
from .special import BranchConvention, _ert_core, cheb_T_classical, cheb_U_classical, orthogonality_integral

__all__ = ["Row", "SUITES", "run_suite", "format_rows", "relative_errors", "bench"]


@dataclass(frozen=True)
class Row:
    name: str
    value: float
    target: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.target)


def format_rows(rows: List[Row]) -> str:
    width = max([len(r.name) for r in rows] + [4])
    lines = [f"{'check':<{width}}  {'value':>10}  {'target':>8}  result"]
    for r in rows:
        lines.append(f"{r.name:<{width}}  {r.value:10.2e}  {r.target:8.0e}  {'pass' if r.ok else 'FAIL'}")
    return "\n".join(lines)


def relative_errors(rec, ref, mask=slice(None)) -> Dict[int, float]:
    out = {}
    for n in ref.n_values:
        a, b = rec.harmonic(int(n))[mask], ref.harmonic(int(n))[mask]
        nb = np.linalg.norm(b)
        out[int(n)] = float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a))
    return out


# --------------------------------------------------------------------------


def _identities(samples=1000, seed=7):
    rng = np.random.default_rng(seed)
    n = rng.integers(-8, 9, samples)
    # dyadic r and 40-bit s/r keep s = x*r exact, so the classical
    # polynomials see the same argument as the attenuated functions
    r = rng.integers(3, 17, samples) / 16
    x = rng.integers(-3 * 2**39, 3 * 2**39, samples) / 2**40
    s = x * r
    mu = (rng.normal(size=samples) + 1j * rng.normal(size=samples)) * 0.7
    worst = dict.fromkeys(("parity T", "index T", "parity U", "index U", "exterior split",
                           "mu=0 T", "mu=0 U"), 0.0)

    def bump(key, err):
        worst[key] = max(worst[key], float(np.max(err, initial=0.0)))

    ext = np.abs(x) > 1 + 1e-3
    u = np.sqrt(np.where(ext, s * s - r * r, 1.0))
    for conv in BranchConvention:
        def TU(k, ss, m):
            return _ert_core(k, ss, r, m, conv)

        T, U = TU(n, s, mu)
        Tm, Um = TU(n, s, -mu)
        Tr, Ur = TU(n, -s, mu)
        bump("parity T", np.abs(Tr - (-1.0) ** n * Tm))
        bump("index T", np.abs(Tm - TU(-n, s, mu)[0]))
        # U~_n uses index n + 1 in the (T~_n, U~_{n-1}) pair
        Un_r, Un_m = TU(n + 1, -s, mu)[1], TU(n + 1, s, -mu)[1]
        bump("parity U", np.abs(Un_r - (-1.0) ** n * Un_m))
        bump("index U", np.abs(Um + TU(-n, s, mu)[1]))
        for sg in (1, -1):
            lhs = U + sg * (r / u) * T
            rhs = sg * (r / u) * np.exp(sg * 1j * mu * u) * ((s + sg * u) / r) ** n
            bump("exterior split", np.where(ext, np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs)), 0))
        T0, U0 = TU(n, s, np.zeros(samples))
        for k in range(0, 9):
            sel = n == k
            bump("mu=0 T", np.abs(T0[sel] - cheb_T_classical(k, x[sel])))
            if k >= 1:
                bump("mu=0 U", np.abs(U0[sel] - cheb_U_classical(k - 1, x[sel])))
    tol = {"mu=0 T": 1e-12, "mu=0 U": 1e-12}
    return [Row(k, v, tol.get(k, 1e-10)) for k, v in worst.items()]


ORTHO_MUS = (0.0, 0.5, 1j, 1 + 0.5j)
ORTHO_PAIRS = ((0.5, 1.0), (0.3, 0.9), (0.1, 0.4))
ORTHO_NS = (0, 1, 2, 5, 10)


def _orthogonality():
    rows = []
    for mu in ORTHO_MUS:
        worst = 0.0
        for n in ORTHO_NS:
            for s, t in ORTHO_PAIRS:
                val = orthogonality_integral(n, s, t, ConstantAttenuation(mu))
                worst = max(worst, abs(val - np.pi / 2) / (np.pi / 2))
        rows.append(Row(f"mu={mu}", worst, 1e-6))
    return rows


def radial_eta():
    return RadialAttenuation.from_function(lambda r: 0.3 + 0.2 * r * r, 256)


def _radial():
    eta = radial_eta()
    rows = []
    for n in ORTHO_NS:
        worst = 0.0
        for s, t in ORTHO_PAIRS:
            val = orthogonality_integral(n, s, t, eta)
            worst = max(worst, abs(val - np.pi / 2) / (np.pi / 2))
        rows.append(Row(f"radial orthogonality n={n}", worst, 1e-6))
    return rows


def _kernels(mu=0.3 + 0.2j):
    worst = 0.0
    for n in range(-6, 7):
        for r, s in ((0.6, 0.3), (0.5, -0.45), (0.7, 0.05), (0.5, 1.2), (0.4, -0.9), (0.8, 0.85)):
            o = kernel_oracle(n, r, s, mu, "+" if n >= 0 else "-")
            worst = max(worst, abs(o - kernel_unified(n, r, s, mu)) / max(1.0, abs(o)))
    return [Row("unified kernel vs contour oracle", worst, 1e-6)]


def _roundtrip(mu=0.3 + 0.2j, n_max=8):
    grid = RadialGrid.uniform(256)
    det = DetectorGrid(512, 1.2)
    spec = default_phantom()
    truth = phantom_harmonics(spec, grid, (-n_max, n_max))
    dp = derivative_s(project_harmonic(spec, ConstantAttenuation(mu), det, n_range=(-n_max, n_max)))
    rows = [Row("unified", max(relative_errors(invert(dp, "unified", grid=grid), truth).values()), 1e-2)]
    far = grid.nodes >= 0.2
    for m in ("interior", "exterior", "cormack"):
        err = relative_errors(invert(dp, m, grid=grid), truth, far)
        rows.append(Row(f"{m} (r >= 0.2)", max(err.values()), 1e-2))
    return rows


def _range():
    det = DetectorGrid(512, 1.2)
    spec = default_phantom()
    nr = (-6, 6)
    mu = 0.3 + 0.2j
    hp = project_harmonic(spec, ConstantAttenuation(mu), det, n_range=nr)
    hm = project_harmonic(spec, ConstantAttenuation(-mu), det, n_range=nr)
    dp = derivative_s(hp)
    ft = fourier_in_s(project_harmonic(spec, ConstantAttenuation(0.5), det, n_range=nr))
    return [
        Row("evenness", check_evenness(hp, hm).max_scaled(), 1e-8),
        Row("moments r=0", check_moments(hp, (0.0,)).max_scaled(), 1e-8),
        Row("moments of p'", check_moments_derivative(dp).max_scaled(), 1e-7),
        Row("harmonic Novikov", check_novikov_harmonic(dp, form="corrected").max_scaled(), 1e-6),
        Row("Fourier evenness mu=0.5", check_fourier_evenness(ft).max_scaled(), 1e-3),
    ]


SUITES: Dict[str, Callable[[], List[Row]]] = {
    "identities": _identities,
    "orthogonality": _orthogonality,
    "radial": _radial,
    "kernels": _kernels,
    "roundtrip": _roundtrip,
    "range": _range,
}


def run_suite(name: str) -> List[Row]:
    return SUITES[name]()


# --------------------------------------------------------------------------


def bench(mus, sigmas, n_maxes, methods, seed=0, detectors=512, radial_nodes=256):
    """Reconstruction error sweep; yields one dict per configuration.

    Noise is complex Gaussian added to p_n, with standard deviation sigma
    times max |p_n|. Exterior-type methods are scored on r >= 0.2.
    """
    rng = np.random.default_rng(seed)
    grid = RadialGrid.uniform(radial_nodes)
    det = DetectorGrid(detectors, 1.2)
    spec = default_phantom()
    for mu in mus:
        for n_max in n_maxes:
            truth = phantom_harmonics(spec, grid, (-n_max, n_max))
            clean = project_harmonic(spec, ConstantAttenuation(mu), det, n_range=(-n_max, n_max))
            peak = float(np.max(np.abs(clean.values)))
            for sigma in sigmas:
                shape = np.asarray(clean.values).shape
                noise = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) * (sigma * peak / np.sqrt(2))
                dp = derivative_s(clean.with_values(np.asarray(clean.values) + noise))
                for method in methods:
                    t0 = time.perf_counter()
                    rec = invert(dp, method, grid=grid)
                    mask = slice(None) if method in ("unified", "interior") else grid.nodes >= 0.2
                    errs = np.array(list(relative_errors(rec, truth, mask).values()))
                    yield {
                        "mu_re": complex(mu).real,
                        "mu_im": complex(mu).imag,
                        "sigma": sigma,
                        "n_max": n_max,
                        "method": method,
                        "max_rel_l2": float(errs.max()),
                        "median_rel_l2": float(np.median(errs)),
                        "seconds": time.perf_counter() - t0,
                        "seed": seed,
                    }
