"""Self-check suite over the invariants of every module.

Each check returns a :class:`Check`; :func:`run_validate` collects them into
a report that can be printed or serialized to JSON. All sampling uses fixed
seeds so the report is reproducible.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import exact_diag as ed
from .meanfield import (
    MeanFieldProblem,
    energy,
    energy_gradient_wrt_Omega,
    omega_zero_beta_squared,
    solve_ground_state,
    stationarity_residual,
)
from .params import ModelParams, RawPhysicalParams, compute_w, derive_model_params
from .phases import BETA_RANGES, RESPONSE_SIGNS, detect_jump, diagnose

SEED = 20091
#: Bound on |E_ED/N - E_mf| at N = 32 for the reference point, from the
#: measured convergence study (observed 2.82e-4, decaying as 1/N).
ED_GAP_BOUND_N32 = 5e-4
ED_REFERENCE = ModelParams(omega_a=1.0, omega_b=1.0, eta=0.3, lam=1.0, Omega=0.2, N=32)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  ({c.seconds:.2f}s)  {c.detail}"
                 for c in self.checks]
        n_ok = sum(c.passed for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} checks passed")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed,
                           "checks": [asdict(c) for c in self.checks]}, indent=2)


def _random_problems(rng, n, omega_zero=False):
    out = []
    for _ in range(n):
        ob = rng.uniform(-3, 3)
        Om = 0.0 if omega_zero else rng.uniform(-2, 2)
        w = rng.uniform(1e-3, 3)
        out.append(MeanFieldProblem(ob, Om, w))
    return out


def check_w_sign_invariance():
    p = ModelParams(1.3, 0.7, -0.2, 0.9, 0.1)
    flipped = replace(p, lam=-p.lam)
    ok = compute_w(p) == compute_w(flipped)
    return ok, f"w={compute_w(p).w:.6g}"


def check_scale_covariance():
    raw = RawPhysicalParams(g13=0.5, Omega23=0.8, Delta=40.0, omega_cavity=12.0,
                            omega_cl=3.0, omega_mw=4.0, Omega_mw=0.3, nu1=0.2,
                            nu2=0.5, omega1=1.0, omega2=6.0, eta1=0.01, eta2=0.02,
                            eta12=0.005, N=50)
    base = derive_model_params(raw)
    c = 3.7
    scaled_raw = replace(raw, **{k: c * getattr(raw, k) for k in (
        "g13", "Omega23", "Delta", "omega_cavity", "omega_cl", "omega_mw", "Omega_mw",
        "nu1", "nu2", "omega1", "omega2", "eta1", "eta2", "eta12")})
    scaled = derive_model_params(scaled_raw)
    worst = max(abs(getattr(scaled, k) - c * getattr(base, k)) / max(1.0, abs(c * getattr(base, k)))
                for k in ("omega_a", "omega_b", "eta", "lam", "Omega"))
    return worst < 1e-12, f"max rel err {worst:.2e}"


def check_global_optimality():
    rng = np.random.default_rng(SEED)
    audit = np.linspace(-1, 1, 10_001)
    worst = -math.inf
    for p in _random_problems(rng, 200):
        sol = solve_ground_state(p)
        u = audit ** 2 - 0.5
        grid = p.omega_b * u - 2 * p.Omega * audit * np.sqrt(1 - audit ** 2) + p.w * u * u
        worst = max(worst, (sol.energy - grid.min()) / max(1.0, abs(sol.energy)))
    return worst <= 1e-10, f"max (E_sol - min audit) = {worst:.2e}"


def check_stationarity():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for p in _random_problems(rng, 200):
        sol = solve_ground_state(p)
        if abs(sol.beta) < 1 - 1e-6:
            bound = 1e-8 * (abs(p.omega_b) + abs(p.Omega) + abs(p.w) + 1)
            worst = max(worst, sol.residual / bound)
    return worst <= 1.0, f"max residual/bound {worst:.2e}"


def check_residual_identity():
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for p in _random_problems(rng, 50):
        for b in rng.uniform(-0.95, 0.95, 5):
            h = 1e-6
            fd = (energy(b + h, p) - energy(b - h, p)) / (2 * h)
            lhs = stationarity_residual(b, p)
            worst = max(worst, abs(lhs - 0.5 * math.sqrt(1 - b * b) * fd))
    return worst < 1e-7, f"max |r - sqrt(1-b^2)/2 dE/db| = {worst:.2e}"


def check_symmetry():
    rng = np.random.default_rng(SEED + 3)
    worst_b = worst_e = 0.0
    for p in _random_problems(rng, 300):
        if p.Omega == 0:
            continue
        a = solve_ground_state(p)
        b = solve_ground_state(MeanFieldProblem(p.omega_b, -p.Omega, p.w))
        worst_b = max(worst_b, abs(a.beta + b.beta))
        worst_e = max(worst_e, abs(a.energy - b.energy) / max(abs(a.energy), 1e-300))
    return worst_b < 1e-10 and worst_e < 1e-12, f"beta {worst_b:.1e}, energy rel {worst_e:.1e}"


def check_omega_zero_closed_form():
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for p in _random_problems(rng, 200, omega_zero=True):
        sol = solve_ground_state(p)
        b2 = omega_zero_beta_squared(p.omega_b, p.w)
        u = b2 - 0.5
        e = p.omega_b * u + p.w * u * u
        worst = max(worst, abs(sol.beta_squared - b2) / 1e-8, abs(sol.energy - e) / 1e-10)
    return worst <= 1.0, f"max err/tol {worst:.2e}"


def check_envelope():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    h = 1e-5
    for p in _random_problems(rng, 100):
        sol = solve_ground_state(p)
        if sol.degenerate or abs(p.Omega) < 10 * h:
            continue
        ep = solve_ground_state(MeanFieldProblem(p.omega_b, p.Omega + h, p.w)).energy
        em = solve_ground_state(MeanFieldProblem(p.omega_b, p.Omega - h, p.w)).energy
        worst = max(worst, abs((ep - em) / (2 * h) - energy_gradient_wrt_Omega(sol)))
    return worst < 1e-4, f"max |FD - envelope| = {worst:.2e}"


def check_table_signs():
    bad = []
    for ob, Om in ((1, 0.3), (1, -0.3), (-1, 0.3), (-1, -0.3)):
        pt = diagnose(MeanFieldProblem(ob, Om, 1.0))
        lo, hi = BETA_RANGES[pt.label]
        if pt.response_signs() != RESPONSE_SIGNS[pt.label] or not lo < pt.solution.beta < hi:
            bad.append(str(pt.label))
    return not bad, "mismatch: " + ",".join(bad) if bad else "P1-P4 match"


def check_first_order_jump():
    j = detect_jump(1.0, 2.0, 1e-8)
    n = detect_jump(2.0, 1.0, 1e-8)
    ok = (abs(j.delta_beta - 1.0) < 1e-4 and j.energy_gap < 1e-8
          and abs(j.delta_dE_dOmega - math.sqrt(3)) < 1e-3 and j.first_order
          and abs(n.delta_beta) < 1e-6 and not n.first_order)
    return ok, f"jump {j.delta_beta:.6f}, slope gap {j.delta_dE_dOmega:.6f}"


def check_hamiltonian_structure():
    p = ModelParams(1.0, 0.8, 0.3, 0.7, 0.0, N=6)
    H = ed.build_hamiltonian(p, 8)
    sym = (H != H.T).nnz == 0
    basis = ed.EDBasis(6, 8)
    q = ed.excitation_number(basis)
    coo = H.tocoo()
    cross = int(np.count_nonzero(q[coo.row] != q[coo.col]))
    return sym and cross == 0, f"symmetric={sym}, cross-sector entries={cross}"


def check_decoupled_ed():
    p = ModelParams(1.0, 1.0, 0.3, 0.0, 0.0, N=10)
    r = ed.ground_state(p)
    ok = abs(r.energy_per_atom - (-0.5 + 0.3 / 4)) < 1e-10 and abs(r.jz_per_atom + 0.5) < 1e-10
    return ok, f"E/N={r.energy_per_atom:.12f}"


def check_variational_bound():
    worst = -math.inf
    for p in (ModelParams(1, 1, 0.3, 1, 0.2, 8), ModelParams(1, 0.5, 0.0, 1.2, 0.0, 6),
              ModelParams(1, -1, 0.5, 0.8, -0.3, 6)):
        r = ed.ground_state(p)
        bound = ed.coherent_energy_per_atom(p, r.n_max_used)
        worst = max(worst, r.energy_per_atom - bound)
    return worst <= 1e-12, f"max E_ED - E_coherent = {worst:.2e}"


def check_ed_mean_field_gap():
    row = ed.convergence_study(ED_REFERENCE, [32])[0]
    return row.gap < ED_GAP_BOUND_N32, f"gap(32)={row.gap:.3e} < {ED_GAP_BOUND_N32:g}"


CHECKS = (
    ("model-core: w invariant under lambda -> -lambda", check_w_sign_invariance),
    ("model-core: scale covariance", check_scale_covariance),
    ("meanfield: global optimality on audit grid", check_global_optimality),
    ("meanfield: stationarity residual", check_stationarity),
    ("meanfield: residual = sqrt(1-b^2)/2 dE/db", check_residual_identity),
    ("meanfield: Omega -> -Omega symmetry", check_symmetry),
    ("meanfield: Omega = 0 closed forms", check_omega_zero_closed_form),
    ("meanfield: envelope derivative", check_envelope),
    ("phases: P1-P4 sign table", check_table_signs),
    ("phases: first-order jump at Omega = 0", check_first_order_jump),
    ("exact-diag: symmetry and excitation blocks", check_hamiltonian_structure),
    ("exact-diag: decoupled limit", check_decoupled_ed),
    ("exact-diag: variational bound", check_variational_bound),
    ("exact-diag: mean-field gap at N=32", check_ed_mean_field_gap),
)


def run_validate(checks=CHECKS) -> ValidationReport:
    report = ValidationReport()
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        report.checks.append(Check(name, bool(ok), detail, time.perf_counter() - t0))
    return report
