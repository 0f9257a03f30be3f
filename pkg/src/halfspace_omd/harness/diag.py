"""Invariant suites run by the ``diag`` subcommand."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..learner import refine
from ..optimizer import ConstraintSet
from ..oracle import NOISE_KINDS, NoiseModel, Oracle, derive_seed
from ..sampling import KINDS, MarginalSpec, band_acceptance, make_rng
from ..vecmath import PNormParams, angle, grad_phi, grad_phi_star, hard_threshold

BAND_WIDTHS = (0.05, 0.1, 0.25)
DEFAULT_C2 = 0.1
LEMMA_SLACK = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    failures: list

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return f"[{status}] {self.name}: {self.checks - len(self.failures)}/{self.checks} checks{extra}"


def _result(name, checks, failures):
    return SuiteResult(name, not failures, checks, failures)


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def link_roundtrip(seed=0, trials=50, rel_tol=1e-9) -> SuiteResult:
    """grad_phi_star inverts grad_phi up to rounding."""
    rng = make_rng(seed)
    failures = []
    checks = 0
    for d in (2, 10, 100, 1000):
        params = PNormParams.for_dim(d)
        for _ in range(trials):
            z = rng.standard_normal(d) * 10.0 ** rng.uniform(-3, 3)
            back = grad_phi_star(grad_phi(z, params), params)
            err = np.linalg.norm(back - z) / np.linalg.norm(z)
            checks += 1
            if not err <= rel_tol:
                failures.append(f"d={d}: relative roundtrip error {err:.2e}")
    return _result("link_roundtrip", checks, failures)


def band_mass(c2=DEFAULT_C2, n=100_000, seed=0, d=10) -> SuiteResult:
    """Acceptance of 0 < w.x <= b lies in [c2 b, b] up to 3 standard errors."""
    failures = []
    checks = 0
    for kind in KINDS:
        spec = MarginalSpec(kind, d)
        w = _unit(make_rng(derive_seed(seed, kind, "direction")), d)
        for b in BAND_WIDTHS:
            rate, se = band_acceptance(spec, w, b, n, make_rng(derive_seed(seed, kind, b)))
            checks += 1
            if not (c2 * b - 3 * se <= rate <= b + 3 * se):
                failures.append(f"{kind} b={b}: rate {rate:.5f} outside [{c2 * b:.5f}, {b:.5f}]"
                                f" (stderr {se:.1e})")
    return _result("band_mass", checks, failures)


def shipped_noise_models(nu=0.1):
    return [NoiseModel("realizable")] + [NoiseModel(k, nu) for k in NOISE_KINDS if k != "realizable"]


def noise_budget(n=100_000, seed=0, d=10, s=3, nu=0.1) -> SuiteResult:
    """Measured flip rate of every noise model stays within nu + 3 standard errors."""
    failures = []
    checks = 0
    for kind in KINDS:
        for model in shipped_noise_models(nu):
            oracle = Oracle.build(kind, d, s, model, derive_seed(seed, kind, model.kind))
            rate = oracle.noise_rate_estimate(n)
            se = math.sqrt(max(rate * (1.0 - rate), 1e-12) / n)
            checks += 1
            if rate > model.nu + 3 * se:
                failures.append(f"{kind}/{model.kind}: flip rate {rate:.5f} > nu={model.nu}")
    return _result("noise_budget", checks, failures)


def expansion(triples=1000, seed=0) -> SuiteResult:
    """Normalization and hard thresholding at most double distances; angle vs chord."""
    rng = make_rng(seed)
    failures = []
    checks = 0
    for i in range(triples):
        d = int(rng.integers(2, 60))
        s = int(rng.integers(1, d + 1))
        v = _unit(rng, d)
        w = v + rng.standard_normal(d) * rng.uniform(0.01, 2.0)
        if np.any(w):
            lhs = np.linalg.norm(w / np.linalg.norm(w) - v)
            checks += 1
            if lhs > 2.0 * np.linalg.norm(w - v) + LEMMA_SLACK:
                failures.append(f"triple {i}: normalization expands {lhs:.3e}")
        vs = hard_threshold(v, s)
        vs /= np.linalg.norm(vs)
        ws = vs + rng.standard_normal(d) * rng.uniform(0.01, 2.0)
        lhs = np.linalg.norm(hard_threshold(ws, s) - vs)
        checks += 1
        if lhs > 2.0 * np.linalg.norm(ws - vs) + LEMMA_SLACK:
            failures.append(f"triple {i}: thresholding expands {lhs:.3e}")
        a, b = _unit(rng, d), _unit(rng, d)
        chord = np.linalg.norm(a - b)
        theta = angle(a, b)
        checks += 1
        if not (chord <= theta + LEMMA_SLACK and theta <= math.pi * chord + LEMMA_SLACK):
            failures.append(f"triple {i}: angle {theta:.3e} vs chord {chord:.3e}")
    return _result("expansion", checks, failures)


def ledger_run(seed, d=10, s=3, T=400, b=0.125, alpha=0.02, radius=math.pi / 8, noise=None):
    """One refine run started near the target; returns its trace."""
    noise = noise or NoiseModel("realizable")
    oracle = Oracle.build("gaussian", d, s, noise, seed)
    rng = make_rng(derive_seed(seed, "start"))
    u = oracle.u
    w0 = u + rng.standard_normal(d) * 0.15
    w0 = hard_threshold(w0, s)
    w0 /= np.linalg.norm(w0)
    K = ConstraintSet.refine_phase(w0, radius)
    res = refine(w0, oracle, 0.05, s, alpha, b, K, w0, T)
    return res.trace


def regret_ledger(runs=5, seed=0) -> SuiteResult:
    """Regret inequality with slack >= -1e-6 whenever u stays in K; hinge side >= 0."""
    failures = []
    checks = 0
    for r in range(runs):
        try:
            tr = ledger_run(derive_seed(seed, "ledger", r))
        except AssertionError as exc:
            checks += 1
            failures.append(f"run {r}: {exc}")
            continue
        checks += 1
        if tr.updates and tr.min_hinge < 0.0:
            failures.append(f"run {r}: hinge side {tr.min_hinge:.3e} < 0")
        if tr.u_in_K:
            checks += 1
            if tr.slack < -1e-6:
                failures.append(f"run {r}: ledger slack {tr.slack:.3e}")
    return _result("regret_ledger", checks, failures)


def run_suites(names, diag_cfg: dict, seed: int = 0) -> list[SuiteResult]:
    n = diag_cfg.get("n", 100_000)
    table = {
        "link_roundtrip": lambda: link_roundtrip(seed),
        "band_mass": lambda: band_mass(diag_cfg.get("c2", DEFAULT_C2), n, seed),
        "noise_budget": lambda: noise_budget(n, seed),
        "expansion": lambda: expansion(diag_cfg.get("triples", 1000), seed),
        "regret_ledger": lambda: regret_ledger(diag_cfg.get("refine_runs", 5), seed),
    }
    return [table[name]() for name in names]
