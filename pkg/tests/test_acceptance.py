"""Acceptance criteria, one test and one summary line each."""

import itertools
import time

import numpy as np
import pytest

from lofusion.dualrail import (
    MINUS,
    PLUS,
    H,
    V,
    LogicalState,
    QubitLayout,
    apply_logical,
    encode,
    make_chain_cluster,
    project_computational,
)
from lofusion.fock import (
    PhotonicState,
    apply_mode_unitary,
    apply_mode_unitary_poly,
    compositions,
    permanent,
    permanent_naive,
)
from lofusion.fusion import beamsplitter_budget, fuse_bell, grow_chain, pbs_step, spared_photons
from lofusion.gates import build_canonical_cz, build_cz1, build_stretch, evaluate_hybrid
from lofusion.optimizer import OptimizerConfig, UnitaryParams, check_result, gradient_check, optimize

from conftest import haar

RESTARTS = 50
SEED = 0


def record(log, n, ok, detail):
    log.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def test_criterion_1_cz1_exactness(specs, acceptance_log):
    grid = np.linspace(-np.pi, np.pi, 5)
    worst_f = worst_s = 0.0
    for x1, x2 in itertools.product(grid, grid):
        ev = evaluate_hybrid(build_cz1(x1, x2), specs["cz1_spec"])
        worst_f = max(worst_f, abs(ev.fidelity - 1))
        worst_s = max(worst_s, abs(ev.success - 0.5) if ev.success is not None else 1.0)
    ok = worst_f <= 1e-9 and worst_s <= 1e-9
    assert record(acceptance_log, 1, ok, f"25 grid points, max |f-1|={worst_f:.1e}, max |s-1/2|={worst_s:.1e}")


def test_criterion_2_canonical_cz(specs, acceptance_log):
    ev = evaluate_hybrid(build_canonical_cz(), specs["cz_operator_spec"])
    ok = abs(ev.fidelity - 1) <= 1e-9 and ev.success is not None and abs(ev.success - 1 / 9) <= 1e-9
    assert record(acceptance_log, 2, ok, f"f={ev.fidelity:.12f}, s={ev.success:.12f} (1/9={1/9:.12f})")


def test_criterion_3_bell_fusion(acceptance_log):
    worst_p = worst_psi = 0.0
    for n in (1, 2, 3, 4):
        cluster = make_chain_cluster(n)
        out = fuse_bell(cluster)
        worst_p = max(worst_p, abs(out.step_success - 0.25))
        mid, _ = pbs_step(cluster)
        if n == 1:
            a = LogicalState.product(H, PLUS, PLUS).amplitudes
            b = LogicalState.product(V, MINUS, MINUS).amplitudes
        else:
            c = make_chain_cluster(n - 1)
            a = c.tensor(LogicalState.product(H, PLUS, PLUS)).amplitudes
            b = apply_logical("Z", [n - 2], c).tensor(LogicalState.product(V, MINUS, MINUS)).amplitudes
        ref = (a + b) / np.sqrt(2)
        ov = np.vdot(mid.amplitudes, ref)
        worst_psi = max(worst_psi, float(np.max(np.abs(mid.amplitudes * ov / abs(ov) - ref))))
    ok = worst_p <= 1e-9 and worst_psi <= 1e-9
    assert record(acceptance_log, 3, ok, f"n=1..4, max |p-1/4|={worst_p:.1e}, max |Psi_in dev|={worst_psi:.1e}")


def test_criterion_4_scaling_laws(acceptance_log):
    worst = 0.0
    stab = True
    for n in range(2, 8):
        out = grow_chain(n, "single")
        worst = max(worst, abs(out.cumulative_success - 0.5 ** (n - 1)))
        stab &= out.is_chain_cluster()
    for m in (2, 3):
        out = grow_chain(2 * m, "bell")
        worst = max(worst, abs(out.cumulative_success - 0.25 ** (m - 1)))
        stab &= out.is_chain_cluster()
    ok = worst <= 1e-9 and stab
    assert record(acceptance_log, 4, ok, f"single n=2..7, bell m=2,3: max dev={worst:.1e}, stabilizers={stab}")


OPT_TARGETS = [
    # spec, threshold, known maximum
    ("cz1_spec", 0.499, 0.5),
    ("c3_fusion_spec", 0.247, 0.25),
    ("c4_fusion_spec", 0.150, 0.153),
    ("cz_operator_spec", 0.110, 1 / 9),
]


def test_criterion_5_optimizer_recovery(specs, acceptance_log):
    parts = []
    ok = True
    for name, threshold, known in OPT_TARGETS:
        t0 = time.time()
        cfg = OptimizerConfig(restarts=RESTARTS, seed=SEED, tolerance=1e-6, target=threshold)
        res = optimize(specs[name], cfg)
        reached = res.feasible and res.fidelity >= 1 - 1e-6 and res.success >= threshold
        over = max((t.success for t in res.traces if t.feasible), default=0.0) - known
        honest = check_result(res, specs[name], 1e-6) if res.feasible else False
        ok &= reached and over <= 1e-3 and honest
        parts.append(
            f"{name}: s={res.success:.4f} (>= {threshold}) 1-f={1 - res.fidelity:.1e} "
            f"runs={len(res.traces)}/{RESTARTS} {time.time() - t0:.0f}s"
        )
    assert record(acceptance_log, 5, ok, "; ".join(parts))


def test_criterion_6_grafting_experimental(specs, acceptance_log):
    spec = specs["graft_spec"]
    res = optimize(spec, OptimizerConfig(restarts=RESTARTS, seed=SEED, target=0.040))
    reached = res.feasible and res.success >= 0.040
    if res.feasible:
        assert check_result(res, spec, 1e-6)
    # datum for the ledger: the same search with two vacuum ancilla modes
    anc = optimize(spec, OptimizerConfig(restarts=RESTARTS, seed=SEED, target=0.040, ancilla_modes=2))
    if anc.feasible:
        assert check_result(anc, spec, 1e-6)
    detail = (
        f"6 modes: best 1-f={1 - res.fidelity:.3e}, s={res.success:.4f}, feasible={res.feasible}; "
        f"8 modes (2 vacuum ancillas): s={anc.success:.4f}, feasible={anc.feasible}"
    )
    # non-blocking by definition of the criterion: record the outcome, do not fail the build
    if reached:
        record(acceptance_log, 6, True, detail)
    else:
        acceptance_log.append(f"criterion 6: NOT REACHED (experimental, logged)  {detail}")


def test_criterion_7_oracle_equivalence(acceptance_log):
    rng = np.random.default_rng(77)
    worst_perm = worst_evo = 0.0
    for i in range(100):
        k = int(rng.integers(0, 5))
        a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        worst_perm = max(worst_perm, abs(permanent(a) - permanent_naive(a)))
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, 5))
        occs = list(compositions(n, m))
        pick = rng.choice(len(occs), size=min(3, len(occs)), replace=False)
        state = PhotonicState.from_amplitudes(
            m, {occs[j]: complex(*rng.standard_normal(2)) for j in pick}
        )
        u = haar(m, rng)
        x = apply_mode_unitary(u, state)
        y = apply_mode_unitary_poly(u, state)
        keys = set(x.amplitudes) | set(y.amplitudes)
        worst_evo = max(worst_evo, max(abs(x.amplitude(q) - y.amplitude(q)) for q in keys))
    ok = worst_perm <= 1e-9 and worst_evo <= 1e-9
    assert record(acceptance_log, 7, ok, f"100 instances, permanent dev={worst_perm:.1e}, evolution dev={worst_evo:.1e}")


def test_criterion_8_resource_formulas(acceptance_log):
    spared = spared_photons(10, 0.5)
    budgets = all(
        beamsplitter_budget(n, "sequential") == n - 1 and beamsplitter_budget(n, "global") == n * (2 * n - 1)
        for n in range(1, 11)
    )
    ok = spared == 3584 and budgets
    assert record(acceptance_log, 8, ok, f"spared_photons(10, 1/2)={spared!r}, budgets n=1..10 ok={budgets}")


def test_criterion_9_property_suites(specs, acceptance_log):
    rng = np.random.default_rng(99)
    worst_budget = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        lay = QubitLayout.standard(n)
        v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        psi = LogicalState(v / np.linalg.norm(v))
        out, res = project_computational(apply_mode_unitary(haar(2 * n, rng), encode(psi, lay)), lay)
        worst_budget = max(worst_budget, abs(out.norm2 + res - 1))

    evals = [
        evaluate_hybrid(build_cz1(0.7, -0.4), specs["cz1_spec"]),
        evaluate_hybrid(build_stretch(), specs["stretch_spec"]),
        evaluate_hybrid(build_canonical_cz(), specs["cz_operator_spec"]),
        evaluate_hybrid(build_canonical_cz(), specs["cz1_spec"]),
    ]
    worst_alpha = 0.0
    for ev in evals:
        assert ev.success is not None
        a = ev.branch_alphas
        worst_alpha = max(worst_alpha, float(np.max(np.abs(a - a[0]))))

    worst_grad = 0.0
    for name, m in (("cz1_spec", 4), ("stretch_spec", 4), ("cz2_spec", 6), ("cz_operator_spec", 6)):
        p = UnitaryParams.from_vector(m, rng.uniform(0, 2 * np.pi, UnitaryParams.size(m)))
        worst_grad = max(worst_grad, gradient_check(p, specs[name], weight=1.0))
    ok = worst_budget <= 1e-10 and worst_alpha <= 1e-9 and worst_grad < 1e-5
    assert record(
        acceptance_log, 9, ok,
        f"budget dev={worst_budget:.1e}, alpha spread={worst_alpha:.1e}, gradient check={worst_grad:.1e}",
    )
