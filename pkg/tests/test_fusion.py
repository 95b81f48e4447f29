import numpy as np
import pytest

from lofusion.dualrail import MINUS, PLUS, H, V, LogicalState, apply_logical, make_chain_cluster, stabilizer_check
from lofusion.fusion import (
    beamsplitter_budget,
    expected_chain_success,
    fuse_bell,
    fuse_single,
    grow_chain,
    pbs_step,
    spared_photons,
)

S = 1 / np.sqrt(2)


def psi_in(n):
    """(|C_{n-1}>|H>|++> + |~C_{n-1}>|V>|-->)/sqrt(2) for an n-qubit input cluster."""
    if n == 1:
        a = LogicalState.product(H, PLUS, PLUS).amplitudes
        b = LogicalState.product(V, MINUS, MINUS).amplitudes
    else:
        c = make_chain_cluster(n - 1)
        ct = apply_logical("Z", [n - 2], c)
        a = c.tensor(LogicalState.product(H, PLUS, PLUS)).amplitudes
        b = ct.tensor(LogicalState.product(V, MINUS, MINUS)).amplitudes
    return LogicalState((a + b) * S)


def test_fuse_single_examples():
    out = fuse_single(make_chain_cluster(1))
    assert out.step_success == pytest.approx(0.5, abs=1e-10)
    assert out.state.equal_up_to_phase(make_chain_cluster(2))
    out = fuse_single(make_chain_cluster(3))
    assert out.step_success == pytest.approx(0.5, abs=1e-10)
    assert stabilizer_check(out.state, 4)
    assert grow_chain(3).cumulative_success == pytest.approx(0.25, abs=1e-12)


def test_fuse_single_step_independent_of_cluster_content():
    rng = np.random.default_rng(5)
    for n in (1, 2, 3):
        v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        out = fuse_single(LogicalState(v / np.linalg.norm(v)))
        assert out.step_success == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pbs_intermediate_is_psi_in(n):
    mid, (name, modes, p) = pbs_step(make_chain_cluster(n))
    assert p == pytest.approx(0.5, abs=1e-12)
    assert mid.equal_up_to_phase(psi_in(n), atol=1e-12)


def test_fuse_bell_examples():
    out = fuse_bell(make_chain_cluster(2))
    assert out.step_success == pytest.approx(0.25, abs=1e-10)
    assert out.state.equal_up_to_phase(make_chain_cluster(4))
    assert stabilizer_check(out.state, 4)
    assert [s[0] for s in out.steps] == ["pbs", "stretch"]


@pytest.mark.parametrize("n", range(1, 8))
def test_single_chain_scaling(n):
    out = grow_chain(n, "single")
    assert abs(out.cumulative_success - 0.5 ** (n - 1)) < 1e-9
    assert out.is_chain_cluster() and out.state.num_qubits == n
    assert out.cumulative_success == pytest.approx(np.prod([s[2] for s in out.steps]) if out.steps else 1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_bell_route_matches_single_route(n):
    a = grow_chain(n, "bell")
    b = grow_chain(n, "single")
    assert a.state.equal_up_to_phase(b.state, atol=1e-10)
    # the bell route starts from a free C_2, which costs 1/2 on the single route
    assert a.cumulative_success / b.cumulative_success == pytest.approx(2, abs=1e-10)
    assert a.cumulative_success == pytest.approx(expected_chain_success(n, "bell"), abs=1e-12)


def test_grow_chain_examples_and_errors():
    assert grow_chain(4).cumulative_success == pytest.approx(1 / 8)
    assert grow_chain(6, "bell").cumulative_success == pytest.approx(1 / 16)
    one = grow_chain(1)
    assert one.cumulative_success == 1 and one.state.equal_up_to_phase(LogicalState.product(PLUS))
    for args in [(0, "single"), (3, "bell"), (4, "tree")]:
        with pytest.raises(ValueError):
            grow_chain(*args)


def test_spared_photons():
    assert spared_photons(10, 0.5) == 3584
    assert spared_photons(3, 0.5) == 0
    s = 0.3
    assert spared_photons((2 - s) / (1 - s), s) == pytest.approx(0, abs=1e-12)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            spared_photons(5, bad)


def test_beamsplitter_budget():
    assert beamsplitter_budget(5) == 4
    assert beamsplitter_budget(5, "global") == 45
    assert (beamsplitter_budget(1), beamsplitter_budget(1, "global")) == (0, 1)
    with pytest.raises(ValueError):
        beamsplitter_budget(0)
    with pytest.raises(ValueError):
        beamsplitter_budget(3, "ring")
