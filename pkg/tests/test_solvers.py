import numpy as np
import pytest

from netenergy import (
    BinaryTreeGen,
    ConvergenceReport,
    GeometricLineGen,
    Network,
    NetworkError,
    SolverError,
    cycle,
    effective_resistance,
    energy_form,
    harmonic_space,
    is_harmonic,
    path,
    random_network,
    royden_project,
    solve_dipole,
    solve_dipoles,
    solve_grounded,
    solve_monopole,
    to_energy_vector,
    transience_probe,
    truncate,
)


def test_dipole_hand_values(p3):
    v_a = solve_dipole(p3, "a")
    np.testing.assert_allclose(v_a.values, [0.0, 1.0, 1.0], atol=1e-12)
    assert v_a.energy == pytest.approx(1.0)
    v_b = solve_dipole(p3, "b")
    np.testing.assert_allclose(v_b.values, [0.0, 1.0, 1.5], atol=1e-12)
    assert v_b.energy == pytest.approx(1.5)
    # the origin maps to the zero class
    assert solve_dipole(p3, "o").energy == 0.0


def test_dipole_reproduces_point_evaluations(rng):
    net = random_network(24, seed=rng)
    kernels = solve_dipoles(net, net.labels)
    for _ in range(5):
        u = rng.standard_normal(net.n)
        for x, v in zip(net.labels, kernels):
            lhs = energy_form(net, v.values, u)
            rhs = u[net.index(x)] - u[net.origin_index]
            assert lhs == pytest.approx(rhs, abs=1e-9)


def test_effective_resistance_series_parallel(p3):
    assert effective_resistance(p3, "o", "b") == pytest.approx(1.5)
    assert effective_resistance(p3, "o", "a") == pytest.approx(1.0)
    assert effective_resistance(p3, "a", "b") == pytest.approx(0.5)
    assert effective_resistance(path(4), 0, 3) == pytest.approx(3.0)
    # two arms of resistance 2 in parallel
    assert effective_resistance(cycle(4), 0, 2) == pytest.approx(1.0)
    assert effective_resistance(p3, "a", "a") == 0.0


def test_solve_grounded_shapes(p3):
    rhs = np.array([1.0, -1.0, 0.0])
    u = solve_grounded(p3, rhs)
    np.testing.assert_allclose(p3.laplacian(u), rhs, atol=1e-12)
    cols = solve_grounded(p3, np.column_stack([rhs, -rhs]))
    assert cols.shape == (3, 2)
    np.testing.assert_allclose(cols[:, 0], u)
    np.testing.assert_allclose(solve_grounded(p3, {"o": 1.0, "a": -1.0, "b": 0.0}), u)


def test_solve_grounded_needs_compatible_rhs(p3):
    with pytest.raises(SolverError, match="sum to zero"):
        solve_grounded(p3, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(NetworkError, match="shape"):
        solve_grounded(p3, np.zeros((5, 2)))


def test_solve_grounded_pins_ground():
    net = truncate(BinaryTreeGen(), 2)
    u = solve_grounded(net, net.delta("r"))  # rhs need not balance: ground absorbs it
    assert u[net.ground_index] == 0.0
    np.testing.assert_allclose(net.laplacian(u)[net.interior_indices()],
                               net.delta("r")[net.interior_indices()], atol=1e-12)


def test_wired_tree_resistance_oracle():
    # series/parallel reduction from the deepest level upward
    def oracle(k):
        r = 0.5
        for _ in range(k - 1):
            r = (1.0 + r) / 2.0
        return (1.0 + r) / 2.0

    for k in (1, 2, 3, 6):
        net = truncate(BinaryTreeGen(), k)
        assert effective_resistance(net, "r", "ground") == pytest.approx(
            oracle(k), abs=1e-12
        )


def test_monopole_on_summable_line():
    w, report = solve_monopole(GeometricLineGen(ratio=2.0), 0, tol=1e-9, k_max=40)
    assert report.converged
    # total resistance to infinity is the geometric series sum 2
    assert report.extrapolated_limit == pytest.approx(2.0, abs=1e-6)
    assert w.energy == pytest.approx(2.0, abs=1e-6)
    ks = report.ks
    assert (np.diff(ks) > 0).all()
    # in the grounded gauge the potential at the source is the energy
    for _, value, energy in report.levels:
        assert value == pytest.approx(energy, rel=1e-12)


def test_monopole_vertex_must_be_inside():
    with pytest.raises(NetworkError, match="first level"):
        solve_monopole(GeometricLineGen(ratio=2.0), 99, tol=1e-6, k_max=5)


def test_transience_verdicts():
    verdict, report = transience_probe(BinaryTreeGen(), tol=1e-4, k_max=20)
    assert verdict == "transient"
    assert report.extrapolated_limit == pytest.approx(1.0, abs=1e-3)
    verdict, _ = transience_probe(
        GeometricLineGen(ratio=1.0), tol=1e-9, k_max=61, stride=10,
        recurrence_ratio=50.0,
    )
    assert verdict == "recurrent"
    verdict, _ = transience_probe(BinaryTreeGen(), tol=1e-9, k_max=3)
    assert verdict == "inconclusive"


def test_convergence_report_contract(tmp_path):
    report = ConvergenceReport(
        levels=((1, 0.5, 0.5), (2, 0.75, 0.75)),
        extrapolated_limit=1.0,
        converged=False,
        tol=1e-6,
    )
    assert report.summary()["extrapolated_limit"] == 1.0
    out = tmp_path / "report.csv"
    report.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "level,value,energy"
    assert len(lines) == 3
    with pytest.raises(ValueError, match="increasing"):
        ConvergenceReport(
            levels=((2, 0.5, 0.5), (1, 0.7, 0.7)),
            extrapolated_limit=1.0,
            converged=True,
            tol=1e-6,
        )


def test_harmonic_space_dimension(p3):
    basis = harmonic_space(p3, ["o", "b"])
    assert len(basis) == 1
    # voltage divider: two thirds of the drop happens over the weaker edge
    np.testing.assert_allclose(basis[0], [0.0, 2.0 / 3.0, 1.0], atol=1e-12)
    assert is_harmonic(p3, basis[0], boundary=["o", "b"])
    assert harmonic_space(p3, ["o"]) == []


def test_royden_split_on_truncation(rng):
    net = truncate(BinaryTreeGen(), 3)
    boundary = [lbl for lbl in net.labels if lbl != net.ground and len(lbl) == 4]
    boundary.append(net.ground)
    u = to_energy_vector(net, rng.standard_normal(net.n))
    fin, harm = royden_project(net, u, boundary=boundary)
    np.testing.assert_allclose(fin.values + harm.values, u.values, atol=1e-11)
    assert abs(fin.inner(harm)) <= 1e-10 * u.energy
    assert is_harmonic(net, harm.values, boundary=boundary)
    # energies add along an orthogonal split
    assert fin.energy + harm.energy == pytest.approx(u.energy, rel=1e-10)


def test_royden_split_finite_network_is_all_finite(rng):
    net = cycle(7)
    u = to_energy_vector(net, rng.standard_normal(7))
    fin, harm = royden_project(net, u)
    assert harm.energy == 0.0
    np.testing.assert_allclose(fin.values, u.values)
