"""Instance generators, the r-block lifting, partition extraction against
its norm guarantee, graph spectral comparisons, and the random-partition
Monte-Carlo baseline."""

import math

import numpy as np
import pytest

from kspart import (
    Graph,
    ValidationError,
    WeaverInstance,
    gen_diagonal,
    gen_from_graph,
    gen_gaussian,
    improved_bound_r2,
    lift,
    measured_delta,
    normalize_isotropy,
    partition,
    random_partition_experiment,
    spectral_approx_check,
    validate,
)
from kspart.weaver import laplacian


K4_EDGES = tuple((a, b, 1.0) for a in range(4) for b in range(a + 1, 4))


def test_gen_diagonal_shapes_and_values():
    one = gen_diagonal(1, 1.0)
    assert one.count == 1 and np.allclose(one.vectors, [[1.0]])

    inst = gen_diagonal(2, 0.5)
    assert inst.count == 4
    assert np.allclose(inst.norms_squared(), 0.5)
    assert np.allclose(inst.frame_matrix(), np.eye(2), atol=1e-12)

    assert gen_diagonal(3, 1.0 / 3.0).count == 9
    with pytest.raises(ValidationError):
        gen_diagonal(2, 0.3)  # 1/delta not an integer


def test_validate_reports():
    basis = WeaverInstance(2, np.eye(2), 1.0)
    assert validate(basis).valid

    rep = validate(gen_diagonal(2, 0.5))
    assert rep.valid and abs(rep.max_norm_sq - 0.5) < 1e-12

    scaled = WeaverInstance(2, 1.1 * gen_diagonal(2, 0.5).vectors, 1.0)
    rep = validate(scaled)
    assert not rep.valid
    assert abs(rep.isotropy_deviation - 0.21) < 1e-9


def test_measured_delta_and_repair():
    inst = gen_diagonal(2, 0.5)
    assert abs(measured_delta(inst) - 0.5) < 1e-12

    drifted = WeaverInstance(2, (1.0 + 2e-5) * inst.vectors, 1.0)
    fixed = normalize_isotropy(drifted)
    assert validate(fixed).isotropy_deviation <= 1e-9

    broken = WeaverInstance(2, 1.1 * inst.vectors, 1.0)
    with pytest.raises(ValidationError):
        normalize_isotropy(broken)


def test_gen_gaussian_isotropic_by_construction():
    inst = gen_gaussian(4, 0.25, seed=0)
    rep = validate(inst)
    assert rep.valid and rep.isotropy_deviation <= 1e-9
    # renormalized norm ceiling stays within the loose constant-factor band
    assert measured_delta(inst) <= 10 * 0.25

    single = gen_gaussian(1, 0.5, seed=3)
    assert abs(np.sum(single.norms_squared()) - 1.0) < 1e-9

    with pytest.raises(ValidationError):
        gen_gaussian(4, 2.0)  # would draw fewer vectors than dimensions


def test_graph_parsing_and_validation():
    g = Graph.from_edge_text("0 1 1.0\n1 2 2.0\n")
    assert g.n == 3 and len(g.edges) == 2
    with pytest.raises(ValidationError):
        Graph(2, ((0, 0, 1.0),))  # self-loop
    with pytest.raises(ValidationError):
        Graph(2, ((0, 1, -1.0),))
    # weight defaults to 1 when omitted
    assert Graph.from_edge_text("0 1\n").edges == ((0, 1, 1.0),)
    with pytest.raises(ValidationError):
        Graph.from_edge_text("0 1 2.0 9\n")
    with pytest.raises(ValidationError):
        Graph.from_edge_text("# only a comment\n")


def test_gen_from_graph_leverages():
    inst, basis = gen_from_graph(Graph(2, ((0, 1, 1.0),)))
    assert inst.dim == 1
    assert np.allclose(np.abs(inst.vectors), [[1.0]], atol=1e-12)

    k3 = Graph(3, tuple((a, b, 1.0) for a in range(3) for b in range(a + 1, 3)))
    inst, _ = gen_from_graph(k3)
    assert inst.dim == 2 and inst.count == 3
    assert np.allclose(inst.norms_squared(), 2.0 / 3.0, atol=1e-12)

    inst, _ = gen_from_graph(Graph(4, K4_EDGES))
    assert inst.dim == 3 and inst.count == 6
    assert np.allclose(inst.norms_squared(), 0.5, atol=1e-12)
    assert validate(inst).valid
    # trace identity: leverage scores sum to n - 1
    assert abs(float(np.sum(inst.norms_squared())) - 3.0) < 1e-8

    with pytest.raises(ValidationError):
        gen_from_graph(Graph(4, ((0, 1, 1.0), (2, 3, 1.0))))  # two components


def test_lift_structure():
    u = np.array([[0.8]])
    inst = WeaverInstance(1, u / np.sqrt(0.64), 1.0)  # single unit vector
    e = lift(inst, 2)
    assert e.dim == 2
    v = e.vectors[0]
    assert np.allclose(v.probabilities, [0.5, 0.5])
    want0 = np.array([np.sqrt(2.0), 0.0])
    want1 = np.array([0.0, np.sqrt(2.0)])
    assert np.allclose(v.values[0], want0, atol=1e-12)
    assert np.allclose(v.values[1], want1, atol=1e-12)


def test_lift_covariances_resolve_identity():
    for r in (2, 3):
        inst = gen_diagonal(2, 0.5)
        e = lift(inst, r)
        total = np.zeros((2 * r, 2 * r), dtype=np.complex128)
        from kspart import covariance
        for v in e.vectors:
            total += covariance(v)
            atom_norms = np.sum(np.abs(v.values) ** 2, axis=1)
            assert np.all(atom_norms <= r * 0.5 + 1e-10)
        assert np.max(np.abs(total - np.eye(2 * r))) <= 1e-9


def test_partition_diagonal_half():
    rep = partition(gen_diagonal(2, 0.5), 2)
    assert rep.within_bound
    assert abs(rep.bound_general - 2.0) < 1e-12
    assert abs(rep.bound_r2_improved - 1.0) < 1e-12
    assert max(rep.part_norms) <= 0.5 + 1e-9
    assert sorted(len(p) for p in rep.parts) == [2, 2]
    assert abs(rep.root_of_empty - (1.0 + 1.0 / math.sqrt(2.0))) < 1e-7
    # parts re-derive their norms
    inst = gen_diagonal(2, 0.5)
    for part, norm in zip(rep.parts, rep.part_norms):
        s = np.zeros((2, 2), dtype=np.complex128)
        for i in part:
            s += np.outer(inst.vectors[i], inst.vectors[i].conj())
        assert abs(float(np.linalg.eigvalsh(s)[-1]) - norm) < 1e-9


def test_partition_diagonal_thirds():
    rep2 = partition(gen_diagonal(3, 1.0 / 3.0), 2)
    assert rep2.within_bound
    # nine vectors across two parts: some direction doubles up
    assert abs(max(rep2.part_norms) - 2.0 / 3.0) < 1e-9

    rep3 = partition(gen_diagonal(3, 1.0 / 3.0), 3)
    assert rep3.within_bound
    assert max(rep3.part_norms) <= 1.0 / 3.0 + 1e-9
    assert sorted(len(p) for p in rep3.parts) == [3, 3, 3]


def test_partition_orthonormal_basis():
    rep = partition(WeaverInstance(2, np.eye(2), 1.0), 2)
    assert rep.within_bound
    assert abs(max(rep.part_norms) - 1.0) < 1e-9
    assert abs(rep.bound_general - (1.0 / math.sqrt(2.0) + 1.0) ** 2) < 1e-12


def test_partition_k4():
    inst, basis = gen_from_graph(Graph(4, K4_EDGES))
    rep = partition(inst, 2)
    assert rep.within_bound
    assert sorted(len(p) for p in rep.parts) == [3, 3]
    assert np.allclose(rep.part_norms, (2.0 + math.sqrt(2.0)) / 4.0, atol=1e-9)


def test_improved_bound_r2_values():
    assert abs(improved_bound_r2(0.5) - 1.0) < 1e-12
    assert abs(improved_bound_r2(0.0) - 0.5) < 1e-12
    assert abs(improved_bound_r2(0.25) - (0.5 + math.sqrt(3.0) / 4.0)) < 1e-12
    with pytest.raises(ValidationError):
        improved_bound_r2(0.6)


def test_spectral_approx_identity_and_scaling():
    g = Graph(4, K4_EDGES)
    k1, k2 = spectral_approx_check(g, g)
    assert abs(k1 - 1.0) < 1e-10 and abs(k2 - 1.0) < 1e-10

    doubled = Graph(4, tuple((a, b, 2.0 * w) for a, b, w in K4_EDGES))
    k1, k2 = spectral_approx_check(g, doubled)
    assert abs(k1 - 0.5) < 1e-10 and abs(k2 - 0.5) < 1e-10


def test_spectral_approx_partition_half():
    g = Graph(4, K4_EDGES)
    inst, basis = gen_from_graph(g)
    rep = partition(inst, 2)
    part = rep.parts[int(np.argmax(rep.part_norms))]
    half = Graph(4, tuple((K4_EDGES[i][0], K4_EDGES[i][1], 2.0)
                          for i in part))
    k1, k2 = spectral_approx_check(g, half)
    assert abs(k1 - (2.0 - math.sqrt(2.0))) < 1e-9
    assert abs(k2 - (2.0 + math.sqrt(2.0))) < 1e-9
    # the worse constant matches r * max part norm
    assert abs(k2 / 2.0 - 2.0 * max(rep.part_norms)) < 1e-9


def test_laplacian_values():
    g = Graph(2, ((0, 1, 3.0),))
    assert np.allclose(laplacian(g), [[3.0, -3.0], [-3.0, 3.0]])


def test_experiment_scalar_inclusion_frequencies():
    inst = gen_diagonal(1, 0.5)
    stats = random_partition_experiment(inst, r=2, trials=2000, seed=5)
    assert stats.analytic_mono_free is not None
    assert abs(stats.analytic_mono_free - 0.75) < 1e-12
    sigma = math.sqrt(0.75 * 0.25 / 2000.0)
    assert abs(stats.mono_free_frequency - 0.75) <= 3.0 * sigma
    assert stats.max_norms.shape == (2000,)


def test_experiment_zero_trials_and_determinism():
    inst = gen_diagonal(2, 0.5)
    empty = random_partition_experiment(inst, trials=0)
    assert empty.trials == 0 and empty.success_frequency is None
    a = random_partition_experiment(inst, trials=64, seed=9, threads=1)
    b = random_partition_experiment(inst, trials=64, seed=9, threads=3)
    assert np.array_equal(a.max_norms, b.max_norms)
    assert np.array_equal(a.mono_free, b.mono_free)


def test_experiment_gaussian_concentrates():
    inst = gen_gaussian(8, 0.25, seed=1)
    stats = random_partition_experiment(inst, trials=100, seed=2)
    assert stats.mono_free is None  # not a diagonal instance
    assert stats.success_frequency >= 0.5
