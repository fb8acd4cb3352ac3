import json
import math

import numpy as np
import pytest

from quasiortho import (
    BranchSet,
    MeasurementModel,
    ReducedDensityMatrix,
    ResourceLimitError,
    RngStream,
    basis_state,
    generate_branches,
    gram_matrix,
    greedy_construct,
    integrable_overlap_exact,
    ks_test,
    max_coherence,
    overlap_sq,
    reduced_density,
    suppression_experiment,
    typicality_ratio,
)
from quasiortho.decoherence import ATYPICAL_RATIO
from quasiortho.overlap import EmpiricalSample

COS20_01 = 0.904686221058675  # cos^20(0.1), extended-precision oracle

UNIFORM2 = np.array([1.0, 1.0]) / math.sqrt(2)


def exact_haar_model(n, k=2, coeffs=None):
    if coeffs is None:
        coeffs = np.full(k, 1.0 / math.sqrt(k))
    return MeasurementModel(pointer_count=k, coefficients=coeffs,
                            env_qubits=n, dynamics="exact-haar")


def integrable_model(n, thetas, coeffs=None):
    k = len(thetas)
    if coeffs is None:
        coeffs = np.full(k, 1.0 / math.sqrt(k))
    return MeasurementModel(pointer_count=k, coefficients=coeffs,
                            env_qubits=n, dynamics="integrable-product",
                            thetas=tuple(thetas))


def dense_partial_trace(coeffs, branch_matrix):
    """Oracle: build the full entangled ket and trace out the environment.

    Psi = sum_i c_i |s_i> (x) |E_i> laid out as a (k, d_env) table via
    explicit Kronecker products; rho_S[i, j] = sum_e Psi[i,e] Psi*[j,e].
    """
    k = len(coeffs)
    d_env = branch_matrix.shape[1]
    full = np.zeros(k * d_env, dtype=complex)
    for i in range(k):
        sys_basis = np.zeros(k, dtype=complex)
        sys_basis[i] = 1.0
        full += coeffs[i] * np.kron(sys_basis, branch_matrix[i])
    table = full.reshape(k, d_env)
    return np.einsum("ie,je->ij", table, table.conj())


class TestMeasurementModel:
    def test_pointer_count_floor(self):
        with pytest.raises(ValueError):
            MeasurementModel(pointer_count=1, coefficients=np.array([1.0]),
                             env_qubits=2, dynamics="exact-haar")

    def test_coefficient_normalization(self):
        with pytest.raises(ValueError):
            MeasurementModel(pointer_count=2,
                             coefficients=np.array([1.0, 1.0]),
                             env_qubits=2, dynamics="exact-haar")

    def test_unknown_dynamics(self):
        with pytest.raises(ValueError):
            MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=2, dynamics="ballistic")

    def test_thetas_must_match_pointer_count(self):
        with pytest.raises(ValueError):
            integrable_model(2, thetas=[0.0, 0.1, 0.2], coeffs=UNIFORM2)

    def test_depth_only_for_chaotic(self):
        with pytest.raises(ValueError):
            MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=2, dynamics="exact-haar", depth=3)

    def test_chaotic_depth_default(self):
        m = MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=3, dynamics="chaotic-circuit")
        assert m.depth == 12

    def test_env_initial_dimension_checked(self):
        with pytest.raises(ValueError):
            MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=3, dynamics="exact-haar",
                             env_initial=basis_state(4))

    def test_resource_cap(self):
        with pytest.raises(ResourceLimitError):
            MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=20, dynamics="exact-haar")

    def test_config_round_trip(self):
        m = integrable_model(4, thetas=[0.0, 0.2, -0.3],
                             coeffs=np.array([0.5, 0.5, 1j / math.sqrt(2)]))
        again = MeasurementModel.from_config(m.to_config())
        assert again.pointer_count == m.pointer_count
        assert np.allclose(again.coefficients, m.coefficients)
        assert again.dynamics == m.dynamics
        assert again.thetas == m.thetas

    def test_config_from_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({
            "pointer_count": 2,
            "coefficients": [[0.6, 0.0], [0.0, 0.8]],
            "env_qubits": 3,
            "dynamics": "chaotic-circuit",
            "depth": 5,
        }))
        m = MeasurementModel.from_config(path)
        assert m.depth == 5
        assert np.allclose(m.coefficients, [0.6, 0.8j])


class TestGenerateBranches:
    def test_equal_angles_give_identical_branches(self):
        m = integrable_model(5, thetas=[0.7, 0.7])
        bs = generate_branches(m, RngStream(0))
        assert abs(overlap_sq(bs.branches[0], bs.branches[1]) - 1.0) < 1e-12

    def test_integrable_matches_closed_form(self):
        m = integrable_model(10, thetas=[0.0, 0.2])
        bs = generate_branches(m, RngStream(0))
        got = overlap_sq(bs.branches[0], bs.branches[1])
        assert abs(got - integrable_overlap_exact(10, 0.2)) < 1e-10
        assert abs(got - COS20_01) < 1e-10

    def test_exact_haar_mean_overlap(self):
        # mean pairwise squared overlap matches 1/2^n at 5 standard errors
        n, trials = 10, 200
        m = exact_haar_model(n)
        rng = RngStream(33)
        vals = np.array([
            overlap_sq(*generate_branches(m, rng.substream(t)).branches)
            for t in range(trials)
        ])
        se = vals.std(ddof=1) / math.sqrt(trials)
        assert abs(vals.mean() - 2.0 ** -n) < 5 * se

    def test_branches_normalized_all_dynamics(self):
        models = [
            exact_haar_model(4),
            integrable_model(4, thetas=[0.1, 0.9]),
            MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=4, dynamics="chaotic-circuit", depth=6),
        ]
        for m in models:
            for b in generate_branches(m, RngStream(1)).branches:
                assert abs(np.linalg.norm(b.amplitudes) - 1.0) < 1e-9

    def test_determinism_bit_identical(self):
        for dynamics_model in (
            exact_haar_model(6),
            MeasurementModel(pointer_count=3,
                             coefficients=np.full(3, 1 / math.sqrt(3)),
                             env_qubits=4, dynamics="chaotic-circuit"),
        ):
            a = generate_branches(dynamics_model, RngStream(17, 2))
            b = generate_branches(dynamics_model, RngStream(17, 2))
            for x, y in zip(a.branches, b.branches):
                assert x.amplitudes.tobytes() == y.amplitudes.tobytes()

    def test_chaotic_pointers_decorrelate(self):
        m = MeasurementModel(pointer_count=2, coefficients=UNIFORM2,
                             env_qubits=4, dynamics="chaotic-circuit")
        rng = RngStream(3)
        vals = [overlap_sq(*generate_branches(m, rng.substream(t)).branches)
                for t in range(100)]
        ratio = np.mean(vals) * 16
        assert 0.5 < ratio < 2.0  # near-typical at depth 4n

    def test_haar_branch_overlaps_follow_beta_law(self):
        # pooled pair overlaps at n=8 against Beta(1, 255), KS alpha=0.01
        n, trials = 8, 10_000
        m = exact_haar_model(n)
        rng = RngStream(41)
        vals = np.array([
            overlap_sq(*generate_branches(m, rng.substream(t)).branches)
            for t in range(trials)
        ])
        sample = EmpiricalSample(dim=2 ** n, values=np.sort(vals),
                                 seed_record=(41, 0))
        assert ks_test(sample, alpha=0.01).passed

    def test_generation_record(self):
        bs = generate_branches(exact_haar_model(3), RngStream(9, 4))
        rec = bs.generation_record
        assert rec["dynamics"] == "exact-haar"
        assert rec["seed"] == 9
        assert rec["stream_index"] == 4


class TestGramAndDensity:
    def test_identical_branches_all_ones(self):
        m = integrable_model(3, thetas=[0.4, 0.4])
        g = gram_matrix(generate_branches(m, RngStream(0)))
        assert np.allclose(g, np.ones((2, 2)), atol=1e-12)

    def test_orthogonal_branches_identity(self):
        bs = BranchSet(branches=(basis_state(4, 0), basis_state(4, 1)),
                       generation_record={})
        assert np.allclose(gram_matrix(bs), np.eye(2))

    def test_unit_diagonal(self):
        bs = generate_branches(exact_haar_model(5, k=3,
                                                coeffs=np.full(3, 1 / math.sqrt(3))),
                               RngStream(2))
        g = gram_matrix(bs)
        assert np.allclose(np.diag(g), 1.0, atol=1e-10)
        assert np.allclose(g, g.conj().T, atol=1e-12)

    def test_orthogonal_branches_give_diagonal_rho(self):
        coeffs = np.array([0.6, 0.8j])
        m = MeasurementModel(pointer_count=2, coefficients=coeffs,
                             env_qubits=2, dynamics="exact-haar")
        bs = BranchSet(branches=(basis_state(4, 0), basis_state(4, 1)),
                       generation_record={})
        rho = reduced_density(m, bs)
        assert np.allclose(rho.matrix, np.diag([0.36, 0.64]), atol=1e-12)

    def test_identical_branches_give_pure_state(self):
        coeffs = np.array([0.6, 0.8])
        m = MeasurementModel(pointer_count=2, coefficients=coeffs,
                             env_qubits=3, dynamics="integrable-product",
                             thetas=(0.3, 0.3))
        bs = generate_branches(m, RngStream(0))
        rho = reduced_density(m, bs)
        assert np.allclose(rho.matrix, np.outer(coeffs, coeffs.conj()),
                           atol=1e-12)

    def test_two_level_coherence_is_half_gram_entry(self):
        m = exact_haar_model(6)
        bs = generate_branches(m, RngStream(5))
        g = gram_matrix(bs)[1, 0]
        rho = reduced_density(m, bs)
        assert abs(abs(rho.matrix[0, 1]) - abs(g) / 2) < 1e-12

    def test_rho_invariants(self):
        for seed in range(5):
            m = exact_haar_model(5, k=3, coeffs=np.array([0.5, 0.5, 1 / math.sqrt(2)]))
            rho = reduced_density(m, generate_branches(m, RngStream(seed)))
            mat = rho.matrix
            assert np.max(np.abs(mat - mat.conj().T)) < 1e-10
            assert abs(np.trace(mat).real - 1.0) < 1e-10
            assert np.min(np.linalg.eigvalsh(mat)) > -1e-9

    def test_partial_trace_oracle(self):
        # 50 fixed random instances, n <= 6, k <= 3, tolerance 1e-10
        master = RngStream(2026)
        gen = master.generator
        for case in range(50):
            n = int(gen.integers(1, 7))
            k = int(gen.integers(2, 4))
            raw = gen.standard_normal(k) + 1j * gen.standard_normal(k)
            coeffs = raw / np.linalg.norm(raw)
            m = MeasurementModel(pointer_count=k, coefficients=coeffs,
                                 env_qubits=n, dynamics="exact-haar")
            bs = generate_branches(m, master.substream(case))
            rho = reduced_density(m, bs)
            oracle = dense_partial_trace(coeffs, bs.matrix())
            assert np.max(np.abs(rho.matrix - oracle)) < 1e-10

    def test_density_validation(self):
        with pytest.raises(ValueError):
            ReducedDensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]))  # not Hermitian
        with pytest.raises(ValueError):
            ReducedDensityMatrix(np.eye(2))  # trace 2
        bad = np.array([[1.5, 0.0], [0.0, -0.5]])
        with pytest.raises(ValueError):
            ReducedDensityMatrix(bad)  # negative eigenvalue

    def test_branch_count_mismatch(self):
        m = exact_haar_model(3, k=3, coeffs=np.full(3, 1 / math.sqrt(3)))
        bs = generate_branches(exact_haar_model(3), RngStream(0))
        with pytest.raises(ValueError):
            reduced_density(m, bs)


class TestCoherenceAndTypicality:
    def test_diagonal_rho_has_zero_coherence(self):
        rho = ReducedDensityMatrix(np.diag([0.25, 0.75]))
        assert max_coherence(rho) == 0.0

    def test_equal_superposition_full_overlap(self):
        m = integrable_model(4, thetas=[0.2, 0.2])
        rho = reduced_density(m, generate_branches(m, RngStream(0)))
        assert abs(max_coherence(rho) - 0.5) < 1e-12

    def test_quasi_orthogonal_branches_bound_coherence(self):
        # coherences of eps-certified records obey |rho_ij| <=
        # max|c_i c_j| sqrt(eps)
        d, eps, k = 256, 0.05, 3
        fam = greedy_construct(d, eps, k, 1000, RngStream(19))
        coeffs = np.array([0.5, 0.5, 1 / math.sqrt(2)])
        m = MeasurementModel(pointer_count=k, coefficients=coeffs,
                             env_qubits=8, dynamics="exact-haar")
        bs = BranchSet(branches=tuple(fam.vectors), generation_record={})
        rho = reduced_density(m, bs)
        c_max = max(abs(coeffs[i] * coeffs[j])
                    for i in range(k) for j in range(k) if i != j)
        assert max_coherence(rho) <= c_max * math.sqrt(eps) + 1e-12

    def test_orthogonal_branches_zero_ratio(self):
        bs = BranchSet(branches=(basis_state(8, 0), basis_state(8, 1)),
                       generation_record={})
        assert typicality_ratio(bs, 8) == 0.0

    def test_exact_haar_ratio_near_one(self):
        n, trials = 10, 200
        m = exact_haar_model(n)
        result = suppression_experiment(m, trials, RngStream(51))
        assert 0.8 <= result.typicality <= 1.25
        assert not result.atypical

    def test_integrable_ratio_flags_atypical(self):
        m = integrable_model(10, thetas=[0.0, 0.2])
        bs = generate_branches(m, RngStream(0))
        ratio = typicality_ratio(bs, 2 ** 10)
        assert abs(ratio - 1024 * COS20_01) < 1e-6
        assert ratio > ATYPICAL_RATIO


class TestSuppressionExperiment:
    def test_overlap_halves_per_qubit(self):
        # 2^-n scaling: per-qubit factor within 20 percent of 2
        means = {}
        for n in (4, 8, 10):
            result = suppression_experiment(exact_haar_model(n), 200,
                                            RngStream(61))
            means[n] = result.mean_overlap_sq
        for a, b in [(4, 8), (8, 10)]:
            factor = (means[a] / means[b]) ** (1.0 / (b - a))
            assert 1.6 <= factor <= 2.4

    def test_mean_coherence_matches_beta_amplitude(self):
        # E max_coherence = E|g|/2 for k=2 equal amplitudes, with E|g|
        # from a Monte Carlo oracle on the Beta(1, 2^n - 1) law of |g|^2
        n, trials = 10, 400
        d = 2 ** n
        u = np.random.default_rng(7).uniform(size=1_000_000)
        e_amp = np.mean(np.sqrt(1.0 - u ** (1.0 / (d - 1))))
        result = suppression_experiment(exact_haar_model(n), trials,
                                        RngStream(71))
        assert abs(result.mean_max_coherence - e_amp / 2) / (e_amp / 2) < 0.10

    def test_integrable_control_reports_failure(self):
        m = integrable_model(10, thetas=[0.0, 0.2])
        result = suppression_experiment(m, 30, RngStream(0))
        assert result.atypical
        assert result.mean_overlap_sq > 100 * result.overlap_sq_scale

    def test_predicted_scales(self):
        result = suppression_experiment(exact_haar_model(4), 30, RngStream(1))
        assert result.d_eff == 16
        assert result.overlap_sq_scale == 1 / 16
        assert result.amplitude_scale == 0.25

    def test_trials_floor(self):
        with pytest.raises(ValueError):
            suppression_experiment(exact_haar_model(3), 10, RngStream(0))

    def test_order_independence_of_trials(self):
        # per-trial substreams make results independent of scheduling
        m = exact_haar_model(4)
        rng = RngStream(81)
        forward = [generate_branches(m, rng.substream(t)).branches[0].amplitudes
                   for t in range(5)]
        rng2 = RngStream(81)
        backward = [generate_branches(m, rng2.substream(t)).branches[0].amplitudes
                    for t in reversed(range(5))]
        for f, b in zip(forward, reversed(backward)):
            assert f.tobytes() == b.tobytes()

    def test_json_and_csv_serialization(self, tmp_path):
        m = exact_haar_model(3, k=3, coeffs=np.full(3, 1 / math.sqrt(3)))
        result = suppression_experiment(m, 30, RngStream(91))
        jpath = tmp_path / "exp.json"
        obj = result.to_json(jpath)
        loaded = json.loads(jpath.read_text())
        assert loaded["summary"]["trials"] == 30
        assert loaded["summary"]["d_eff"] == 8
        assert len(loaded["pair_overlaps"]) == 30
        assert obj["summary"]["typicality_ratio"] == result.typicality

        cpath = tmp_path / "exp.csv"
        result.to_csv(cpath)
        lines = [ln for ln in cpath.read_text().splitlines()
                 if not ln.startswith("#")]
        assert lines[0] == "trial,pair,squared_overlap,max_coherence"
        assert len(lines) == 1 + 30 * 3  # k=3 -> 3 pairs per trial


def test_integrable_overlap_exact_edges():
    assert integrable_overlap_exact(5, 0.0) == 1.0
    assert abs(integrable_overlap_exact(1, math.pi)) < 1e-30
    assert abs(integrable_overlap_exact(10, 0.2) - COS20_01) < 1e-15
    with pytest.raises(ValueError):
        integrable_overlap_exact(0, 0.1)
