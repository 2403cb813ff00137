"""Simplex discretization identities, symmetry, refinement behavior, and the
Monte Carlo / quadrature second-moment identities."""

import math

import numpy as np
import pytest

from dsltlab import (
    ContractionMode,
    EstimatorRequest,
    FbmPath,
    GenerationMethod,
    HurstModel,
    MuConvention,
    PrefactorMode,
    Scheme,
    TimeGrid,
    dslt,
    dslt_ensemble,
    first_chaos,
    first_chaos_ensemble,
    first_chaos_variance,
    generate_ensemble,
    generate_path,
    slt,
    slt_ensemble,
    variance_pieces,
)

M3 = HurstModel(H=1 / 3, d=3)


def _zero_path(model, n=32):
    grid = TimeGrid(n=n, t=model.t)
    values = np.zeros((model.d, n + 1))
    return FbmPath(model=model, grid=grid, values=values, seed=0,
                   method=GenerationMethod.CIRCULANT_EMBEDDING)


def _negated(path):
    return FbmPath(model=path.model, grid=path.grid, values=-path.values,
                   seed=path.seed, method=path.method)


class TestExactIdentities:
    def test_zero_path_derivative_vanishes(self):
        p = _zero_path(M3)
        assert dslt(EstimatorRequest(path=p, eps=0.2)).value == 0.0

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_zero_path_local_time_exact(self, scheme):
        # constant integrand: the cell areas must tile the simplex exactly
        model = HurstModel(H=0.4, d=2, t=1.5)
        p = _zero_path(model, n=48)
        for eps in (0.3, 1.1):
            expected = (2 * math.pi * eps) ** (-model.d / 2) * model.t ** 2 / 2
            assert slt(p, eps, scheme=scheme).value == pytest.approx(expected, rel=1e-14)

    def test_path_negation_antisymmetry_exact(self):
        grid = TimeGrid(n=100, t=1.0)
        p = generate_path(M3, grid, seed=5)
        q = _negated(p)
        for scheme in Scheme:
            a = dslt(EstimatorRequest(path=p, eps=0.07, scheme=scheme)).value
            b = dslt(EstimatorRequest(path=q, eps=0.07, scheme=scheme)).value
            assert a == -b

    def test_local_time_negation_invariant_exact(self):
        grid = TimeGrid(n=80, t=1.0)
        p = generate_path(M3, grid, seed=6)
        assert slt(p, 0.15).value == slt(_negated(p), 0.15).value

    def test_first_chaos_linearity(self):
        grid = TimeGrid(n=90, t=1.0)
        p = generate_path(M3, grid, seed=7)
        assert first_chaos(_zero_path(M3), 0.1) == 0.0
        for scheme in Scheme:
            assert first_chaos(p, 0.1, scheme=scheme) == -first_chaos(_negated(p), 0.1, scheme=scheme)
        # doubling the path doubles the projection
        doubled = FbmPath(model=p.model, grid=p.grid, values=2.0 * p.values,
                          seed=p.seed, method=p.method)
        assert first_chaos(doubled, 0.1) == pytest.approx(2 * first_chaos(p, 0.1), rel=1e-14)

    def test_n_pairs_and_metadata(self):
        grid = TimeGrid(n=64, t=1.0)
        p = generate_path(M3, grid, seed=1)
        v = dslt(EstimatorRequest(path=p, eps=0.3))
        assert v.n_pairs == 64 * 65 // 2
        assert v.eps == 0.3 and v.scheme is Scheme.MIDPOINT

    def test_general_offset_and_multi_index(self):
        grid = TimeGrid(n=64, t=1.0)
        p = generate_path(M3, grid, seed=2)
        v0 = dslt(EstimatorRequest(path=p, eps=0.2, y=(0.1, -0.2, 0.0)))
        v1 = dslt(EstimatorRequest(path=p, eps=0.2, y=(0.1, -0.2, 0.0), k=(0, 1, 0)))
        assert np.isfinite(v0.value) and np.isfinite(v1.value) and v0.value != v1.value

    def test_second_order_kernel_even(self):
        # |k| = 2: even kernel, so negation leaves the value unchanged
        grid = TimeGrid(n=64, t=1.0)
        model = HurstModel(H=0.2, d=3, k=(2, 0, 0))
        vals = generate_ensemble(model, grid, seed=3, n_paths=1)
        a = dslt_ensemble(vals, model, grid, [0.1])
        b = dslt_ensemble(-vals, model, grid, [0.1])
        assert a[0, 0] == b[0, 0]

    def test_validation(self):
        grid = TimeGrid(n=16, t=1.0)
        p = generate_path(M3, grid, seed=0)
        with pytest.raises(ValueError):
            EstimatorRequest(path=p, eps=0.0)
        with pytest.raises(ValueError):
            EstimatorRequest(path=p, eps=0.1, y=(1.0,))
        with pytest.raises(ValueError):
            EstimatorRequest(path=p, eps=0.1, k=(1, 0))
        with pytest.raises(ValueError):
            first_chaos_ensemble(p.values[None], HurstModel(H=1 / 3, d=3, k=(2, 0, 0)),
                                 grid, [0.1])


class TestBatchConsistency:
    def test_ensemble_matches_per_path_bitwise(self):
        grid = TimeGrid(n=48, t=1.0)
        vals = generate_ensemble(M3, grid, seed=11, n_paths=5)
        batch = dslt_ensemble(vals, M3, grid, [0.1, 0.05])
        for i in range(5):
            p = generate_path(M3, grid, seed=11, path_index=i)
            for je, eps in enumerate((0.1, 0.05)):
                single = dslt(EstimatorRequest(path=p, eps=eps)).value
                assert batch[je, i] == single

    def test_first_chaos_matches_direct_cell_sum(self):
        # prefix-sum evaluation against a naive double loop over cells
        grid = TimeGrid(n=24, t=1.0)
        vals = generate_ensemble(M3, grid, seed=13, n_paths=2)
        eps = 0.2
        got = first_chaos_ensemble(vals, M3, grid, [eps])
        dt = grid.step
        coeff = (2 * math.pi) ** (-1.5)
        for pidx in range(2):
            comp = vals[pidx, 0]
            mid = 0.5 * (comp[:-1] + comp[1:])
            total = 0.0
            for i in range(grid.n):
                for j in range(i + 1, grid.n):
                    w = (eps + ((j - i) * dt) ** (2 / 3)) ** (-2.5)
                    total += w * (mid[j] - mid[i]) * dt * dt
                total += ((eps + (dt / 3) ** (2 / 3)) ** (-2.5)
                          * (comp[i + 1] - comp[i]) / 3.0 * dt * dt / 2)
            assert got[0, pidx] == pytest.approx(coeff * total, rel=1e-12)


class TestRefinement:
    @pytest.fixture(scope="class")
    def nested_paths(self):
        # one frozen fine path restricted to coarser grids stays an exact path
        grid = TimeGrid(n=2048, t=1.0)
        fine = generate_path(M3, grid, seed=42)
        out = {}
        for n in (256, 512, 1024, 2048):
            stride = 2048 // n
            out[n] = FbmPath(model=M3, grid=TimeGrid(n=n, t=1.0),
                             values=np.ascontiguousarray(fine.values[:, ::stride]),
                             seed=42, method=fine.method)
        return out

    def test_grid_refinement_cauchy(self, nested_paths):
        eps = 0.05
        v = {n: dslt(EstimatorRequest(path=p, eps=eps)).value
             for n, p in nested_paths.items()}
        # rough paths make per-level differences noisy; the tail contraction
        # is what identifies a Cauchy sequence
        assert abs(v[2048] - v[1024]) < abs(v[1024] - v[512])
        assert abs(v[2048] - v[1024]) < abs(v[512] - v[256])

    def test_scheme_consistency_under_refinement(self, nested_paths):
        eps = 0.05
        gaps = {}
        for n in (256, 512, 1024, 2048):
            p = nested_paths[n]
            m = dslt(EstimatorRequest(path=p, eps=eps, scheme=Scheme.MIDPOINT)).value
            tr = dslt(EstimatorRequest(path=p, eps=eps, scheme=Scheme.TRAPEZOID)).value
            gaps[n] = abs(m - tr)
        # rough-path noise makes single steps jitter; demand clear overall contraction
        assert gaps[2048] < gaps[256] / 4
        assert gaps[1024] < gaps[256]

    def test_first_chaos_scheme_consistency(self, nested_paths):
        eps = 0.05
        gaps = []
        for n in (256, 512, 1024):
            p = nested_paths[n]
            m = first_chaos(p, eps, scheme=Scheme.MIDPOINT)
            tr = first_chaos(p, eps, scheme=Scheme.TRAPEZOID)
            gaps.append(abs(m - tr))
        assert gaps[2] < gaps[1] < gaps[0]


class TestLocalTimeShape:
    def test_flat_kernel_limit(self):
        # eps far above path scale: value approaches the zero-path constant
        grid = TimeGrid(n=128, t=1.0)
        p = generate_path(HurstModel(H=0.4, d=2), grid, seed=3)
        eps = 50.0
        expected = (2 * math.pi * eps) ** (-1.0) * 0.5
        assert slt(p, eps).value == pytest.approx(expected, rel=0.02)

    def test_positive_and_unimodal_in_offset(self):
        grid = TimeGrid(n=256, t=1.0)
        model = HurstModel(H=0.4, d=2)
        p = generate_path(model, grid, seed=9)
        direction = np.array([1.0, 0.5])
        direction /= np.linalg.norm(direction)
        vals = [slt(p, 0.05, y=tuple(r * direction)).value for r in (0.0, 0.6, 1.2, 2.4)]
        assert all(v > 0 for v in vals)
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestEnsembleStatistics:
    def test_derivative_mean_zero(self, ensemble_d3):
        model, grid, values = ensemble_d3
        vals = dslt_ensemble(values, model, grid, [0.1])[0]
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean()) < 3 * se

    @pytest.mark.parametrize("eps", [0.1, 0.02])
    def test_second_moment_matches_quadrature(self, ensemble_d3_fine, eps):
        # exact identity: E[dslt^2] = signed per-coordinate variance total
        model, grid, values = ensemble_d3_fine
        vals = dslt_ensemble(values, model, grid, [eps])[0]
        m2 = float(np.mean(vals ** 2))
        se = float(np.std(vals ** 2, ddof=1) / math.sqrt(len(vals)))
        quad = variance_pieces(eps, model, MuConvention.SIGNED,
                               prefactor=PrefactorMode.PER_COORDINATE).total
        assert abs(m2 - quad) < 3 * se, f"eps={eps}: {m2} vs {quad} (se {se})"

    def test_first_chaos_variance_matches_quadrature(self, ensemble_d3_fine):
        model, grid, values = ensemble_d3_fine
        eps = 0.05
        fc = first_chaos_ensemble(values, model, grid, [eps])[0]
        var = float(np.var(fc, ddof=1))
        se = var * math.sqrt(2.0 / (len(fc) - 1))
        quad = first_chaos_variance(eps, model, mu_convention=MuConvention.SIGNED,
                                    prefactor=PrefactorMode.PER_COORDINATE)
        assert abs(var - quad) < 3 * se

    def test_chaos_orthogonality_surrogate(self, ensemble_d3_fine):
        # cov(dslt - fc, fc) vanishes if fc really is the chaos-1 projection
        model, grid, values = ensemble_d3_fine
        eps = 0.05
        ds = dslt_ensemble(values, model, grid, [eps])[0]
        fc = first_chaos_ensemble(values, model, grid, [eps])[0]
        resid = ds - fc
        prod = resid * fc
        cov = float(prod.mean() - resid.mean() * fc.mean())
        se = float(prod.std(ddof=1) / math.sqrt(len(prod)))
        assert abs(cov) < 3 * se

    def test_summed_contraction_variance_ratio(self, ensemble_d3):
        # summed-gradient projection variance is d times the single-coordinate one
        model, grid, values = ensemble_d3
        eps = 0.05
        single = first_chaos_ensemble(values, model, grid, [eps], mode=ContractionMode.SINGLE)[0]
        summed = first_chaos_ensemble(values, model, grid, [eps], mode=ContractionMode.SUMMED)[0]
        ratio = np.var(summed, ddof=1) / np.var(single, ddof=1)
        se = 3.0 * math.sqrt(2.0 / (len(single) - 1)) * 2  # crude but sufficient
        assert abs(ratio - 3.0) < 3.0 * se
