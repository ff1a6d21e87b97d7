"""Tests for the single-genome optimizer, its batches and its run loop"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import optimizers.base_optimizer as base_optimizer
from optimizers.base_optimizer import (
    BaseOptimizer,
    Evaluation,
    Genome,
    SuggestionSource,
    Trial,
    TrialStatus,
    constant_liar_round,
    default_n_init,
    evaluate_points,
    failure_value,
    genome_universe,
    liar_value,
    run_base,
    seed_streams,
    universe_index,
)
from tools.acquisition_tools import AcquisitionKind, AcquisitionParams, SearchConfig, argmin_acquisition
from tools.objective_tools import MIXED_INT_SPACE, builtin_space
from tools.space_tools import normalize, sample, validate_point
from tools.surrogate_tools import Dataset, SurrogateConfig, SurrogateKind, fit
from utils.exceptions import SurrogateFitError, ValidationError

GP_LCB = Genome(surrogate=SurrogateKind.GP, acquisition=AcquisitionKind.LCB)
GP_EI = Genome(surrogate=SurrogateKind.GP, acquisition=AcquisitionKind.EI)


def parabola(point):
    return (point[0] - 0.7) ** 2


def seeded_history(space, genome, n, seed=0, objective=parabola):
    rng = np.random.default_rng(seed)
    history = []
    for i in range(n):
        point = sample(space, rng)
        history.append(Trial(point=point, objective=objective(point), iteration=i + 1, genome=genome,
                             source=SuggestionSource.INITIAL))
    return history


class TestGenome:
    def test_universe_has_sixteen_distinct_genomes(self):
        universe = genome_universe()
        assert len(universe) == 16
        assert len(set(universe)) == 16
        assert [universe_index(g) for g in universe] == list(range(16))

    def test_label_roundtrip(self):
        genome = Genome.from_label("GBRT-GP_HEDGE")
        assert genome.surrogate is SurrogateKind.GBRT
        assert genome.acquisition is AcquisitionKind.GP_HEDGE
        assert genome.label == "GBRT-GP_HEDGE"

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            Genome.from_label("SVM-EI")

    def test_seed_streams_differ_per_genome(self):
        a, _ = seed_streams(0, GP_LCB)
        b, _ = seed_streams(0, GP_EI)
        assert a.random() != b.random()


class TestAsk:
    def test_cold_start_is_random_and_in_bounds(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0), n_init=10)
        point = optimizer.ask()
        validate_point(unit_space, point)
        assert optimizer.source_of(point) is SuggestionSource.INITIAL

    def test_model_suggestion_matches_stepwise_pipeline(self, mixed_space):
        history = seeded_history(mixed_space, GP_LCB, 15, objective=lambda p: float(np.sum(np.asarray(p) ** 0.5)))
        optimizer = BaseOptimizer(GP_LCB, mixed_space, np.random.default_rng(77), history=list(history), n_init=10)
        point = optimizer.ask()

        rng = np.random.default_rng(77)
        X = np.array([normalize(mixed_space, t.point) for t in history])
        y = np.array([t.objective for t in history])
        model = fit(SurrogateKind.GP, Dataset(X, y), rng)
        expected = argmin_acquisition(model, AcquisitionKind.LCB, AcquisitionParams(), float(y.min()),
                                      mixed_space, rng, SearchConfig())
        assert point == expected
        assert optimizer.source_of(point) is SuggestionSource.MODEL

    def test_identical_state_gives_identical_points(self, unit_space):
        history = seeded_history(unit_space, GP_EI, 12)
        a = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(4), history=list(history)).ask()
        b = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(4), history=list(history)).ask()
        assert a == b

    def test_fit_failure_falls_back_to_random(self, unit_space, monkeypatch):
        def broken_fit(*args, **kwargs):
            raise SurrogateFitError("degenerate")

        monkeypatch.setattr(base_optimizer, "fit", broken_fit)
        optimizer = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(0),
                                  history=seeded_history(unit_space, GP_EI, 12))
        point = optimizer.ask()
        validate_point(unit_space, point)
        assert optimizer.source_of(point) is SuggestionSource.FALLBACK

    def test_non_finite_prediction_falls_back_to_random(self, unit_space, monkeypatch):
        def broken_search(*args, **kwargs):
            raise SurrogateFitError("surrogate produced non-finite predictions")

        monkeypatch.setattr(base_optimizer, "argmin_acquisition", broken_search)
        optimizer = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(0),
                                  history=seeded_history(unit_space, GP_EI, 12))
        point = optimizer.ask()
        validate_point(unit_space, point)
        assert optimizer.source_of(point) is SuggestionSource.FALLBACK

    @settings(max_examples=20, deadline=None)
    @given(genome=st.sampled_from(genome_universe()), seed=st.integers(min_value=0, max_value=1000),
           n=st.integers(min_value=0, max_value=14))
    def test_points_respect_bounds(self, genome, seed, n):
        history = seeded_history(MIXED_INT_SPACE, genome, n, seed=seed, objective=lambda p: float(sum(p)))
        optimizer = BaseOptimizer(genome, MIXED_INT_SPACE, np.random.default_rng(seed), history=history, n_init=5,
                                  surrogate_config=SurrogateConfig(n_trees=5, gbrt_stages=5, gp_restarts=0),
                                  search=SearchConfig(n_candidates=50, n_refine=2))
        validate_point(MIXED_INT_SPACE, optimizer.ask())


class TestAskBatch:
    def test_single_point_batch_equals_ask(self, unit_space):
        history = seeded_history(unit_space, GP_EI, 12)
        single = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(8), history=list(history)).ask()
        batch = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(8), history=list(history)).ask_batch(1)
        assert batch == [single]

    def test_batch_points_are_distinct(self, unit_space):
        history = seeded_history(unit_space, GP_EI, 15)
        optimizer = BaseOptimizer(GP_EI, unit_space, np.random.default_rng(2), history=history)
        points = optimizer.ask_batch(3)
        assert len(points) == 3
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(normalize(unit_space, points[i]) - normalize(unit_space, points[j])) > 1e-6

    def test_batch_leaves_history_untouched(self, unit_space):
        history = seeded_history(unit_space, GP_LCB, 12)
        snapshot = list(history)
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(1), history=history)
        optimizer.ask_batch(4)
        assert optimizer.history == snapshot

    def test_rejects_empty_batch(self, unit_space):
        with pytest.raises(ValueError):
            BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(1)).ask_batch(0)

    def test_liar_trials_share_the_round(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(1),
                                  history=seeded_history(unit_space, GP_LCB, 3), n_init=10)
        points = constant_liar_round([optimizer] * 2, optimizer.history)
        assert len(points) == 2
        assert len(optimizer.history) == 3


class TestLiarAndFailureValues:
    def test_empty_history(self):
        assert liar_value([]) == 0.0
        assert failure_value([]) == 0.0

    def test_flavours(self, unit_space):
        history = [Trial(point=(0.1,), objective=v, iteration=i + 1, genome=GP_LCB)
                   for i, v in enumerate([3.0, 1.0, 2.0])]
        assert liar_value(history, "min") == 1.0
        assert liar_value(history, "mean") == 2.0
        assert liar_value(history, "max") == 3.0
        assert failure_value(history) == 3.0

    def test_failed_trials_are_ignored(self):
        history = [Trial(point=(0.1,), objective=1.0, iteration=1, genome=GP_LCB),
                   Trial(point=(0.2,), objective=-5.0, iteration=2, genome=GP_LCB, status=TrialStatus.FAILED)]
        assert liar_value(history) == 1.0

    def test_default_n_init(self, unit_space):
        assert default_n_init(unit_space) == 10
        assert default_n_init(builtin_space("hartmann6")) == 12


class TestTell:
    def test_tell_then_ask_uses_longer_history(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0))
        point = optimizer.ask()
        optimizer.tell(Trial(point=point, objective=parabola(point), iteration=1, genome=GP_LCB))
        assert len(optimizer.history) == 1

    def test_rounds_are_grouped_in_order(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0))
        for n in (1, 1, 2, 2, 3):
            optimizer.tell(Trial(point=(0.5,), objective=1.0, iteration=n, genome=GP_LCB))
        assert [t.iteration for t in optimizer.history] == [1, 1, 2, 2, 3]

    def test_nan_objective_rejected(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            optimizer.tell(Trial(point=(0.5,), objective=float("nan"), iteration=1, genome=GP_LCB))
        assert optimizer.history == []

    def test_lie_rejected(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            optimizer.tell(Trial(point=(0.5,), objective=0.0, iteration=1, genome=GP_LCB, status=TrialStatus.LIE))

    def test_out_of_bounds_point_rejected(self, unit_space):
        optimizer = BaseOptimizer(GP_LCB, unit_space, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            optimizer.tell(Trial(point=(1.5,), objective=0.0, iteration=1, genome=GP_LCB))

    def test_hedge_gains_move_after_model_suggestion(self, unit_space):
        genome = Genome(surrogate=SurrogateKind.GP, acquisition=AcquisitionKind.GP_HEDGE)
        optimizer = BaseOptimizer(genome, unit_space, np.random.default_rng(0),
                                  history=seeded_history(unit_space, genome, 12, objective=lambda p: p[0] + 1.0))
        point = optimizer.ask()
        optimizer.tell(Trial(point=point, objective=parabola(point), iteration=13, genome=genome))
        assert np.count_nonzero(optimizer.hedge.gains) == 1

    def test_repeated_batch_point_credits_every_ask(self, unit_space, monkeypatch):
        genome = Genome(surrogate=SurrogateKind.RF, acquisition=AcquisitionKind.GP_HEDGE)
        asked, credited = [], []
        real_update = base_optimizer.hedge_update

        def same_point(model, kind, *args, **kwargs):
            asked.append(kind)
            return (0.5,)

        def counting_update(state, chosen, mu):
            credited.append(chosen)
            return real_update(state, chosen, mu)

        monkeypatch.setattr(base_optimizer, "argmin_acquisition", same_point)
        monkeypatch.setattr(base_optimizer, "hedge_update", counting_update)
        optimizer = BaseOptimizer(genome, unit_space, np.random.default_rng(3),
                                  history=seeded_history(unit_space, genome, 10),
                                  surrogate_config=SurrogateConfig(n_trees=10))
        points = optimizer.ask_batch(4)
        assert points == [(0.5,)] * 4

        for slot, point in enumerate(points):
            assert optimizer.source_of(point) is SuggestionSource.MODEL
            optimizer.tell(Trial(point=point, objective=parabola(point), iteration=11, genome=genome, slot=slot))
        assert credited == asked
        assert len(credited) == 4


class TestEvaluation:
    def test_order_is_kept_with_workers(self):
        results = evaluate_points(lambda p: p[0] * 2, [(1,), (2,), (3,)], max_workers=3)
        assert [r.objective for r in results] == [2, 4, 6]

    def test_failures_are_captured(self):
        def boom(point):
            raise RuntimeError("crashed")

        (result,) = evaluate_points(boom, [(0.1,)])
        assert result.objective is None
        assert "crashed" in result.error

    def test_non_finite_is_a_failure(self):
        (result,) = evaluate_points(lambda p: float("inf"), [(0.1,)])
        assert isinstance(result, Evaluation)
        assert result.objective is None


class TestRunBase:
    def test_budget_and_sources(self, unit_space, fast_surrogates):
        record = run_base(parabola, unit_space, GP_EI, n_rounds=12, seed=0, n_init=10,
                          surrogate_config=fast_surrogates)
        assert len(record.trials) == 12
        assert [t.source for t in record.trials[:10]] == [SuggestionSource.INITIAL] * 10
        assert {t.source for t in record.trials[10:]} <= {SuggestionSource.MODEL, SuggestionSource.FALLBACK}
        assert record.best_objective == min(t.objective for t in record.trials)

    def test_batches_fill_every_slot(self, unit_space, fast_surrogates):
        record = run_base(parabola, unit_space, GP_LCB, n_rounds=5, seed=1, n_suggestions=3, n_init=6,
                          surrogate_config=fast_surrogates)
        assert len(record.trials) == 15
        assert [t.slot for t in record.trials[:3]] == [0, 1, 2]
        assert [t.iteration for t in record.trials[-3:]] == [5, 5, 5]

    def test_same_seed_same_run(self, unit_space, fast_surrogates):
        a = run_base(parabola, unit_space, GP_EI, n_rounds=13, seed=3, surrogate_config=fast_surrogates)
        b = run_base(parabola, unit_space, GP_EI, n_rounds=13, seed=3, surrogate_config=fast_surrogates)
        assert a.trials == b.trials

    def test_failed_evaluations_get_worst_value(self, unit_space, fast_surrogates):
        calls = {"n": 0}

        def flaky(point):
            calls["n"] += 1
            if calls["n"] == 4:
                raise RuntimeError("worker lost")
            return parabola(point)

        record = run_base(flaky, unit_space, GP_EI, n_rounds=6, seed=0, surrogate_config=fast_surrogates)
        failed = [t for t in record.trials if t.status is TrialStatus.FAILED]
        assert len(failed) == 1
        assert failed[0].objective == max(t.objective for t in record.trials[:3])

    def test_converges_on_parabola(self, unit_space):
        hits = 0
        for seed in range(10):
            record = run_base(parabola, unit_space, GP_EI, n_rounds=30, seed=seed, n_init=10)
            hits += record.best_objective <= 1e-2
        assert hits >= 9
