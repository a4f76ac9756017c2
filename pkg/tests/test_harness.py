from pathlib import Path

import pytest

from fragmon.harness import (Bounds, GeneratorParams, compute_metrics, evaluate, generate_source,
                             generate_subject, run_pipeline)
from fragmon.monitor import Length, RecordingPolicy
from fragmon.subject import MethodRef, interpret, parse_program

GOLDEN = Path(__file__).parent / "golden" / "gen_seed42.subj"


class TestGenerator:
    def test_deterministic(self):
        assert generate_source(GeneratorParams(rng_seed=9)) == generate_source(GeneratorParams(rng_seed=9))
        assert generate_source(GeneratorParams(rng_seed=9)) != generate_source(GeneratorParams(rng_seed=10))

    def test_golden(self):
        assert generate_source(GeneratorParams(rng_seed=42)) == GOLDEN.read_text()

    @pytest.mark.parametrize("seed", range(10))
    def test_type_checks_and_terminates(self, seed):
        p = generate_subject(rng_seed=seed)
        tr = interpret(p, 0)
        assert not tr.faulted and tr.events

    def test_single_class(self):
        p = generate_subject(rng_seed=3, n_classes=1)
        assert len(p.interfaces_of_interest) == 1

    def test_single_method(self):
        p = generate_subject(rng_seed=3, n_methods_per_class=1)
        interpret(p, 0)

    def test_no_branches(self):
        src = generate_source(GeneratorParams(rng_seed=3, max_branch_depth=0))
        assert not any(line.strip().startswith("if ") for line in src.splitlines())
        parse_program(src)

    def test_overrides(self):
        base = GeneratorParams(rng_seed=1)
        assert generate_source(base) != generate_source(GeneratorParams(rng_seed=1, n_classes=2))
        assert generate_subject(base, n_classes=2).classes == generate_subject(rng_seed=1, n_classes=2).classes

    @pytest.mark.parametrize("kw", [dict(n_classes=0), dict(min_fields=4, max_fields=2),
                                    dict(max_branch_depth=-1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            GeneratorParams(**kw)

    def test_faults_possible(self):
        faulted = 0
        for seed in range(20):
            p = generate_subject(rng_seed=seed, allow_faults=True)
            faulted += any(interpret(p, s).faulted for s in range(5))
        assert faulted


class TestMetrics:
    def test_always_on(self, vehicle):
        m = evaluate(vehicle, 10, RecordingPolicy.always_on())
        assert (m.precision, m.exactness, m.coverage) == (1.0, 1.0, 1.0)
        assert m.overhead_proxy == 1.0 and m.junction_audit == 1.0

    def test_always_off(self, vehicle):
        m = evaluate(vehicle, 10, RecordingPolicy.always_off())
        assert m.fragments == 0 and m.traces == 0
        assert (m.precision, m.exactness, m.coverage, m.overhead_proxy) == (0.0, 0.0, 0.0, 0.0)

    def test_ratios_bounded(self, small_corpus):
        pol = RecordingPolicy("windowed", Length("fixed", 3), Length("fixed", 2))
        for p, cs in small_corpus:
            m = run_pipeline(p, 4, pol, conditions=cs).metrics
            for v in (m.precision, m.exactness, m.coverage, m.overhead_proxy):
                assert 0.0 <= v <= 1.0
            assert m.junction_audit == 1.0
            assert m.exact_traces <= m.multi_fragment_traces
            assert m.witnessed_pairs <= m.ground_truth_pairs

    def test_recompute(self, vehicle):
        r = run_pipeline(vehicle, 5, RecordingPolicy())
        assert compute_metrics(r.results, r.fragments, r.traces, r.conditions) == r.metrics

    def test_coverage_grows_with_window(self, vehicle):
        # longer windows over the same off-periods never lose adjacent pairs
        covs = [evaluate(vehicle, 20, RecordingPolicy("windowed", Length("fixed", n), Length("fixed", 2))).coverage
                for n in (1, 2, 4, 8)]
        assert covs == sorted(covs)

    @pytest.mark.parametrize("seed", [2, 4])
    def test_coverage_grows_with_runs(self, seed):
        p = generate_subject(rng_seed=seed)
        for pol in (RecordingPolicy.windowed(3, 2), RecordingPolicy("windowed", Length("fixed", 4),
                                                                    Length("fixed", 4), budget=0.5)):
            covs = [evaluate(p, k, pol).coverage for k in (1, 2, 4, 8)]
            assert covs == sorted(covs)

    def test_json_sorted(self, vehicle):
        text = evaluate(vehicle, 3, RecordingPolicy()).to_json()
        assert text.startswith('{"conditions":') and " " not in text

    def test_installations(self, vehicle):
        r = run_pipeline(vehicle, 4, RecordingPolicy.always_on(), installations=2)
        assert r.fragments.installations == {"inst0", "inst1"}

    def test_bounds_forwarded(self, vehicle):
        r = run_pipeline(vehicle, 2, RecordingPolicy(), Bounds(depth=0))
        assert len(r.conditions) == 0

    def test_zero_runs(self, vehicle):
        with pytest.raises(ValueError):
            run_pipeline(vehicle, 0, RecordingPolicy())


def test_entry_is_main():
    p = generate_subject(rng_seed=0)
    assert p.entry == MethodRef(p.entry.cls, "main")
