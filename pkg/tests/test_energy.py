"""Tick-energy formula, componentization, comparisons, synop metrics."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinnsim.energy import (
    ComparisonRow,
    EnergyLedger,
    EnergyParams,
    PowerSummary,
    compare_dvfs,
    energy_cycle,
    nef_synop_energy_pj,
)

PARAMS = EnergyParams()
REL = 1e-12


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-30)


class TestEnergyCycle:
    def test_sleep_tick_at_pl1_is_baseline_only(self):
        e = energy_cycle(1, 0.0, 0, 0, PARAMS)
        assert close(e.total_j, 22.38e-6)
        assert e.neuron_j == 0 and e.synapse_j == 0

    def test_hand_evaluated_pl3_case(self):
        # 66.44m*0.2m + 22.38m*0.8m + 1.89n*250 + 0.26n*1000
        e = energy_cycle(3, 0.2e-3, 250, 1000, PARAMS)
        assert close(e.total_j, 31.9245e-6)
        assert close(e.baseline_j, 13.288e-6 + 17.904e-6)
        assert close(e.neuron_j, 472.5e-9)
        assert close(e.synapse_j, 260e-9)

    def test_always_on_pl3_idle_tick_matches_baseline_row(self):
        e = energy_cycle(3, PARAMS.t_sys_s, 0, 0, PARAMS, sleep=False)
        assert close(e.total_j, 66.44e-6)
        # with sleep accounting and t_sp = t_sys the result is identical
        e2 = energy_cycle(3, PARAMS.t_sys_s, 0, 0, PARAMS, sleep=True)
        assert close(e2.total_j, 66.44e-6)

    def test_t_sp_above_t_sys_clamps_and_flags(self):
        e = energy_cycle(2, 2e-3, 0, 0, PARAMS)
        assert e.clamped
        assert close(e.baseline_j, 29.72e-6)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            energy_cycle(4, 0, 0, 0, PARAMS)
        with pytest.raises(ValueError):
            energy_cycle(1, -1e-9, 0, 0, PARAMS)
        with pytest.raises(ValueError):
            energy_cycle(1, 0, -1, 0, PARAMS)

    @settings(max_examples=200)
    @given(
        pl=st.integers(1, 3),
        t_sp=st.floats(0, 1e-3),
        a=st.integers(0, 1000), b=st.integers(0, 1000),
        c=st.integers(0, 20000), d=st.integers(0, 20000),
    )
    def test_event_components_are_exactly_additive(self, pl, t_sp, a, b, c, d):
        whole = energy_cycle(pl, t_sp, a + b, c + d, PARAMS)
        left = energy_cycle(pl, t_sp, a, c, PARAMS)
        right = energy_cycle(pl, 0.0, b, d, PARAMS)
        assert close(whole.neuron_j, left.neuron_j + right.neuron_j, 1e-9)
        assert close(whole.synapse_j, left.synapse_j + right.synapse_j, 1e-9)
        # subtracting the duplicated baseline term recovers the whole
        assert close(
            whole.total_j,
            left.total_j + right.total_j - right.baseline_j,
            1e-9,
        )

    def test_per_event_energy_ordering_of_defaults(self):
        assert PARAMS.e_syn_nj[0] == PARAMS.e_syn_nj[1] < PARAMS.e_syn_nj[2]

    def test_componentized_total_matches_scalar_total(self):
        led = EnergyLedger()
        for i in range(1000):
            led.add(energy_cycle(1 + i % 3, (i % 10) * 1e-4, i % 251, i % 97, PARAMS))
        assert close(led.component_sum_j(), led.total_j)


def _summary(baseline, neuron, synapse, spikes=100, ticks=10, n_pes=8):
    return PowerSummary(
        n_pes=n_pes, ticks=ticks, baseline_per_pe=baseline,
        neuron_chip=neuron, synapse_chip=synapse, spikes_total=spikes,
    )


class TestCompare:
    def test_identical_reports_give_zero_reduction(self):
        s = _summary(66.44, 3.78, 0.52)
        for row in compare_dvfs(s, s):
            assert row.reduction_pct == 0.0

    def test_all_pl1_vs_only_pl3_baseline_ratio(self):
        dvfs = _summary(22.38, 0.0, 0.0, spikes=0)
        pl3 = _summary(66.44, 0.0, 0.0, spikes=0)
        rows = {r.component: r for r in compare_dvfs(dvfs, pl3)}
        assert math.isclose(rows["baseline"].reduction_pct, (1 - 22.38 / 66.44) * 100)
        assert round(rows["baseline"].reduction_pct, 1) == 66.3

    def test_mismatched_horizons_rejected(self):
        with pytest.raises(ValueError):
            compare_dvfs(_summary(1, 1, 1, ticks=10), _summary(1, 1, 1, ticks=20))

    def test_mismatched_spike_traces_rejected(self):
        with pytest.raises(ValueError):
            compare_dvfs(_summary(1, 1, 1, spikes=5), _summary(1, 1, 1, spikes=6))

    def test_table_layout_total_uses_chip_event_rows(self):
        s = _summary(66.44, 3.78, 0.52)
        assert close(s.total_table, 66.44 + 3.78 + 0.52)


class TestSynopEnergy:
    def test_hardware_synop_count_example(self):
        # N=512, D=1, M=7 -> 519 hardware ops
        pj = nef_synop_energy_pj(519e-12, 512, 1, 7, "hardware")
        assert close(pj, 1.0)

    def test_equivalent_synop_count_example(self):
        # N=512, M=7 -> 3584 equivalent events; 35.84 nJ -> 10 pJ each
        pj = nef_synop_energy_pj(35.84e-9, 512, 1, 7, "equivalent")
        assert close(pj, 10.0)

    def test_zero_denominator_returns_nan(self):
        assert math.isnan(nef_synop_energy_pj(1e-9, 512, 1, 0, "equivalent"))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            nef_synop_energy_pj(1e-9, 512, 1, 1, "banana")
