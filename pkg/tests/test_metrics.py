"""Hand-arithmetic oracles and properties for the imbalance metric suite.

The composition test re-derives every report field from raw inputs with an
independent numpy implementation; the scalar tests pin down each operation
with values small enough to check by hand.
"""

import numpy as np
import pytest
from numpy.random import default_rng

from mfload.errors import ConfigError, InsufficientDataError
from mfload.metrics import (
    ImbalanceReport,
    ResourceUtilization,
    ServerSpec,
    SystemAverages,
    WeightTriple,
    average_utilization,
    default_weights,
    efficiency,
    full_report,
    resource_imbalance,
    server_sil,
    system_averages,
    system_sil,
    total_imbalance,
    write_report_csv,
    write_sil_csv,
)


def _u(cpu, ram, net, window=64):
    return ResourceUtilization(cpu=cpu, ram=ram, net=net, window=window)


def _spec(i, cpu=4, ram=32.0, net=16.0):
    return ServerSpec(id=i, cpu_count=cpu, ram_capacity=ram, net_capacity=net)


def _brute_report(utils, specs, w):
    """Independent recomputation of every report field from raw inputs."""
    cpu = np.array([u.cpu for u in utils])
    ram = np.array([u.ram for u in utils])
    net = np.array([u.net for u in utils])
    cw = np.array([s.cpu_count for s in specs], dtype=float)
    rw = np.array([s.ram_capacity for s in specs])
    nw = np.array([s.net_capacity for s in specs])
    cpu_all = float(cpu @ cw / cw.sum())
    ram_all = float(ram @ rw / rw.sum())
    net_all = float(net @ nw / nw.sum())
    isl_cpu = float(((cpu - cpu_all) ** 2).sum())
    isl_ram = float(((ram - ram_all) ** 2).sum())
    isl_net = float(((net - net_all) ** 2).sum())
    sil = w.a * (cpu - cpu_all) ** 2 + w.b * (ram - ram_all) ** 2 + w.c * (net - net_all) ** 2
    eff = float(np.mean(w.a * cpu + w.b * ram + w.c * net))
    return {
        "isl_cpu": isl_cpu,
        "isl_ram": isl_ram,
        "isl_net": isl_net,
        "ibl_tot": isl_cpu + isl_ram + isl_net,
        "sil": sil,
        "isl_tot": float(sil.mean()),
        "efficiency": eff,
    }


# ---------------------------------------------------------------- averaging


def test_average_utilization_constant_input():
    got = average_utilization([(0.5, 0.5, 0.5)] * 4, window=4)
    assert (got.cpu, got.ram, got.net) == (0.5, 0.5, 0.5)


def test_average_utilization_arithmetic_mean():
    got = average_utilization([(0.2, 0.0, 1.0), (0.4, 0.0, 1.0), (0.6, 0.0, 1.0)], window=3)
    assert got.cpu == pytest.approx(0.4, abs=1e-15)
    assert got.ram == 0.0
    assert got.net == 1.0


def test_average_utilization_single_sample_identity():
    got = average_utilization([(0.3, 0.7, 0.1)], window=1)
    assert (got.cpu, got.ram, got.net, got.window) == (0.3, 0.7, 0.1, 1)


def test_average_utilization_rejects_bad_input():
    with pytest.raises(InsufficientDataError):
        average_utilization([], window=0)
    with pytest.raises(ConfigError):
        average_utilization([(0.5, 0.5, 1.2)], window=1)
    with pytest.raises(ConfigError):
        average_utilization([(0.5, 0.5, 0.5)] * 3, window=4)


# ---------------------------------------------------------- system averages


def test_system_averages_symmetric():
    utils = [_u(0.5, 0.5, 0.5), _u(0.5, 0.5, 0.5)]
    avgs = system_averages(utils, [_spec(0), _spec(1)])
    assert avgs.cpu_all == 0.5
    assert avgs.ram_all == 0.5
    assert avgs.net_all == 0.5


def test_system_averages_capacity_weighted():
    # cpu (0.2*1 + 0.8*3) / 4 = 0.65
    utils = [_u(0.2, 0.0, 0.0), _u(0.8, 0.0, 0.0)]
    specs = [_spec(0, cpu=1), _spec(1, cpu=3)]
    assert system_averages(utils, specs).cpu_all == pytest.approx(0.65, abs=1e-15)


def test_system_averages_single_server_identity():
    avgs = system_averages([_u(0.3, 0.6, 0.9)], [_spec(0)])
    assert (avgs.cpu_all, avgs.ram_all, avgs.net_all) == (0.3, 0.6, 0.9)


def test_system_averages_rejects_misaligned_input():
    with pytest.raises(ConfigError):
        system_averages([_u(0.5, 0.5, 0.5)], [_spec(0), _spec(1)])
    with pytest.raises(InsufficientDataError):
        system_averages([], [])


# ------------------------------------------------------ per-resource / sums


def test_resource_imbalance_oracles():
    assert resource_imbalance([0.5, 0.5, 0.5], 0.5) == 0.0
    assert resource_imbalance([0.4, 0.6], 0.5) == pytest.approx(0.02, abs=1e-15)
    assert resource_imbalance([0.0, 1.0], 0.5) == 0.5
    with pytest.raises(InsufficientDataError):
        resource_imbalance([], 0.5)


def test_total_imbalance_oracles():
    assert total_imbalance(0.0, 0.0, 0.0) == 0.0
    assert total_imbalance(0.02, 0.01, 0.03) == pytest.approx(0.06, abs=1e-15)
    assert total_imbalance(0.37, 0.0, 0.0) == 0.37
    with pytest.raises(ConfigError):
        total_imbalance(-0.01, 0.0, 0.0)


def test_server_sil_oracles():
    avgs = SystemAverages(cpu_all=0.4, ram_all=0.4, net_all=0.4)
    assert server_sil(_u(0.4, 0.4, 0.4), avgs, default_weights()) == 0.0
    # three deviations of 0.3 under equal weights: 3 * (1/3) * 0.09
    got = server_sil(_u(0.7, 0.7, 0.7), avgs, default_weights())
    assert got == pytest.approx(0.09, abs=1e-15)
    cpu_only = WeightTriple(a=1.0, b=0.0, c=0.0)
    assert server_sil(_u(0.6, 0.9, 0.1), avgs, cpu_only) == pytest.approx(0.04, abs=1e-15)


def test_system_sil_oracles():
    assert system_sil([0.0, 0.0, 0.0]) == 0.0
    assert system_sil([0.09, 0.01]) == pytest.approx(0.05, abs=1e-15)
    assert system_sil([0.123]) == 0.123
    with pytest.raises(InsufficientDataError):
        system_sil([])
    with pytest.raises(ConfigError):
        system_sil([0.1, -0.1])


def test_efficiency_bounds_and_mean():
    w = default_weights()
    assert efficiency([_u(1.0, 1.0, 1.0)] * 3, w) == pytest.approx(1.0, abs=1e-15)
    assert efficiency([_u(0.0, 0.0, 0.0)] * 3, w) == 0.0
    got = efficiency([_u(0.2, 0.2, 0.2), _u(0.6, 0.6, 0.6)], w)
    assert got == pytest.approx(0.4, abs=1e-15)


# ------------------------------------------------------------- composition


def test_full_report_uniform_cluster_is_exactly_zero():
    # dyadic utilization on integer-ratio capacities: no rounding anywhere,
    # so the zero must be exact, not approximate
    specs = [_spec(i, cpu=c, ram=8.0 * c, net=4.0 * c) for i, c in enumerate((8, 4, 2, 1))]
    utils = [_u(0.5, 0.25, 0.75)] * 4
    r = full_report(utils, specs, default_weights())
    assert r.isl_cpu == 0.0
    assert r.isl_ram == 0.0
    assert r.isl_net == 0.0
    assert r.ibl_tot == 0.0
    assert r.isl_tot == 0.0
    assert r.sil == (0.0, 0.0, 0.0, 0.0)
    expected_eff = (0.5 + 0.25 + 0.75) / 3.0
    assert r.efficiency == pytest.approx(expected_eff, abs=1e-15)


def test_full_report_single_server_degenerate():
    r = full_report([_u(0.9, 0.2, 0.6)], [_spec(0)], default_weights())
    assert r.isl_cpu == 0.0 and r.isl_ram == 0.0 and r.isl_net == 0.0
    assert r.isl_tot == 0.0


def test_perturbation_quadratic_hand_oracle():
    """Bumping one server's cpu by delta moves isl_tot by a known quadratic."""
    n = 4
    specs = [_spec(i, cpu=2) for i in range(n)]
    w = default_weights()
    base = 0.5
    wj = 2.0 / (2.0 * n)  # perturbed server's share of cpu weight
    for delta in (0.01, 0.05, 0.2):
        utils = [_u(base, base, base) for _ in range(n)]
        utils[1] = _u(base + delta, base, base)
        r = full_report(utils, specs, w)
        isl_cpu_expect = delta**2 * ((1.0 - wj) ** 2 + (n - 1) * wj**2)
        assert r.isl_cpu == pytest.approx(isl_cpu_expect, abs=1e-12)
        assert r.isl_tot == pytest.approx(w.a * isl_cpu_expect / n, abs=1e-12)
        assert r.isl_tot > 0.0


def test_perturbation_scales_quadratically():
    specs = [_spec(i) for i in range(5)]
    w = default_weights()

    def bumped(delta):
        utils = [_u(0.4, 0.4, 0.4) for _ in range(5)]
        utils[2] = _u(0.4 + delta, 0.4, 0.4)
        return full_report(utils, specs, w).isl_tot

    assert bumped(0.2) / bumped(0.1) == pytest.approx(4.0, rel=1e-9)


def test_full_report_matches_brute_force_on_random_clusters():
    rng = default_rng(20240517)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        specs = [
            ServerSpec(
                id=i,
                cpu_count=int(rng.integers(1, 17)),
                ram_capacity=float(rng.uniform(4.0, 64.0)),
                net_capacity=float(rng.uniform(2.0, 32.0)),
            )
            for i in range(n)
        ]
        utils = [_u(*rng.random(3)) for _ in range(n)]
        raw = rng.random(3)
        w = WeightTriple(*(raw / raw.sum()))
        r = full_report(utils, specs, w)
        b = _brute_report(utils, specs, w)
        assert abs(r.isl_cpu - b["isl_cpu"]) <= 1e-12
        assert abs(r.isl_ram - b["isl_ram"]) <= 1e-12
        assert abs(r.isl_net - b["isl_net"]) <= 1e-12
        assert abs(r.ibl_tot - b["ibl_tot"]) <= 1e-12
        assert abs(r.isl_tot - b["isl_tot"]) <= 1e-12
        assert abs(r.efficiency - b["efficiency"]) <= 1e-12
        assert np.max(np.abs(np.array(r.sil) - b["sil"])) <= 1e-12


# --------------------------------------------------------------- properties


def test_translation_leaves_isl_cpu_unchanged():
    # the weighted mean shifts by the same delta, so deviations cancel,
    # with equal cpu counts and with unequal ones alike
    rng = default_rng(7)
    for counts in ((4, 4, 4, 4), (1, 2, 4, 8)):
        specs = [_spec(i, cpu=c) for i, c in enumerate(counts)]
        cpu = rng.uniform(0.2, 0.6, size=4)
        utils = [_u(float(v), 0.5, 0.5) for v in cpu]
        shifted = [_u(float(v) + 0.2, 0.5, 0.5) for v in cpu]
        w = default_weights()
        a = full_report(utils, specs, w).isl_cpu
        b = full_report(shifted, specs, w).isl_cpu
        assert abs(a - b) <= 1e-12


def test_scaling_multiplies_imbalance_by_alpha_squared():
    rng = default_rng(11)
    specs = [_spec(i, cpu=int(c)) for i, c in enumerate((2, 3, 5))]
    utils = [_u(*rng.random(3)) for _ in range(3)]
    w = default_weights()
    base = full_report(utils, specs, w)
    for alpha in (0.5, 0.25, 1.0):
        scaled = [_u(u.cpu * alpha, u.ram * alpha, u.net * alpha) for u in utils]
        r = full_report(scaled, specs, w)
        assert r.isl_cpu == pytest.approx(alpha**2 * base.isl_cpu, rel=1e-9, abs=1e-15)
        assert r.ibl_tot == pytest.approx(alpha**2 * base.ibl_tot, rel=1e-9, abs=1e-15)
        for s, s0 in zip(r.sil, base.sil):
            assert s == pytest.approx(alpha**2 * s0, rel=1e-9, abs=1e-15)


def test_permutation_invariance():
    rng = default_rng(13)
    specs = [_spec(i, cpu=int(c), ram=10.0 * c, net=5.0 * c) for i, c in enumerate((1, 2, 4, 8))]
    utils = [_u(*rng.random(3)) for _ in range(4)]
    w = default_weights()
    base = full_report(utils, specs, w)
    perm = [2, 0, 3, 1]
    r = full_report([utils[j] for j in perm], [specs[j] for j in perm], w)
    assert r.isl_tot == pytest.approx(base.isl_tot, abs=1e-12)
    assert r.ibl_tot == pytest.approx(base.ibl_tot, abs=1e-12)
    assert r.efficiency == pytest.approx(base.efficiency, abs=1e-12)
    for j, pj in enumerate(perm):
        assert r.sil[j] == pytest.approx(base.sil[pj], abs=1e-12)


def test_all_outputs_non_negative():
    rng = default_rng(17)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        specs = [_spec(i, cpu=int(rng.integers(1, 9))) for i in range(n)]
        utils = [_u(*rng.random(3)) for _ in range(n)]
        raw = rng.random(3)
        r = full_report(utils, specs, WeightTriple(*(raw / raw.sum())))
        assert min(r.isl_cpu, r.isl_ram, r.isl_net, r.ibl_tot, r.isl_tot) >= 0.0
        assert min(r.sil) >= 0.0


# --------------------------------------------------------------- validation


def test_weight_triple_invariants():
    with pytest.raises(ConfigError):
        WeightTriple(0.5, 0.5, 0.5)
    with pytest.raises(ConfigError):
        WeightTriple(-0.1, 0.6, 0.5)
    w = WeightTriple(0.2, 0.3, 0.5)
    assert w.a + w.b + w.c == pytest.approx(1.0, abs=1e-9)


def test_utilization_and_spec_invariants():
    with pytest.raises(ConfigError):
        _u(1.01, 0.5, 0.5)
    with pytest.raises(ConfigError):
        _u(0.5, -0.01, 0.5)
    with pytest.raises(ConfigError):
        ServerSpec(id=0, cpu_count=0, ram_capacity=1.0, net_capacity=1.0)
    with pytest.raises(ConfigError):
        ServerSpec(id=0, cpu_count=1, ram_capacity=0.0, net_capacity=1.0)


def test_report_internal_consistency_enforced():
    with pytest.raises(ConfigError):
        ImbalanceReport(
            isl_cpu=0.1, isl_ram=0.0, isl_net=0.0, ibl_tot=0.2,
            sil=(0.0,), isl_tot=0.0, efficiency=0.5,
        )
    with pytest.raises(ConfigError):
        ImbalanceReport(
            isl_cpu=0.0, isl_ram=0.0, isl_net=0.0, ibl_tot=0.0,
            sil=(0.1, 0.3), isl_tot=0.1, efficiency=0.5,
        )


def test_full_report_rejects_duplicate_ids():
    utils = [_u(0.5, 0.5, 0.5), _u(0.5, 0.5, 0.5)]
    with pytest.raises(ConfigError):
        full_report(utils, [_spec(3), _spec(3)], default_weights())


# ---------------------------------------------------------------- csv shape


def test_report_csv_round_shape(tmp_path):
    specs = [_spec(0), _spec(1)]
    w = default_weights()
    reports = [
        full_report([_u(0.2, 0.3, 0.4), _u(0.6, 0.5, 0.4)], specs, w),
        full_report([_u(0.5, 0.5, 0.5), _u(0.5, 0.5, 0.5)], specs, w),
    ]
    path = tmp_path / "report.csv"
    write_report_csv(path, reports, window=64, summary="scenario=x H=0.7 dH=0.1 mean_isl_tot=0")
    lines = path.read_text().splitlines()
    assert lines[0] == "tick,isl_cpu,isl_ram,isl_net,ibl_tot,isl_tot,efficiency"
    assert lines[1].startswith("64,") and lines[2].startswith("128,")
    assert lines[-1].startswith("# scenario=x")
    # values survive the 12-digit format
    got = float(lines[1].split(",")[5])
    assert got == pytest.approx(reports[0].isl_tot, rel=1e-11)


def test_sil_csv_long_form(tmp_path):
    specs = [_spec(0), _spec(7)]
    w = default_weights()
    reports = [full_report([_u(0.2, 0.3, 0.4), _u(0.6, 0.5, 0.4)], specs, w)]
    path = tmp_path / "sil.csv"
    write_sil_csv(path, reports, window=32, server_ids=[0, 7])
    lines = path.read_text().splitlines()
    assert lines[0] == "tick,server_id,sil"
    assert len(lines) == 3
    assert lines[1].startswith("32,0,") and lines[2].startswith("32,7,")
    with pytest.raises(ConfigError):
        write_sil_csv(path, reports, window=32, server_ids=[0, 1, 2])
