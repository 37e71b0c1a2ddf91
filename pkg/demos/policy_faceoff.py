"""Dispatch policies head to head on one bursty scenario.

Same traffic, same demand draws, same mixed cluster; only the placement
rule changes. Deviation-aware placement should keep isl_tot below blind
rotation, with threshold migration in between.
"""

import numpy as np

from mfload import GeneratorKind, GeneratorMeta, Policy, PolicyKind, ScenarioConfig, run_scenario

meta = GeneratorMeta(
    kind=GeneratorKind.COMPOSITE, seed=7, depth=12, target_hurst=0.85, multiplier_spread=0.8
)

print(f"{'policy':>22} {'mean isl_tot':>13} {'mean efficiency':>16}")
for kind in (PolicyKind.ROUND_ROBIN, PolicyKind.LEAST_COMPOSITE,
             PolicyKind.THRESHOLD_MIGRATION, PolicyKind.LEAST_SIL):
    config = ScenarioConfig(
        traffic=meta,
        policy=Policy(kind=kind, migration_threshold=0.001),
        horizon=4096,
        window=64,
        seed=2,
        name=kind.value,
    )
    reports = run_scenario(config)
    isl = np.mean([r.isl_tot for r in reports])
    eff = np.mean([r.efficiency for r in reports])
    print(f"{kind.value:>22} {isl:13.5f} {eff:16.3f}")
