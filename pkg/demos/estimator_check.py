"""Estimator sanity: recover known exponents from synthetic noise.

fGn is monofractal, so DFA should land near the target H and the MF-DFA
spectrum should be flat (delta_h near zero) for every H.
"""

from mfload import estimate_hurst_dfa, generate_fgn, mfdfa

LENGTH = 2**14

print(f"{'target H':>9} {'DFA':>7} {'h(2)':>7} {'delta_h':>8}")
for hurst in (0.5, 0.6, 0.7, 0.8, 0.9):
    series = generate_fgn(hurst=hurst, length=LENGTH, seed=1)
    est = estimate_hurst_dfa(series.values)
    spec = mfdfa(series.values)
    print(f"{hurst:9.1f} {est.hurst:7.3f} {spec.h_at(2.0):7.3f} {spec.delta_h:8.3f}")
