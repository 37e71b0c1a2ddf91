"""How the multiplier spread widens a cascade's scaling spectrum.

Generates dyadic cascades at increasing spread, measures h(2) and the
spectrum width delta_h, and prints the trend. Wider multipliers give
burstier series; the width is the knob the calibrator turns.
"""

from mfload import generate_cascade, measure_scaling

DEPTH = 14
SEED = 3

print(f"cascade depth {DEPTH} ({2**DEPTH} ticks), seed {SEED}")
print(f"{'spread':>8} {'h(2)':>8} {'delta_h':>8}")
for spread in (0.1, 0.2, 0.4, 0.8, 1.6):
    series = generate_cascade(depth=DEPTH, multiplier_spread=spread, seed=SEED)
    h, dh = measure_scaling(series)
    print(f"{spread:8.2f} {h:8.3f} {dh:8.3f}")
