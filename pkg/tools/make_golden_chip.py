"""Regenerate tests/data/golden_chip_measurements.csv.

One simulated 20 x 20 mm chip (10 x 10 dies, three designs) with a few
planted defects: two opens, one short and one gross resistance outlier.
The committed file is frozen; rerun only to change the fixture on purpose.
"""

import sys
from pathlib import Path

from jjfab.analysis import MeasurementRecord, export_measurements
from jjfab.geometry import WaferLayout
from jjfab.variability import GrowthSettings, ProcessScenario, sample_ensemble

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden_chip_measurements.csv"
DESIGNS = ((150.0, 200.0), (150.0, 600.0), (100.0, 100.0))
PLANTED = {(0, 3, 4): 2.0e9, (0, 7, 1): 5.0e7, (2, 5, 5): 12.0, (1, 2, 8): None}


def build():
    sc = ProcessScenario(
        wafer=WaferLayout(die_pitch_mm=2.0, grid_dims=(10, 10)),
        designs=DESIGNS,
        sample_count=100,
        rng_seed=2023,
        growth=GrowthSettings(rms_width_sites=256, seeds=3),
    )
    ens = sample_ensemble(sc)
    recs = []
    for di, idx, x, y, rn in zip(ens.design, ens.index, ens.x_mm, ens.y_mm, ens.rn_ohm):
        d = DESIGNS[di]
        row, col = divmod(int(idx) % 100, 10)
        key = (int(di), row, col)
        rn = round(float(rn), 1)
        if key in PLANTED:
            rn = PLANTED[key] if PLANTED[key] is not None else round(3.0 * rn, 1)
        recs.append(MeasurementRecord("golden", row, col, round(float(x), 3), round(float(y), 3),
                                      d[0], d[1], rn, "ok"))
    return export_measurements(recs)


if __name__ == "__main__":
    text = build()
    if "--check" in sys.argv:
        sys.exit(0 if OUT.read_text() == text else 1)
    OUT.write_text(text)
    print(f"wrote {OUT}")
