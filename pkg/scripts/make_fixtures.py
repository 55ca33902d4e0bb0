"""Write the hand-checked fixtures as OFF meshes and field CSVs.

    python3 scripts/make_fixtures.py [outdir]

Graph fixtures (no triangles) are written as 1-D value files that the CLI
reads with ``--values`` (add ``--cyclic`` for the cycle fixtures).
"""
import sys
from pathlib import Path

from morse_forge import fixtures
from morse_forge.io import write_field_csv, write_off, write_values_csv
from morse_forge.synth import mixture_field, two_bump_config


def main(outdir="fixtures"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    meshes = {
        "dented_cylinder": fixtures.dented_cylinder().field,
        "octahedron_spur": fixtures.octahedron_spur().field,
        "two_bump": mixture_field(two_bump_config()),
    }
    for name, f in meshes.items():
        write_off(out / f"{name}.off", f.complex)
        write_field_csv(out / f"{name}.csv", f)
    profiles = {
        "cycle_pair": fixtures.cycle_pair().field,
        "trapped_orbit": fixtures.trapped_orbit().field,
        "bump_on_ramp": fixtures.bump_on_ramp(),
    }
    for name, f in profiles.items():
        write_values_csv(out / f"{name}_values.csv", f.values)
    for path in sorted(out.iterdir()):
        print(path)


if __name__ == "__main__":
    main(*sys.argv[1:])
