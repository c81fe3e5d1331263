"""
Feeding externally built ROMs through the command line
=======================================================

ROMs produced by another tool are listed in a manifest, chained into a
repository by matching, then evaluated. Everything goes through
``polematch.cli.main``, exactly as the ``polematch`` command would.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from polematch import StateSpaceROM
from polematch.cli import main

work = Path(tempfile.mkdtemp())
roms = work / "roms"
roms.mkdir()


def damped_pair(p):
    # a shifting resonance plus a fixed real mode, as a 3-state system
    a, b = -1.0 - 0.2 * p, 8.0 + p
    A = [[a, b, 0.0], [-b, a, 0.0], [0.0, 0.0, -3.0]]
    return StateSpaceROM(A, [1.0, 0.0, 1.0], [1.0, 0.5, 2.0])


manifest = []
for k, p in enumerate(np.linspace(0.0, 2.0, 5)):
    name = f"rom_{k}.json"
    (roms / name).write_text(json.dumps(damped_pair(p).to_dict()))
    manifest.append({"param": float(p), "file": name})
(roms / "manifest.json").write_text(json.dumps({"roms": manifest}))

out = work / "out"
main(["build", "--model", "rom-directory", "--rom-dir", str(roms), "--out", str(out),
      "--p-lower", "0", "--p-upper", "2"])
print((out / "build.log").read_text())

# evaluate the interpolated pROM between two stored ROMs
main(["eval", str(out / "repository.json"), "--p", "0.75", "--omega", "1,8.75,20"])

# match two ROM files directly
main(["match", str(roms / "rom_0.json"), str(roms / "rom_4.json")])
