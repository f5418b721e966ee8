#!/usr/bin/env python3
"""Smoke test for the tbgroup_py extension module.

Builds the cdylib if necessary, loads it, and checks the headline facts:
S-box profiles, layer properness, and the theorem-engine verdicts with a
small direct group verification.
"""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def locate_module() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / "libtbgroup_py.so" for profile in ("release", "debug")
    ]
    existing = [c for c in candidates if c.exists()]
    if not existing:
        subprocess.run(
            ["cargo", "build", "-p", "tbgroup-py", "--release"], cwd=ROOT, check=True
        )
        existing = [candidates[0]]
    return max(existing, key=lambda c: c.stat().st_mtime)


def main() -> None:
    so = locate_module()
    tmp = tempfile.mkdtemp(prefix="tbgroup_py_")
    shutil.copy(so, pathlib.Path(tmp) / "tbgroup_py.so")
    sys.path.insert(0, tmp)
    import tbgroup_py as tb

    # PRESENT S-box component facts.
    present = tb.present_sbox()
    assert present.m == 4
    assert present.delta() == 4
    assert present.is_weakly_uniform(4)
    assert not present.is_weakly_uniform(2)
    assert present.is_strongly_anti_invariant(1)
    assert present.nonlinearity() == 4
    ac, witness = present.is_anti_crooked()
    assert not ac and witness == 1
    assert present.conjugate_translation_condition()
    assert set(present.anf_degrees()) == {2, 3}

    # Round-trip through the constructor and the hex shorthand.
    rebuilt = tb.Sbox(present.table())
    assert rebuilt.delta() == 4
    assert tb.Sbox.from_hex("C56B90AD3EF84712").table() == present.table()

    # The PRINTcipher S-box is APN.
    assert tb.printcipher_sbox().delta() == 2

    # Mixing layers: PRESENT is proper but maps a wall onto a wall;
    # RECTANGLE and PRINTcipher are strongly proper.
    proper, _ = tb.present_layer().is_proper(4, 16)
    strongly, pair = tb.present_layer().is_strongly_proper(4, 16)
    assert proper and not strongly
    assert pair == ([0, 1, 2, 3], [0, 4, 8, 12])
    assert tb.rectangle_layer().is_strongly_proper(4, 16)[0]
    assert tb.printcipher_layer().is_strongly_proper(3, 16)[0]

    # Theorem engine on RECTANGLE: the alternating conclusion, plus a
    # reduced two-brick group check confirming it directly (degree 256).
    report = json.loads(
        tb.analyze_cipher(
            4, 16, [tb.rectangle_sbox()], tb.rectangle_layer(), desk_check_n=2, seed=9
        )
    )
    assert report["verdict"]["layer_strongly_proper"] is True
    assert report["verdict"]["primitivity"]["status"] == "proven_primitive"
    assert report["verdict"]["group_identity"]["status"] == "proven_alt"
    assert report["desk_check"]["classification"] == "giant_alt"
    half_256_factorial = report["desk_check"]["order"]
    assert half_256_factorial.startswith("4289088876714213270595411358406163125788907601397428")

    # PRESENT: primitive by the theorem route, but the layer is not strongly
    # proper, so only the affine case is excluded symbolically.
    report = json.loads(
        tb.analyze_cipher(4, 16, [tb.present_sbox()], tb.present_layer())
    )
    assert report["verdict"]["primitivity"]["status"] == "proven_primitive"
    assert report["verdict"]["group_identity"]["status"] == "not_affine_only"

    # The rotation example: swapping two bricks is proper but not strongly
    # proper; the reduced group is a wreath product in its product action.
    report = json.loads(
        tb.analyze_cipher(
            4,
            2,
            [tb.inversion_sbox()],
            tb.block_rotation_layer(4, 2),
            desk_check_n=2,
            seed=1,
        )
    )
    assert report["verdict"]["primitivity"]["status"] == "proven_primitive"

    print("smoke test passed")


if __name__ == "__main__":
    main()
