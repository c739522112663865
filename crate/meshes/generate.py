"""Regenerate the mesh corpus with the gmsh Python API.

Usage: python3 meshes/generate.py [outdir]

Every cell mesh is written as ASCII MSH 2.2 with
  surface physical tag 1  -> inclusion (or lumen) region
  surface physical tag 2  -> matrix (or solid) region
  line physical tags 11/12/13/14 -> bottom/right/top/left sides of [0,1]^2
Opposite sides of the cell meshes are made periodic so that boundary nodes
match one to one.
"""
import math
import os
import sys

import gmsh

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
EPS = 1e-9


def side_curves(side):
    """Boundary curves lying on one side of the unit square."""
    boxes = {
        "bottom": (-EPS, -EPS, -EPS, 1 + EPS, EPS, EPS),
        "right": (1 - EPS, -EPS, -EPS, 1 + EPS, 1 + EPS, EPS),
        "top": (-EPS, 1 - EPS, -EPS, 1 + EPS, 1 + EPS, EPS),
        "left": (-EPS, -EPS, -EPS, EPS, 1 + EPS, EPS),
    }
    return [t for (_, t) in gmsh.model.getEntitiesInBoundingBox(*boxes[side], dim=1)]


def make_periodic():
    occ = gmsh.model.occ
    for slave_side, master_side, (dx, dy) in (("right", "left", (1, 0)), ("top", "bottom", (0, 1))):
        for s in side_curves(slave_side):
            sb = gmsh.model.getBoundingBox(1, s)
            for m in side_curves(master_side):
                mb = gmsh.model.getBoundingBox(1, m)
                if all(abs(sb[i] - mb[i] - d) < 1e-7 for i, d in ((0, dx), (1, dy), (3, dx), (4, dy))):
                    affine = [1, 0, 0, dx, 0, 1, 0, dy, 0, 0, 1, 0, 0, 0, 0, 1]
                    gmsh.model.mesh.setPeriodic(1, [s], [m], affine)
                    break
            else:
                raise RuntimeError(f"no periodic partner for curve {s}")


def tag_sides():
    for tag, side in ((11, "bottom"), (12, "right"), (13, "top"), (14, "left")):
        gmsh.model.addPhysicalGroup(1, side_curves(side), tag)


def inside(surf_tag, test):
    x, y, _ = gmsh.model.occ.getCenterOfMass(2, surf_tag)
    return test(x, y)


def cell(name, inclusion_builder, is_inclusion, lc, periodic=True):
    gmsh.model.add(name)
    occ = gmsh.model.occ
    square = occ.addRectangle(0, 0, 0, 1, 1)
    incl = inclusion_builder(occ)
    _, children = occ.fragment([(2, square)], incl)
    occ.synchronize()
    surfaces = [t for (_, t) in gmsh.model.getEntities(2)]
    from_inclusion = {t for (d, t) in sum(children[1:], []) if d == 2}
    inc = [s for s in surfaces if s in from_inclusion]
    mat = [s for s in surfaces if s not in inc]
    assert all(inside(s, is_inclusion) for s in inc), name
    if inc:
        gmsh.model.addPhysicalGroup(2, inc, 1)
    gmsh.model.addPhysicalGroup(2, mat, 2)
    tag_sides()
    if periodic:
        make_periodic()
    gmsh.option.setNumber("Mesh.CharacteristicLengthMin", lc)
    gmsh.option.setNumber("Mesh.CharacteristicLengthMax", lc)
    gmsh.model.mesh.generate(2)
    path = os.path.join(OUT, name + ".msh")
    gmsh.write(path)
    h = max_diameter()
    gmsh.model.remove()
    print(f"{name}: lc={lc:.5f} h={h:.4e}")
    return h


def max_diameter():
    tags, coords, _ = gmsh.model.mesh.getNodes()
    pos = {int(t): (coords[3 * i], coords[3 * i + 1]) for i, t in enumerate(tags)}
    h = 0.0
    types, _, nodes = gmsh.model.mesh.getElements(2)
    for et, nl in zip(types, nodes):
        if et != 2:
            continue
        for k in range(0, len(nl), 3):
            p = [pos[int(n)] for n in nl[k:k + 3]]
            for a, b in ((0, 1), (1, 2), (2, 0)):
                h = max(h, math.dist(p[a], p[b]))
    return h


def tune(name, builder, test, target, periodic=True):
    """Bisect on the characteristic length until the max diameter hits target."""
    lo, hi = target / 3.0, target
    best = None
    for _ in range(14):
        lc = 0.5 * (lo + hi)
        gmsh.model.add("probe")
        occ = gmsh.model.occ
        sq = occ.addRectangle(0, 0, 0, 1, 1)
        incl = builder(occ)
        occ.fragment([(2, sq)], incl)
        occ.synchronize()
        if periodic:
            make_periodic()
        gmsh.option.setNumber("Mesh.CharacteristicLengthMin", lc)
        gmsh.option.setNumber("Mesh.CharacteristicLengthMax", lc)
        gmsh.model.mesh.generate(2)
        h = max_diameter()
        gmsh.model.remove()
        if best is None or abs(h - target) < abs(best[1] - target):
            best = (lc, h)
        if h > target:
            hi = lc
        else:
            lo = lc
        if abs(h - target) / target < 0.01:
            break
    return cell(name, builder, test, best[0], periodic)


def no_inclusion(occ):
    return []


def rect_inclusion(occ):
    return [(2, occ.addRectangle(3 / 8, 0, 0, 1 / 4, 1))]


def rect_inclusion_centreline(occ):
    p = occ.addPoint(0, 0.5, 0)
    q = occ.addPoint(1, 0.5, 0)
    return rect_inclusion(occ) + [(1, occ.addLine(p, q))]


def rect_test(x, y):
    return 3 / 8 < x < 5 / 8


R_CIRCLE = math.sqrt(1.0 / (4.0 * math.pi))


def circle_inclusion(occ):
    return [(2, occ.addDisk(0.5, 0.5, 0, R_CIRCLE, R_CIRCLE))]


def circle_test(x, y):
    return (x - 0.5) ** 2 + (y - 0.5) ** 2 < 1.0 / (4.0 * math.pi)


def l_inclusion(occ):
    a = occ.addRectangle(0.5, 0, 0, 0.25, 0.5)
    b = occ.addRectangle(0.25, 0.5, 0, 0.5, 0.25)
    out, _ = occ.fuse([(2, a)], [(2, b)])
    return out


def l_test(x, y):
    return (0.5 < x < 0.75 and y < 0.5) or (0.25 < x < 0.75 and 0.5 < y < 0.75)


def lumen_inclusion(occ):
    return [(2, occ.addRectangle(0.15, 0.25, 0, 0.7, 0.5))]


def lumen_test(x, y):
    return 0.15 < x < 0.85 and 0.25 < y < 0.75


def main():
    gmsh.initialize()
    gmsh.option.setNumber("General.Terminal", 0)
    gmsh.option.setNumber("Mesh.MshFileVersion", 2.2)
    gmsh.option.setNumber("Mesh.Algorithm", 6)
    gmsh.option.setNumber("Mesh.RandomSeed", 1)

    # convergence sequence on the plain unit square (no periodicity)
    for i, target in enumerate((2.6170e-1, 1.5176e-1, 8.4435e-2, 4.1624e-2, 2.1733e-2)):
        tune(f"square_h{i}", no_inclusion, lambda x, y: False, target, periodic=False)

    # layered-medium validation mesh, with mesh nodes on the line y = 1/2
    tune("rect_coarse", rect_inclusion_centreline, rect_test, 1.848e-1)

    # homogenisation meshes: default and one refinement
    for name, b, t in (
        ("rect", rect_inclusion, rect_test),
        ("circle", circle_inclusion, circle_test),
        ("lshape", l_inclusion, l_test),
        ("lumen", lumen_inclusion, lumen_test),
    ):
        cell(f"{name}_default", b, t, 1.0 / 24.0)
        cell(f"{name}_fine", b, t, 1.0 / 48.0)
    gmsh.finalize()


if __name__ == "__main__":
    main()
