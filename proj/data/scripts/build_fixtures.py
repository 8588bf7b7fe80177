#!/usr/bin/env python3
"""Rebuild the vendored fixtures under data/.

Inputs (not vendored, fetched once by hand from PyPI wheels):
  --guerry / --arbuthnot : HistData tables as shipped in the `rdatasets` wheel
                           (rdatasets/_data/HistData/*.pkl.compress, xz pickles)
  --svg                  : pygal_maps_fr/fr.departments.svg (modern departements)

The 1830 base map is derived from the modern departements:
  Seine (75)          = 75 + 92 + 93 + 94
  Seine-et-Oise (78)  = 78 + 91 + 95
  Haut-Rhin (68)      = 68 + 90
  Corse (200)         = 2A + 2B
  06, 73, 74 dropped (not French in 1830)
"""
import argparse
import json
import re
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
from shapely.geometry import MultiPolygon, Polygon, mapping
from shapely.ops import unary_union
from svgelements import Path

MERGES = {"75": ["75", "92", "93", "94"], "78": ["78", "91", "95"],
          "68": ["68", "90"], "200": ["2A", "2B"]}
DROPPED = {"06", "73", "74"}


def read_table(path):
    return pd.read_pickle(path, compression="xz")


def write_guerry(src, out):
    d = read_table(src)
    d["Region"] = d["Region"].fillna("X")
    d = d.drop(columns=["rownames", "MainCity"]).rename(columns={"Department": "name"})
    d = d.sort_values("dept")
    d.to_csv(out, index=False, lineterminator="\n")
    return d


def write_arbuthnot(src, out):
    a = read_table(src)[["Year", "Males", "Females"]]
    a.to_csv(out, index=False, lineterminator="\n")


def department_shapes(svg_path):
    root = ET.parse(svg_path).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    shapes = {}
    for group in root.iter(ns + "g"):
        m = re.match(r"z(\w+) departement", group.get("class", ""))
        if not m:
            continue
        code = m.group(1)
        # first occurrence only: later copies are the Paris inset and overseas insets
        if code in shapes or len(code) > 2:
            continue
        rings = []
        for el in group.iter(ns + "path"):
            for sub in Path(el.get("d")).as_subpaths():
                seg = Path(sub)
                pts = [(float(pt[0]), -float(pt[1])) for pt in seg.npoint(np.linspace(0, 1, 401))]
                if len(pts) >= 4:
                    rings.append(Polygon(pts).buffer(0))
        shapes[code] = unary_union(rings)
    return shapes


def to_1830(shapes):
    out = {}
    consumed = set(DROPPED)
    for code, parts in MERGES.items():
        geom = unary_union([shapes[p].buffer(0.6) for p in parts]).buffer(-0.6)
        out[int(code)] = geom
        consumed.update(parts)
    for code, geom in shapes.items():
        if code not in consumed:
            out[int(code)] = geom
    return out


def clean(geom, min_area=4.0):
    polys = [geom] if isinstance(geom, Polygon) else list(geom.geoms)
    polys = [Polygon(p.exterior).simplify(0.25) for p in polys if p.area >= min_area]
    polys.sort(key=lambda p: -p.area)
    return polys[0] if len(polys) == 1 else MultiPolygon(polys)


def rounded(coords):
    return [[round(x, 2), round(y, 2)] for x, y in coords]


def write_basemap(shapes, names, out):
    feats = []
    for code in sorted(shapes):
        geom = clean(shapes[code])
        polys = [geom] if isinstance(geom, Polygon) else list(geom.geoms)
        rings = [[rounded(p.exterior.coords)] for p in polys]
        if len(rings) == 1:
            geometry = {"type": "Polygon", "coordinates": rings[0]}
        else:
            geometry = {"type": "MultiPolygon", "coordinates": rings}
        feats.append({"type": "Feature",
                      "properties": {"dept": code, "name": names.get(code, "")},
                      "geometry": geometry})
    with open(out, "w") as f:
        json.dump({"type": "FeatureCollection", "features": feats}, f, separators=(",", ":"))
        f.write("\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--guerry", required=True)
    ap.add_argument("--arbuthnot", required=True)
    ap.add_argument("--svg", required=True)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    d = write_guerry(args.guerry, f"{args.out}/guerry.csv")
    write_arbuthnot(args.arbuthnot, f"{args.out}/arbuthnot.csv")
    names = dict(zip(d["dept"], d["name"]))
    shapes = to_1830(department_shapes(args.svg))
    assert sorted(shapes) == sorted(names), set(shapes) ^ set(names)
    write_basemap(shapes, names, f"{args.out}/france1830.geojson")


if __name__ == "__main__":
    main()
