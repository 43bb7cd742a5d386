#!/usr/bin/env python3
"""Convert a MULAN dataset (ARFF data plus XML label list) to sparse-mll.

    python3 scripts/arff_to_mll.py emotions.arff emotions.xml data/emotions.mll

Label attributes are the ones named in the XML file; every other attribute
must be numeric. Both dense and sparse ARFF data sections are accepted.
"""

import argparse
import re
import sys
import xml.etree.ElementTree as ET


def label_names(xml_path):
    root = ET.parse(xml_path).getroot()
    return {el.get("name") for el in root.iter() if el.tag.split("}")[-1] == "label"}


def split_attr(line):
    rest = line[len("@attribute"):].strip()
    if rest[0] in "'\"":
        q = rest[0]
        end = rest.index(q, 1)
        return rest[1:end], rest[end + 1:].strip()
    name, _, kind = rest.partition(" ")
    return name, kind.strip()


def parse_row(line, width):
    line = line.strip()
    if line.startswith("{"):
        row = {}
        body = line[1:line.rindex("}")].strip()
        for item in filter(None, (t.strip() for t in body.split(","))):
            idx, val = item.split(None, 1)
            row[int(idx)] = val.strip().strip("'\"")
        return row
    vals = [v.strip().strip("'\"") for v in line.split(",")]
    if len(vals) != width:
        raise ValueError(f"expected {width} values, got {len(vals)}")
    return dict(enumerate(vals))


def convert(arff_path, xml_path, out_path):
    labels = label_names(xml_path)
    attrs = []
    rows = []
    in_data = False
    with open(arff_path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if not in_data and low.startswith("@attribute"):
                attrs.append(split_attr(line))
            elif low.startswith("@data"):
                in_data = True
            elif in_data:
                rows.append(parse_row(line, len(attrs)))

    missing = labels - {name for name, _ in attrs}
    if missing:
        sys.exit(f"labels not found in ARFF: {sorted(missing)}")
    feature_cols, label_cols = [], []
    for i, (name, kind) in enumerate(attrs):
        if name in labels:
            label_cols.append(i)
        elif re.match(r"(numeric|real|integer)\b", kind.lower()):
            feature_cols.append(i)
        else:
            sys.exit(f"attribute {name!r} is neither a label nor numeric")

    fpos = {c: k + 1 for k, c in enumerate(feature_cols)}
    lpos = {c: k + 1 for k, c in enumerate(label_cols)}
    with open(out_path, "w", encoding="utf-8") as out:
        out.write(f"#mll n={len(rows)} m={len(feature_cols)} l={len(label_cols)}\n")
        for row in rows:
            rel = sorted(lpos[c] for c in label_cols if row.get(c, "0") == "1")
            feats = []
            for c in feature_cols:
                v = float(row.get(c, "0"))
                if v != 0.0:
                    feats.append(f"{fpos[c]}:{v!r}")
            out.write(",".join(map(str, rel)) + "|" + " ".join(feats) + "\n")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("arff")
    p.add_argument("xml")
    p.add_argument("out")
    a = p.parse_args()
    convert(a.arff, a.xml, a.out)


if __name__ == "__main__":
    main()
