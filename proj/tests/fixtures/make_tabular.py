#!/usr/bin/env python3
"""Regenerates tabular200.csv, tabular200.schema and tabular200.manifest."""

import random

ROWS = 200
ANOMALIES = 20

rng = random.Random(20240611)
rows = []
for i in range(ROWS):
    anomalous = i < ANOMALIES
    if anomalous:
        duration = rng.gauss(30.0, 5.0)
        src_bytes = rng.gauss(5000.0, 500.0)
        protocol = rng.choice(["udp", "icmp"])
        flag = rng.choice(["REJ", "SF"])
    else:
        duration = rng.gauss(10.0, 2.0)
        src_bytes = rng.gauss(500.0, 50.0)
        protocol = rng.choice(["tcp", "tcp", "tcp", "udp"])
        flag = "SF" if rng.random() < 0.9 else "REJ"
    rows.append((f"{duration:.4f}", f"{src_bytes:.3f}", protocol, flag, "attack" if anomalous else "normal"))
rng.shuffle(rows)

with open("tabular200.csv", "w") as f:
    f.write("duration,protocol,src_bytes,flag,class\n")
    for d, b, p, fl, c in rows:
        f.write(f"{d},{p},{b},{fl},{c}\n")

with open("tabular200.schema", "w") as f:
    f.write("# synthetic connection records\n")
    f.write("label = class\nnormal = normal\nanomaly = attack\n")
    f.write("duration = continuous\nsrc_bytes = continuous\n")
    f.write("protocol = categorical:tcp,udp,icmp\nflag = categorical:SF,REJ\n")

with open("tabular200.manifest", "w") as f:
    f.write(f"rows = {ROWS}\n")
    f.write("raw_columns = 5\n")
    f.write("feature_columns = 7\n")
    f.write(f"anomalies = {ANOMALIES}\n")
    f.write("feature_names = duration,src_bytes,protocol=tcp,protocol=udp,protocol=icmp,flag=SF,flag=REJ\n")
