#!/usr/bin/env python3
"""Regenerates the CSV fixtures in this directory (deterministic)."""
import datetime as dt
import random

rng = random.Random(20120714)
T0 = dt.datetime(2012, 7, 1, tzinfo=dt.timezone.utc)


def phone(i):
    return "39333%07d" % (1000000 + i * 7919 % 9000000)


def stamp(sec):
    return (T0 + dt.timedelta(seconds=sec)).strftime("%Y-%m-%dT%H:%M:%SZ")


def clan_calls(n_subs, n_calls, clans, cells):
    subs = [phone(i) for i in range(n_subs)]
    groups = [subs[k::clans] for k in range(clans)]
    calls = []
    # a spanning chain inside each clan plus one bridge between clans keeps it connected
    for g in groups:
        for a, b in zip(g, g[1:]):
            calls.append((a, b))
    for g, h in zip(groups, groups[1:]):
        calls.append((g[0], h[0]))
    while len(calls) < n_calls:
        g = rng.choice(groups)
        if rng.random() < 0.08:
            a, b = rng.choice(subs), rng.choice(subs)
        else:
            a, b = rng.choice(g), rng.choice(g)
        if a != b:
            calls.append((a, b))
    rng.shuffle(calls)
    home = {s: rng.choice(cells) for s in subs}
    rows = []
    t = 0
    for a, b in calls:
        t += rng.randint(30, 5400)
        cell = home[a] if rng.random() < 0.7 else rng.choice(cells)
        callee_cell = rng.choice(cells) if rng.random() < 0.5 else ""
        rows.append((a, b, stamp(t), rng.randint(0, 900), cell, callee_cell))
    return subs, rows


def write_cdr(path, rows):
    with open(path, "w", newline="\n") as f:
        f.write("caller,callee,start,duration_s,cell_id,callee_cell_id\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


cells = []
with open("bts.csv", "w") as f:
    f.write("cell_id,lat,lon,azimuth_deg,beamwidth_deg,range_m\n")
    for i in range(24):
        cid = "CELL%04d" % (i + 1)
        cells.append(cid)
        lat = 38.10 + rng.uniform(0, 0.15)
        lon = 15.50 + rng.uniform(0, 0.15)
        f.write("%s,%.5f,%.5f,%d,%d,%d\n" % (cid, lat, lon, rng.choice([0, 120, 240]),
                                             rng.choice([60, 90, 120]), rng.randint(800, 4000)))

subs75, rows75 = clan_calls(75, 420, 4, cells)
write_cdr("cdr_75.csv", rows75)

# two of the 1k records point at a cell missing from the registry
subs1k, rows1k = clan_calls(120, 1000, 6, cells)
rows1k[17] = rows1k[17][:4] + ("CELL9999",) + rows1k[17][5:]
rows1k[503] = rows1k[503][:4] + ("CELL9999",) + rows1k[503][5:]
write_cdr("cdr_1k.csv", rows1k)

crimes = ["drug trafficking", "extortion", "money laundering"]
with open("annotations.csv", "w") as f:
    f.write("subscriber_id,label,suspect,crime_type,address,photo_ref\n")
    for i, s in enumerate(subs1k):
        if i % 3 == 2:
            continue
        suspect = "true" if i % 4 == 0 else "false"
        crime = crimes[i % len(crimes)] if i % 5 != 0 else ""
        addr = "Via Garibaldi %d" % (i + 1) if i % 2 == 0 else ""
        photo = "photos/%s.jpg" % s if i % 6 == 0 else ""
        f.write("%s,Subject %d,%s,%s,%s,%s\n" % (s, i, suspect, crime, addr, photo))
