#!/usr/bin/env python3
"""Convert annotated Amazon session-bundle tables into the dicl dataset format.

Inputs are three delimited text files:

  items     one row per product: item id and title
  sessions  one row per session: session id, user id, timestamp and the
            ordered item ids of the session
  bundles   one row per annotated bundle: session id, the item ids of the
            bundle and its intent

Column names and the separator used inside list cells are configurable, so
the script can follow whatever layout a given release uses. Output is one
JSON record per line, items first, then sessions in input order.
"""

import argparse
import csv
import json
import sys
from collections import OrderedDict, defaultdict
from datetime import datetime, timezone


def read_rows(path, delimiter):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f, delimiter=delimiter))


def split_list(cell, sep):
    return [x.strip() for x in cell.split(sep) if x.strip()]


def parse_timestamp(value):
    value = value.strip()
    try:
        return int(float(value))
    except ValueError:
        pass
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def column(row, name, path):
    if name not in row:
        sys.exit(f"{path}: missing column '{name}' (have: {', '.join(row)})")
    return row[name]


def convert(args):
    items = OrderedDict()
    for row in read_rows(args.items, args.delimiter):
        item_id = column(row, args.item_id_col, args.items).strip()
        title = column(row, args.title_col, args.items).strip()
        if item_id and title:
            items.setdefault(item_id, title)

    bundles = defaultdict(list)
    dropped = 0
    for row in read_rows(args.bundles, args.delimiter):
        sid = column(row, args.session_id_col, args.bundles).strip()
        members = list(OrderedDict.fromkeys(split_list(column(row, args.bundle_items_col, args.bundles), args.list_sep)))
        intent = column(row, args.intent_col, args.bundles).strip()
        if len(members) < 2 or not intent:
            dropped += 1
            continue
        bundles[sid].append({"items": members, "intent": intent})

    out = open(args.output, "w", encoding="utf-8") if args.output != "-" else sys.stdout
    referenced = set()
    sessions = []
    for row in read_rows(args.sessions, args.delimiter):
        sid = column(row, args.session_id_col, args.sessions).strip()
        seq = split_list(column(row, args.session_items_col, args.sessions), args.list_sep)
        seq = [i for i in seq if i in items]
        if not seq:
            continue
        record = {
            "type": "session",
            "session_id": sid,
            "user_id": column(row, args.user_id_col, args.sessions).strip(),
            "timestamp": parse_timestamp(column(row, args.timestamp_col, args.sessions)),
            "items": seq,
        }
        kept = [b for b in bundles.get(sid, []) if set(b["items"]) <= set(seq)]
        dropped += len(bundles.get(sid, [])) - len(kept)
        if kept:
            record["bundles"] = kept
        referenced.update(seq)
        sessions.append(record)

    for item_id, title in items.items():
        if item_id in referenced:
            out.write(json.dumps({"type": "item", "item_id": item_id, "title": title}, ensure_ascii=False) + "\n")
    for record in sessions:
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
    if out is not sys.stdout:
        out.close()
    print(f"{len(sessions)} sessions, {len(referenced)} items, "
          f"{sum(len(s.get('bundles', [])) for s in sessions)} bundles, {dropped} bundles dropped",
          file=sys.stderr)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--items", required=True)
    p.add_argument("--sessions", required=True)
    p.add_argument("--bundles", required=True)
    p.add_argument("--output", required=True, help="output .jsonl path, or - for stdout")
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--list-sep", default=",", help="separator inside item-list cells")
    p.add_argument("--item-id-col", default="item_id")
    p.add_argument("--title-col", default="title")
    p.add_argument("--session-id-col", default="session_id")
    p.add_argument("--user-id-col", default="user_id")
    p.add_argument("--timestamp-col", default="timestamp")
    p.add_argument("--session-items-col", default="items")
    p.add_argument("--bundle-items-col", default="items")
    p.add_argument("--intent-col", default="intent")
    convert(p.parse_args())


if __name__ == "__main__":
    main()
