"""Builds a bank roster (and optionally a shock scenario) from EBA
transparency-exercise exports.

Input is the long-format CSV the EBA publishes: one row per bank, item,
exposure class and breakdown, with at least the columns ``LEI_Code``,
``Item``, ``Exposure`` and ``Amount``.  Extra breakdown columns (period,
portfolio, country of counterparty, ...) are narrowed with ``--where``.

Total assets and equity are not part of the credit-risk tables; they come
from a separate bank map with columns ``lei,bank_id,country,total_assets,
equity``.

Example:

    python eba_import.py --exposures tr_cre.csv --banks bank_map.csv \\
        --where Period=201712 --out banks.csv \\
        --adverse tr_adverse.csv --adverse-where Period=202012 \\
        --scenario-out adverse.csv
"""
import argparse
import csv
import sys
from collections import defaultdict

CREDIT = ("183203", "183303")
NPE = ("183904", "183905")

# exposure code -> item pair listed for it in the EBA reference table
TABLE = {
    1100: CREDIT, 1200: CREDIT, 1300: CREDIT, 1400: CREDIT, 1500: CREDIT,
    1700: NPE, 2100: NPE, 2200: NPE,
    3000: CREDIT, 4110: CREDIT, 4120: CREDIT, 4200: CREDIT, 4310: CREDIT,
    4320: CREDIT, 4500: CREDIT,
    4700: NPE,
    5000: CREDIT, 6400: CREDIT, 6500: CREDIT, 6600: CREDIT, 6700: CREDIT,
}
EXTERNAL = [c for c in TABLE if c != 2100]


def item_map(choice):
    if choice == "table":
        return dict(TABLE)
    pair = CREDIT if choice == "credit" else NPE
    return {code: pair for code in TABLE}


def parse_filters(pairs):
    filters = {}
    for p in pairs:
        key, sep, value = p.partition("=")
        if not sep:
            sys.exit(f"filter {p!r} is not COLUMN=VALUE")
        filters[key] = value
    return filters


def aggregate(path, items, filters):
    """Sums Amount per (LEI, exposure code) over the selected items."""
    totals = defaultdict(float)
    with open(path, newline="", encoding="utf-8-sig") as f:
        for row in csv.DictReader(f):
            if any(row.get(k) != v for k, v in filters.items()):
                continue
            try:
                code = int(row["Exposure"])
            except ValueError:
                continue
            if code not in items or row["Item"] not in items[code]:
                continue
            amount = row["Amount"].strip()
            if amount in ("", "NA", "n.a."):
                continue
            totals[(row["LEI_Code"], code)] += float(amount)
    return totals


def read_bank_map(path):
    with open(path, newline="", encoding="utf-8-sig") as f:
        return list(csv.DictReader(f))


def write_roster(path, banks, totals):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["bank_id", "country", "total_assets", "equity", "c2100"]
                   + [f"c{c}" for c in EXTERNAL])
        for b in banks:
            lei = b["lei"]
            w.writerow([b["bank_id"], b["country"], b["total_assets"], b["equity"],
                        round(totals.get((lei, 2100), 0.0), 6)]
                       + [round(totals.get((lei, c), 0.0), 6) for c in EXTERNAL])


def write_scenario(path, banks, base, adverse):
    leis = {b["lei"] for b in banks}
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["asset_code", "factor"])
        for code in EXTERNAL:
            before = sum(v for (lei, c), v in base.items() if c == code and lei in leis)
            after = sum(v for (lei, c), v in adverse.items() if c == code and lei in leis)
            factor = after / before if before > 0 else 1.0
            w.writerow([code, round(min(factor, 1.0), 6)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--exposures", required=True, help="baseline long-format export")
    ap.add_argument("--banks", required=True, help="lei,bank_id,country,total_assets,equity")
    ap.add_argument("--items", choices=["table", "credit", "npe"], default="table",
                    help="table: item pair listed per class (default); "
                         "credit: 183203/183303 for every class; "
                         "npe: 183904/183905 for every class")
    ap.add_argument("--where", action="append", default=[], metavar="COL=VALUE")
    ap.add_argument("--out", required=True)
    ap.add_argument("--adverse", help="restated long-format export under the scenario")
    ap.add_argument("--adverse-where", action="append", default=[], metavar="COL=VALUE")
    ap.add_argument("--scenario-out")
    args = ap.parse_args()

    items = item_map(args.items)
    banks = read_bank_map(args.banks)
    base = aggregate(args.exposures, items, parse_filters(args.where))
    missing = [b["bank_id"] for b in banks if not any(k[0] == b["lei"] for k in base)]
    if missing:
        print(f"warning: no exposures found for {', '.join(missing)}", file=sys.stderr)
    write_roster(args.out, banks, base)

    if args.adverse:
        if not args.scenario_out:
            sys.exit("--adverse needs --scenario-out")
        adverse = aggregate(args.adverse, items, parse_filters(args.adverse_where))
        write_scenario(args.scenario_out, banks, base, adverse)


if __name__ == "__main__":
    main()
