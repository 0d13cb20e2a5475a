"""Writes the synthetic 48-bank roster and adverse-style scenario.

The bank identifiers and countries follow the EBA 2018 stress-test sample;
every amount is random and carries no information about the real banks.
"""
import csv
import random

BANKS = [
    ("RBI", "AT"), ("EBS", "AT"), ("KBC", "BE"), ("Belfius", "BE"),
    ("DZ Bank", "DE"), ("LBBW", "DE"), ("DBK", "DE"), ("CBK", "DE"),
    ("NORD/LB", "DE"), ("BayernLB", "DE"), ("Helaba", "DE"), ("NRW", "DE"),
    ("Danske", "DK"), ("JYSK", "DK"), ("Nykredit", "DK"), ("SAN", "ES"),
    ("BBVA", "ES"), ("CABK", "ES"), ("SAB", "ES"), ("OP", "FI"),
    ("BNP", "FR"), ("ACA", "FR"), ("GLE", "FR"), ("GCM", "FR"),
    ("BPCE", "FR"), ("LABP", "FR"), ("BARC", "GB"), ("LLOY", "GB"),
    ("HSBC", "GB"), ("RBS", "GB"), ("OTP", "HU"), ("BIR", "IE"),
    ("AIB", "IE"), ("UNCRY", "IT"), ("ISP", "IT"), ("BPM", "IT"),
    ("UBI", "IT"), ("BNG", "NL"), ("ABN", "NL"), ("ING", "NL"),
    ("Rabobank", "NL"), ("DNB", "NO"), ("PKO", "PL"), ("PEO", "PL"),
    ("SEB", "SE"), ("Nordea", "SE"), ("SWDB", "SE"), ("SHB", "SE"),
]
EXTERNAL = [1100, 1200, 1300, 1400, 1500, 1700, 2200, 3000, 4110, 4120,
            4200, 4310, 4320, 4500, 4700, 5000, 6400, 6500, 6600, 6700]


def main():
    rng = random.Random(20180131)
    with open("roster48_synthetic.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["bank_id", "country", "total_assets", "equity", "c2100"]
                   + [f"c{c}" for c in EXTERNAL])
        for bank, country in BANKS:
            total = round(rng.lognormvariate(12.3, 0.9), 1)
            equity = round(total * rng.uniform(0.04, 0.09), 1)
            interbank = round(total * rng.uniform(0.02, 0.08), 1)
            weights = [rng.expovariate(1.0) * (0.2 if rng.random() < 0.3 else 1.0)
                       for _ in EXTERNAL]
            scale = (total - interbank) / sum(weights)
            external = [round(x * scale, 1) for x in weights]
            # exposures cover the balance sheet exactly, so baseline model
            # equity matches reported equity
            total = round(interbank + sum(external), 1)
            w.writerow([bank, country, total, equity, interbank] + external)
    with open("adverse_synthetic.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["asset_code", "factor"])
        for code in EXTERNAL:
            w.writerow([code, round(rng.uniform(0.955, 0.995), 4)])


if __name__ == "__main__":
    main()
