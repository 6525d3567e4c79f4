#!/usr/bin/env python3
"""Export the published parameter tables into data/params/*.tsv.

Crippen atom types (Wildman & Crippen 1999), QED desirability parameters,
acceptor and structural-alert patterns (Bickerton et al. 2012), element
standard atomic weights and isotope masses. Run once; the outputs are
versioned in the repo and checksummed in data/params/SHA256SUMS.
"""
import hashlib
import os
import sys

from rdkit import Chem, RDConfig
from rdkit.Chem import QED

out = sys.argv[1]


def write(name, header, rows):
    with open(os.path.join(out, name), "w") as f:
        f.write("\t".join(header) + "\n")
        for r in rows:
            f.write("\t".join(str(x) for x in r) + "\n")


# The toolkit's compiled-in parameters exclude C/N/O by atomic number in the
# H2 rows; the shipped text file writes aliphatic symbols, which would wrongly
# let hydrogens on aromatic n claim H2.
PATTERN_FIXES = {
    "[#1]O[!C;!N;!O;!S]": "[#1]O[!#6;!#7;!#8;!#16]",
    "[#1][!C;!N;!O]": "[#1][!#6;!#7;!#8]",
}

rows = []
with open(os.path.join(RDConfig.RDDataDir, "Crippen.txt")) as f:
    for line in f:
        if line.startswith("#") or not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        rows.append((parts[0], PATTERN_FIXES.get(parts[1], parts[1]), parts[2]))
write("crippen_v1.tsv", ["type", "pattern", "logp"], rows)

names = ["MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS"]
rows = []
for i, n in enumerate(names):
    p = QED.adsParameters[n]
    rows.append((n, repr(p.A), repr(p.B), repr(p.C), repr(p.D), repr(p.E), repr(p.F), repr(p.DMAX),
                 repr(QED.WEIGHT_MEAN[i])))
write("qed_ads_v1.tsv", ["property", "A", "B", "C", "D", "E", "F", "DMAX", "weight"], rows)
write("qed_acceptors_v1.tsv", ["pattern"], [(s,) for s in QED.AcceptorSmarts])
write("qed_alerts_v1.tsv", ["id", "pattern"], [(i, s) for i, s in enumerate(QED.StructuralAlertSmarts)])

pt = Chem.GetPeriodicTable()
write("elements_v1.tsv", ["z", "symbol", "mass"],
      [(z, pt.GetElementSymbol(z), repr(pt.GetAtomicWeight(z))) for z in range(1, 119)])
rows = []
for z in range(1, 87):
    sym = pt.GetElementSymbol(z)
    base = int(round(pt.GetAtomicWeight(z)))
    for a in range(max(1, base - 12), base + 13):
        m = pt.GetMassForIsotope(z, a)
        if m > 0 and abs(m - a) < 0.5:
            rows.append((z, a, repr(m)))
write("isotopes_v1.tsv", ["z", "mass_number", "mass"], rows)

with open(os.path.join(out, "SHA256SUMS"), "w") as f:
    for name in sorted(os.listdir(out)):
        if name.endswith(".tsv"):
            h = hashlib.sha256(open(os.path.join(out, name), "rb").read()).hexdigest()
            f.write(f"{h}  {name}\n")
