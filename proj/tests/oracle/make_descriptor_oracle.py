#!/usr/bin/env python3
"""Freeze reference descriptor values for a corpus sample into a TSV.

The reference toolkit (RDKit) is used only here, before the build, to produce
expected values; the C++ test suite reads the frozen file.
Columns: smiles, mw, hbd, hba, logp, crippen_types, tpsa, arom_rings, qed,
qed_hba, qed_hbd, qed_rotb, qed_arom, qed_alerts (ids, comma separated).
crippen_types lists, per heavy atom in input order, "<heavy type>/<H type or ->".
"""
import sys

from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import QED, Crippen, Descriptors, MolSurf
from rdkit.Chem import rdMolDescriptors as rd

RDLogger.DisableLog("rdApp.*")
corpus, out, stride = sys.argv[1], sys.argv[2], int(sys.argv[3])
alerts = QED.StructuralAlerts

# (logp, mr) pairs are unique per Crippen type, so contributions identify the type.
TYPE_BY_VALUE = {}
for line in open(RDConfig.RDDataDir + "/Crippen.txt"):
    parts = line.rstrip("\n").split("\t")
    if line.startswith("#") or len(parts) < 3 or not parts[0]:
        continue
    mr = float(parts[3]) if len(parts) > 3 and parts[3] else 0.0
    TYPE_BY_VALUE[(round(float(parts[2]), 5), round(mr, 5))] = parts[0]

lines = [l.strip() for l in open(corpus) if l.strip() and not l.startswith("#")]
with open(out, "w") as f:
    f.write("smiles\tmw\thbd\thba\tlogp\tcrippen_types\ttpsa\tarom_rings\tqed\t"
            "qed_hba\tqed_hbd\tqed_rotb\tqed_arom\tqed_alerts\n")
    for smi in lines[::stride]:
        m = Chem.MolFromSmiles(smi)
        mh = Chem.AddHs(m)
        labels = [TYPE_BY_VALUE[(round(lp, 5), round(mr, 5))]
                  for lp, mr in rd._CalcCrippenContribs(mh, force=True)]
        htype = {}
        for a in mh.GetAtoms():
            if a.GetAtomicNum() == 1 and a.GetIdx() >= m.GetNumAtoms():
                htype[a.GetNeighbors()[0].GetIdx()] = labels[a.GetIdx()]
        ct = ",".join(f"{labels[i]}/{htype.get(i, '-')}" for i in range(m.GetNumAtoms()))
        p = QED.properties(m)
        al = ",".join(str(i) for i, a in enumerate(alerts) if m.HasSubstructMatch(a))
        f.write(f"{smi}\t{Descriptors.MolWt(m):.6f}\t{rd.CalcNumLipinskiHBD(m)}\t{rd.CalcNumLipinskiHBA(m)}\t"
                f"{Crippen.MolLogP(m):.6f}\t{ct}\t{MolSurf.TPSA(m):.6f}\t{rd.CalcNumAromaticRings(m)}\t"
                f"{QED.qed(m):.6f}\t{p.HBA}\t{p.HBD}\t{p.ROTB}\t{p.AROM}\t{al}\n")
