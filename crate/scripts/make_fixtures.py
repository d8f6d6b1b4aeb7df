"""Regenerate the reference FCIDUMP fixtures with PySCF.

Writes into crates/core/tests/data/:
  h2_r1.4_mo.fcidump      H2 / STO-3G at 1.4 bohr, canonical RHF MO basis
  h2_r1.4_lowdin.fcidump  same geometry, Lowdin-orthogonalized AO basis
  h4_r1.4_lowdin.fcidump  linear H4 chain, 1.4 bohr spacing, Lowdin basis
  reference.json          PySCF RHF / FCI energies for the above
"""
import json
import os

import numpy as np
from pyscf import ao2mo, fci, gto, scf
from pyscf.tools import fcidump

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")


def chain(n, spacing):
    atoms = [("H", (0.0, 0.0, i * spacing)) for i in range(n)]
    return gto.M(atom=atoms, basis="sto-3g", unit="Bohr", verbose=0)


def lowdin(mol):
    s = mol.intor("int1e_ovlp")
    w, v = np.linalg.eigh(s)
    return v @ np.diag(w ** -0.5) @ v.T


def dump_lowdin(mol, path):
    x = lowdin(mol)
    h = x.T @ scf.hf.get_hcore(mol) @ x
    eri = ao2mo.restore(1, ao2mo.full(mol, x), mol.nao)
    fcidump.from_integrals(path, h, eri, mol.nao, mol.nelectron, mol.energy_nuc())
    return h, eri


def main():
    ref = {}
    os.makedirs(OUT, exist_ok=True)

    h2 = chain(2, 1.4)
    mf = scf.RHF(h2).run(conv_tol=1e-12)
    fcidump.from_scf(mf, os.path.join(OUT, "h2_r1.4_mo.fcidump"), tol=1e-15)
    e_fci = fci.FCI(mf).kernel()[0]
    ref["h2_r1.4"] = {"e_hf": mf.e_tot, "e_fci": e_fci,
                      "s01": float(h2.intor("int1e_ovlp")[0, 1]), "e_nuc": h2.energy_nuc()}
    dump_lowdin(h2, os.path.join(OUT, "h2_r1.4_lowdin.fcidump"))

    h4 = chain(4, 1.4)
    mf4 = scf.RHF(h4).run(conv_tol=1e-12)
    e_fci4 = fci.FCI(mf4).kernel()[0]
    ref["h4_r1.4"] = {"e_hf": mf4.e_tot, "e_fci": e_fci4, "e_nuc": h4.energy_nuc()}
    dump_lowdin(h4, os.path.join(OUT, "h4_r1.4_lowdin.fcidump"))

    with open(os.path.join(OUT, "reference.json"), "w") as f:
        json.dump(ref, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
