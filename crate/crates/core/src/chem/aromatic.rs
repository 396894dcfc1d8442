//! Aromaticity perception with a Hückel 4n+2 electron count.
//!
//! Candidate rings are the SSSR rings plus the envelopes of fused pairs that
//! share exactly one bond. Every atom of a candidate ring must be able to
//! donate pi electrons; the ring is aromatic when the donated total is 4n+2.
//! The donation rules read lowercase input and Kekulé input alike, so
//! `C1=CC=CC=C1` and `c1ccccc1` perceive identically.

use alloc::vec;
use alloc::vec::Vec;

use super::molecule::{Bond, BondOrder, Molecule};
use super::rings::{self, Ring};

/// Pi electrons donated by atom `i` to a ring, or `None` if the atom cannot
/// take part in an aromatic ring.
pub(crate) fn pi_electrons(m: &Molecule, i: usize, ring_bond: &[bool]) -> Option<u32> {
    let atom = m.atom(i);
    let z = atom.atomic_number;
    let charge = atom.formal_charge;
    let mut double: Option<usize> = None;
    let mut aromatic_bonds = 0;
    for &(_, k) in m.neighbors(i) {
        match m.bonds()[k].order {
            BondOrder::Triple => return None,
            BondOrder::Double => {
                if double.is_some() {
                    return None;
                }
                double = Some(k);
            }
            BondOrder::Aromatic => aromatic_bonds += 1,
            BondOrder::Single => {}
        }
    }
    let connections = m.degree(i) + usize::from(m.hydrogens(i));

    if let Some(k) = double {
        if ring_bond[k] {
            return Some(1);
        }
        let partner = m.atom(m.bonds()[k].other(i)).atomic_number;
        return matches!(partner, 7 | 8 | 16).then_some(0);
    }

    if atom.aromatic && aromatic_bonds > 0 {
        return match (z, charge) {
            (6, 0) => Some(1),
            (6, -1) => Some(2),
            (6, 1) => Some(0),
            (7 | 15 | 33, 0) => Some(if connections >= 3 { 2 } else { 1 }),
            (7 | 15 | 33, 1) => Some(1),
            (7 | 15 | 33, -1) => Some(2),
            (8 | 16 | 34 | 52, 0) => Some(2),
            (8 | 16 | 34 | 52, 1) => Some(1),
            (5, 0) => Some(0),
            (5, -1) => Some(1),
            _ => None,
        };
    }

    // all single bonds
    match (z, charge) {
        (6, -1) => Some(2),
        (6, 1) => Some(0),
        (7 | 15 | 33, 0) if connections == 3 => Some(2),
        (7 | 15 | 33, -1) if connections == 2 => Some(2),
        (8 | 16 | 34 | 52, 0) if connections == 2 => Some(2),
        (5, 0) if connections == 3 => Some(0),
        _ => None,
    }
}

fn envelope(a: &Ring, b: &Ring) -> Option<Ring> {
    let shared: Vec<usize> = a.bonds.iter().filter(|k| b.bonds.contains(k)).copied().collect();
    if shared.len() != 1 {
        return None;
    }
    let mut bonds: Vec<usize> = a
        .bonds
        .iter()
        .chain(b.bonds.iter())
        .filter(|k| !shared.contains(k))
        .copied()
        .collect();
    bonds.sort_unstable();
    let mut atoms: Vec<usize> = a.atoms.iter().chain(b.atoms.iter()).copied().collect();
    atoms.sort_unstable();
    atoms.dedup();
    // a simple cycle has as many bonds as atoms
    (atoms.len() == bonds.len()).then_some(Ring { atoms, bonds })
}

/// Returns a copy of `m` with aromatic rings perceived. Atoms and bonds on
/// Hückel rings become aromatic; lowercase input that fails perception is
/// kept as written. Hydrogen totals are preserved.
pub fn perceive_aromaticity(m: &Molecule) -> Molecule {
    let sssr = rings::sssr(m);
    if sssr.is_empty() {
        return m.clone();
    }
    let ring_bond = rings::ring_bonds(m);
    let donors: Vec<Option<u32>> = (0..m.atom_count()).map(|i| pi_electrons(m, i, &ring_bond)).collect();

    let mut candidates: Vec<Ring> = sssr.clone();
    for (x, a) in sssr.iter().enumerate() {
        for b in &sssr[x + 1..] {
            if let Some(env) = envelope(a, b) {
                candidates.push(env);
            }
        }
    }

    let mut atom_arom = vec![false; m.atom_count()];
    let mut bond_arom = vec![false; m.bond_count()];
    for ring in &candidates {
        let mut total = 0;
        let mut ok = true;
        for &a in &ring.atoms {
            match donors[a] {
                Some(e) => total += e,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && total % 4 == 2 {
            for &a in &ring.atoms {
                atom_arom[a] = true;
            }
            for &k in &ring.bonds {
                bond_arom[k] = true;
            }
        }
    }

    let mut atoms = m.atoms().to_vec();
    for (i, atom) in atoms.iter_mut().enumerate() {
        atom.aromatic = atom.aromatic || atom_arom[i];
    }
    let bonds = m
        .bonds()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let order = if bond_arom[k] { BondOrder::Aromatic } else { b.order };
            Bond::new(b.a, b.b, order)
        })
        .collect();
    Molecule::with_hydrogens(atoms, bonds, m.hydrogen_counts().to_vec()).expect("aromatized molecule stays valid")
}

/// Number of SSSR rings whose atoms are all aromatic.
pub fn aromatic_ring_count(m: &Molecule) -> usize {
    rings::sssr(m)
        .iter()
        .filter(|r| r.atoms.iter().all(|&a| m.atom(a).aromatic))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn arom_atoms(s: &str) -> usize {
        let m = perceive_aromaticity(&parse_smiles(s).unwrap());
        m.atoms().iter().filter(|a| a.aromatic).count()
    }

    #[test]
    fn kekule_benzene_aromatizes() {
        let m = perceive_aromaticity(&parse_smiles("C1=CC=CC=C1").unwrap());
        assert!(m.atoms().iter().all(|a| a.aromatic));
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert!(m.hydrogen_counts().iter().all(|&h| h == 1));
    }

    #[test]
    fn heteroaromatics() {
        assert_eq!(arom_atoms("C1=CNC=C1"), 5); // pyrrole
        assert_eq!(arom_atoms("C1=COC=C1"), 5); // furan
        assert_eq!(arom_atoms("C1=CSC=C1"), 5); // thiophene
        assert_eq!(arom_atoms("C1=CC=NC=C1"), 6); // pyridine
        assert_eq!(arom_atoms("O=C1C=CC=CN1"), 6); // 2-pyridone
        assert_eq!(arom_atoms("C1=CC2=CC=CC=C2C=C1"), 10); // naphthalene
    }

    #[test]
    fn non_aromatic_rings_stay() {
        assert_eq!(arom_atoms("C1CCCCC1"), 0);
        assert_eq!(arom_atoms("C1=CCC=C1"), 0); // cyclopentadiene: sp3 carbon
        assert_eq!(arom_atoms("C1=CC=CC=CC=C1"), 0); // cyclooctatetraene: 8 electrons
        assert_eq!(arom_atoms("C1=CC=CC1"), 0);
    }

    #[test]
    fn lowercase_and_kekule_agree_on_fused_systems() {
        for (kek, arom) in [
            ("C1=CC=C2C(=C1)C=CN2", "c1ccc2[nH]ccc2c1"),
            ("CN1C=NC2=C1C(=O)N(C)C(=O)N2C", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
        ] {
            let a = perceive_aromaticity(&parse_smiles(kek).unwrap());
            let b = perceive_aromaticity(&parse_smiles(arom).unwrap());
            let fa: Vec<bool> = a.atoms().iter().map(|x| x.aromatic).collect();
            let fb: Vec<bool> = b.atoms().iter().map(|x| x.aromatic).collect();
            assert_eq!(
                fa.iter().filter(|x| **x).count(),
                fb.iter().filter(|x| **x).count(),
                "{kek}"
            );
        }
    }
}
