//! Canonical atom ranking and canonical SMILES.
//!
//! Ranks start from per-atom invariants `(atomic number, charge, degree,
//! hydrogens, aromatic, isotope)` and are refined Morgan-style by the sorted
//! multiset of `(neighbor rank, bond code)` until the number of classes
//! stops growing. Remaining ties are broken by individualizing each member of
//! the first tied class in turn, refining again, and keeping the
//! lexicographically smallest SMILES over all leaves.

use alloc::string::String;
use alloc::vec::Vec;

use super::aromatic::perceive_aromaticity;
use super::molecule::Molecule;
use super::parser::{parse_smiles, ParseDiagnostic};
use super::writer::write_connected;

/// Upper bound on fully explored tie-breaking leaves per component. Past
/// it, each tied class is broken at its lowest-index member only.
const LEAF_BUDGET: usize = 512;

fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = alloc::vec![0u32; keys.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = if pos > 0 && keys[order[pos - 1]] == keys[i] {
            ranks[order[pos - 1]]
        } else {
            pos as u32
        };
    }
    ranks
}

fn class_count(ranks: &[u32]) -> usize {
    let mut v = ranks.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn initial_ranks(m: &Molecule) -> Vec<u32> {
    let keys: Vec<_> = (0..m.atom_count())
        .map(|i| {
            let a = m.atom(i);
            (
                a.atomic_number,
                a.formal_charge,
                m.degree(i),
                m.hydrogens(i),
                a.aromatic,
                a.isotope.unwrap_or(0),
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn refine(m: &Molecule, ranks: &mut Vec<u32>) {
    let mut classes = class_count(ranks);
    loop {
        let keys: Vec<(u32, Vec<(u32, u8)>)> = (0..m.atom_count())
            .map(|i| {
                let mut nb: Vec<(u32, u8)> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(w, k)| (ranks[w], m.bonds()[k].order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_ranks(&keys);
        let next_classes = class_count(&next);
        *ranks = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
}

/// Symmetry-class ranks: equal values mark atoms the refinement cannot tell
/// apart. Invariant under relabeling of the input atoms.
pub fn canonical_ranks(m: &Molecule) -> Vec<u32> {
    let mut ranks = initial_ranks(m);
    refine(m, &mut ranks);
    ranks
}

fn search(m: &Molecule, mut ranks: Vec<u32>, budget: &mut usize, best: &mut Option<String>) {
    refine(m, &mut ranks);
    let n = ranks.len();
    let mut counts = alloc::vec![0usize; n];
    for &r in &ranks {
        counts[r as usize] += 1;
    }
    let Some(tied) = (0..n).find(|&r| counts[r] > 1) else {
        let s = write_connected(m, &ranks);
        *budget = budget.saturating_sub(1);
        if best.as_ref().is_none_or(|b| s < *b) {
            *best = Some(s);
        }
        return;
    };
    let members: Vec<usize> = (0..n).filter(|&i| ranks[i] as usize == tied).collect();
    for (pos, &pick) in members.iter().enumerate() {
        if pos > 0 && *budget == 0 {
            break;
        }
        let mut next = ranks.clone();
        for &other in &members {
            if other != pick {
                next[other] += 1;
            }
        }
        search(m, next, budget, best);
    }
}

fn canonical_connected(m: &Molecule) -> String {
    let mut budget = LEAF_BUDGET;
    let mut best = None;
    search(m, initial_ranks(m), &mut budget, &mut best);
    best.unwrap_or_default()
}

/// Canonical SMILES of `m`. Components are written separately and joined
/// with `.` in lexicographic order. Stereo marks are not written.
pub fn write_smiles(m: &Molecule) -> String {
    let mut parts: Vec<String> = m
        .components()
        .iter()
        .map(|comp| canonical_connected(&m.fragment(comp)))
        .collect();
    parts.sort();
    parts.join(".")
}

/// Parses, perceives aromaticity and writes canonical SMILES.
pub fn standardize(smiles: &str) -> Result<String, ParseDiagnostic> {
    let m = parse_smiles(smiles)?;
    Ok(write_smiles(&perceive_aromaticity(&m)))
}

/// Standardized form of an already parsed molecule.
pub fn standardize_molecule(m: &Molecule) -> Molecule {
    perceive_aromaticity(m)
}
