//! Extended-connectivity fingerprints (Morgan-style circular environments).
//!
//! Initial atom code hashes `(atomic number, charge, degree, attached H,
//! in-ring)`. Iteration `r` hashes `(r, own code, sorted (bond code,
//! neighbor code) pairs)`. An environment whose atom set was already seen,
//! at this or an earlier iteration, is dropped; within one iteration the
//! lowest code wins. Surviving codes fold to bit `code mod width`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::fingerprint::{FeatError, Fingerprint};
use crate::chem::{rings, Molecule};
use crate::hash::EnvHasher;

pub const DEFAULT_WIDTH: usize = 2048;
/// Radius 2, i.e. ECFP4.
pub const DEFAULT_RADIUS: u32 = 2;

fn initial_code(m: &Molecule, i: usize, in_ring: bool) -> u64 {
    let a = m.atom(i);
    let mut h = EnvHasher::new();
    h.write_bytes(&[
        a.atomic_number,
        a.formal_charge as u8,
        m.degree(i) as u8,
        m.hydrogens(i),
        u8::from(in_ring),
    ]);
    h.finish()
}

/// Distinct environment codes up to `radius`, before folding, sorted.
pub fn environment_codes(m: &Molecule, radius: u32) -> Vec<u64> {
    let n = m.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let ring_bond = rings::ring_bonds(m);
    let ring_atom = rings::ring_atoms(m, &ring_bond);
    let words = n.div_ceil(64);

    let mut codes: Vec<u64> = (0..n).map(|i| initial_code(m, i, ring_atom[i])).collect();
    let mut sets: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut s = vec![0u64; words];
            s[i / 64] |= 1 << (i % 64);
            s
        })
        .collect();
    let mut seen: BTreeSet<Vec<u64>> = sets.iter().cloned().collect();
    let mut out: BTreeSet<u64> = codes.iter().copied().collect();

    for r in 1..=radius {
        let mut next_codes = Vec::with_capacity(n);
        let mut next_sets = Vec::with_capacity(n);
        for i in 0..n {
            let mut nbrs: Vec<(u8, u64)> = m
                .neighbors(i)
                .iter()
                .map(|&(w, k)| (m.bonds()[k].order.code(), codes[w]))
                .collect();
            nbrs.sort_unstable();
            let mut h = EnvHasher::new();
            h.write_u32(r);
            h.write_u64(codes[i]);
            for (b, c) in &nbrs {
                h.write_bytes(&[*b]);
                h.write_u64(*c);
            }
            next_codes.push(h.finish());

            let mut s = sets[i].clone();
            for &(w, _) in m.neighbors(i) {
                for (x, y) in s.iter_mut().zip(&sets[w]) {
                    *x |= y;
                }
            }
            next_sets.push(s);
        }

        let mut fresh: Vec<(&Vec<u64>, u64)> = next_sets
            .iter()
            .zip(next_codes.iter().copied())
            .filter(|(s, _)| !seen.contains(*s))
            .collect();
        fresh.sort();
        fresh.dedup_by(|later, earlier| later.0 == earlier.0);
        for (s, c) in &fresh {
            out.insert(*c);
            seen.insert((*s).clone());
        }
        codes = next_codes;
        sets = next_sets;
    }
    out.into_iter().collect()
}

/// Folded circular fingerprint of `m`.
pub fn ecfp(m: &Molecule, radius: u32, width: usize) -> Result<Fingerprint, FeatError> {
    let mut fp = Fingerprint::empty(width, radius)?;
    for code in environment_codes(m, radius) {
        fp.set((code % width as u64) as usize);
    }
    Ok(fp)
}
