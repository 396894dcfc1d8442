//! Ring perception: bridge detection and a minimum cycle basis (SSSR).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::Molecule;

/// One ring of the smallest set of smallest rings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    /// Atoms in cyclic order.
    pub atoms: Vec<usize>,
    /// Bond indices, sorted.
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Marks bonds that lie on at least one cycle (i.e. are not bridges).
pub fn ring_bonds(m: &Molecule) -> Vec<bool> {
    let n = m.atom_count();
    let mut in_ring = vec![true; m.bond_count()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, parent bond, next neighbor position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (v, parent_bond, pos) = stack[top];
            let nbrs = m.neighbors(v);
            if pos < nbrs.len() {
                let (w, k) = nbrs[pos];
                stack[top].2 += 1;
                if k == parent_bond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        in_ring[parent_bond] = false;
                    }
                }
            }
        }
    }
    in_ring
}

/// Atoms incident to at least one ring bond.
pub fn ring_atoms(m: &Molecule, ring_bond: &[bool]) -> Vec<bool> {
    let mut out = vec![false; m.atom_count()];
    for (k, b) in m.bonds().iter().enumerate() {
        if ring_bond[k] {
            out[b.a] = true;
            out[b.b] = true;
        }
    }
    out
}

/// Cyclomatic number |E| - |V| + components.
pub fn cyclomatic_number(m: &Molecule) -> usize {
    (m.bond_count() + m.components().len()).saturating_sub(m.atom_count())
}

/// Horton's minimum cycle basis: build candidate cycles from shortest-path
/// trees, sort by length, keep those independent over GF(2).
pub fn sssr(m: &Molecule) -> Vec<Ring> {
    let target = cyclomatic_number(m);
    if target == 0 {
        return Vec::new();
    }
    let n = m.atom_count();
    let words = m.bond_count().div_ceil(64);
    let ring_bond = ring_bonds(m);

    let mut candidates: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
    for root in 0..n {
        if !m.neighbors(root).iter().any(|&(_, k)| ring_bond[k]) {
            continue;
        }
        // BFS shortest-path tree restricted to ring bonds.
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, k) in m.neighbors(v) {
                if ring_bond[k] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = (v, k);
                    queue.push_back(w);
                }
            }
        }
        let path = |mut v: usize| {
            let mut atoms = vec![v];
            let mut bonds = Vec::new();
            while v != root {
                let (p, k) = parent[v];
                bonds.push(k);
                atoms.push(p);
                v = p;
            }
            (atoms, bonds)
        };
        for (k, b) in m.bonds().iter().enumerate() {
            if !ring_bond[k] || dist[b.a] == usize::MAX || dist[b.b] == usize::MAX {
                continue;
            }
            if parent[b.a].1 == k || parent[b.b].1 == k {
                continue;
            }
            let (pa, ba) = path(b.a);
            let (pb, bb) = path(b.b);
            // paths must meet only at the root
            if pa[..pa.len() - 1].iter().any(|x| pb[..pb.len() - 1].contains(x)) {
                continue;
            }
            let mut bits = vec![0u64; words];
            for &e in ba.iter().chain(bb.iter()).chain(core::iter::once(&k)) {
                bits[e / 64] |= 1 << (e % 64);
            }
            // cycle: a .. root .. b
            let mut cyc: Vec<usize> = pa.clone();
            cyc.extend(pb.iter().rev().skip(1));
            candidates.push((bits, cyc));
        }
    }
    candidates.sort_by(|x, y| x.1.len().cmp(&y.1.len()).then_with(|| x.0.cmp(&y.0)));
    candidates.dedup_by(|x, y| x.0 == y.0);

    // Gaussian elimination over GF(2), rows kept in reduced form keyed by pivot.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for (bits, atoms) in candidates {
        let mut row = bits.clone();
        for (pivot, brow) in &basis {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (r, b) in row.iter_mut().zip(brow) {
                    *r ^= b;
                }
            }
        }
        let pivot = row
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        let Some(pivot) = pivot else { continue };
        for (_, brow) in basis.iter_mut() {
            if brow[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (b, r) in brow.iter_mut().zip(&row) {
                    *b ^= r;
                }
            }
        }
        basis.push((pivot, row));
        let bonds = (0..m.bond_count())
            .filter(|&e| bits[e / 64] >> (e % 64) & 1 == 1)
            .collect();
        rings.push(Ring { atoms, bonds });
        if rings.len() == target {
            break;
        }
    }
    rings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn chain_has_no_ring_bonds() {
        let m = parse_smiles("CCCO").unwrap();
        assert!(ring_bonds(&m).iter().all(|r| !r));
        assert!(sssr(&m).is_empty());
    }

    #[test]
    fn naphthalene_two_six_rings() {
        let m = parse_smiles("c1ccc2ccccc2c1").unwrap();
        let rings = sssr(&m);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6 && r.bonds.len() == 6));
        assert!(ring_bonds(&m).iter().all(|&r| r));
    }

    #[test]
    fn biphenyl_link_is_a_bridge() {
        let m = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        let rb = ring_bonds(&m);
        assert_eq!(rb.iter().filter(|r| !**r).count(), 1);
        assert_eq!(sssr(&m).len(), 2);
    }

    #[test]
    fn cubane_has_five_four_rings() {
        let m = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        let rings = sssr(&m);
        assert_eq!(rings.len(), 5);
        assert!(rings.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn ring_atoms_are_cyclically_ordered() {
        let m = parse_smiles("C1CCC1").unwrap();
        let ring = &sssr(&m)[0];
        for w in 0..ring.len() {
            let a = ring.atoms[w];
            let b = ring.atoms[(w + 1) % ring.len()];
            assert!(m.bond_between(a, b).is_some());
        }
    }
}
