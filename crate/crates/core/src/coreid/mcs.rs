//! Maximum common connected induced substructure.
//!
//! Pairs are solved with a McSplit-style branch and bound: unmatched atoms
//! of both graphs are kept in label classes keyed by their bond pattern to
//! the atoms matched so far, and the bound is the current size plus the sum
//! over classes of the smaller side. After the first pair only classes
//! adjacent to the match are eligible, which keeps the result connected.
//! Lists are folded left to right.

use alloc::vec;
use alloc::vec::Vec;

use crate::chem::{BondOrder, Molecule};

/// Cooperative cancellation for the anytime search.
pub trait Deadline {
    fn expired(&mut self) -> bool;
}

/// Never expires.
pub struct NoDeadline;

impl Deadline for NoDeadline {
    fn expired(&mut self) -> bool {
        false
    }
}

/// Expires after a fixed number of search nodes.
pub struct NodeBudget(pub u64);

impl Deadline for NodeBudget {
    fn expired(&mut self) -> bool {
        if self.0 == 0 {
            return true;
        }
        self.0 -= 1;
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaffoldResult {
    pub scaffold: Molecule,
    /// Fraction of the inputs containing the scaffold.
    pub coverage: f64,
    /// False when any pairwise search stopped at the deadline.
    pub search_exhausted: bool,
}

/// Atom pairs `(index in a, index in b)` of one pairwise match.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMatch {
    pub pairs: Vec<(usize, usize)>,
    pub exhausted: bool,
}

fn atom_label(m: &Molecule, i: usize) -> (u8, bool) {
    let a = m.atom(i);
    (a.atomic_number, a.aromatic)
}

fn bond_code(m: &Molecule, i: usize, j: usize) -> u8 {
    m.bond_between(i, j).map_or(0, |b| b.order.code())
}

#[derive(Clone)]
struct Class {
    left: Vec<usize>,
    right: Vec<usize>,
    adjacent: bool,
}

struct Search<'a, D: Deadline> {
    a: &'a Molecule,
    b: &'a Molecule,
    deadline: &'a mut D,
    best: Vec<(usize, usize)>,
    current: Vec<(usize, usize)>,
    stopped: bool,
}

impl<D: Deadline> Search<'_, D> {
    fn bound(&self, classes: &[Class]) -> usize {
        let connected = !self.current.is_empty();
        if connected && !classes.iter().any(|c| c.adjacent) {
            return self.current.len();
        }
        self.current.len() + classes.iter().map(|c| c.left.len().min(c.right.len())).sum::<usize>()
    }

    fn run(&mut self, classes: Vec<Class>) {
        if self.stopped {
            return;
        }
        if self.deadline.expired() {
            self.stopped = true;
            return;
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if self.bound(&classes) <= self.best.len() {
            return;
        }
        let connected = !self.current.is_empty();
        // smallest eligible class, ties to the first
        let Some(ci) = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| !connected || c.adjacent)
            .min_by_key(|(_, c)| c.left.len().max(c.right.len()))
            .map(|(i, _)| i)
        else {
            return;
        };
        let v = *classes[ci]
            .left
            .iter()
            .max_by_key(|&&x| (self.a.degree(x), usize::MAX - x))
            .expect("classes are non-empty");
        let rights = classes[ci].right.clone();
        for w in rights {
            let mut next = Vec::with_capacity(classes.len() + 4);
            for c in &classes {
                let mut buckets: Vec<(u8, Vec<usize>, Vec<usize>)> = Vec::new();
                for &x in &c.left {
                    if x == v {
                        continue;
                    }
                    let code = bond_code(self.a, v, x);
                    match buckets.iter_mut().find(|(k, _, _)| *k == code) {
                        Some(bk) => bk.1.push(x),
                        None => buckets.push((code, vec![x], Vec::new())),
                    }
                }
                for &y in &c.right {
                    if y == w {
                        continue;
                    }
                    let code = bond_code(self.b, w, y);
                    if let Some(bk) = buckets.iter_mut().find(|(k, _, _)| *k == code) {
                        bk.2.push(y);
                    }
                }
                for (code, left, right) in buckets {
                    if !left.is_empty() && !right.is_empty() {
                        next.push(Class {
                            left,
                            right,
                            adjacent: c.adjacent || code != 0,
                        });
                    }
                }
            }
            self.current.push((v, w));
            self.run(next);
            self.current.pop();
            if self.stopped {
                return;
            }
        }
        // branch where v stays unmatched
        let mut without = classes;
        without[ci].left.retain(|&x| x != v);
        if without[ci].left.is_empty() {
            without.remove(ci);
        }
        self.run(without);
    }
}

/// Largest connected common induced substructure of two molecules. Atoms
/// match on (atomic number, aromatic flag); bonds on order.
pub fn mcs_pair<D: Deadline>(a: &Molecule, b: &Molecule, deadline: &mut D) -> PairMatch {
    let mut classes: Vec<Class> = Vec::new();
    let mut labels: Vec<(u8, bool)> = (0..a.atom_count()).map(|i| atom_label(a, i)).collect();
    labels.sort_unstable();
    labels.dedup();
    for l in labels {
        let left: Vec<usize> = (0..a.atom_count()).filter(|&i| atom_label(a, i) == l).collect();
        let right: Vec<usize> = (0..b.atom_count()).filter(|&i| atom_label(b, i) == l).collect();
        if !right.is_empty() {
            classes.push(Class {
                left,
                right,
                adjacent: false,
            });
        }
    }
    let mut s = Search {
        a,
        b,
        deadline,
        best: Vec::new(),
        current: Vec::new(),
        stopped: false,
    };
    s.run(classes);
    let mut pairs = s.best;
    pairs.sort_unstable();
    PairMatch {
        pairs,
        exhausted: !s.stopped,
    }
}

/// True when `pattern` is isomorphic to an induced subgraph of `host` under
/// the same atom and bond compatibility as [`mcs_pair`].
pub fn contains_substructure(host: &Molecule, pattern: &Molecule) -> bool {
    let n = pattern.atom_count();
    if n == 0 {
        return true;
    }
    if n > host.atom_count() {
        return false;
    }
    // BFS order keeps each new atom anchored to a mapped neighbor when possible
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = alloc::collections::VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &(w, _) in pattern.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; host.atom_count()];
    extend(host, pattern, &order, 0, &mut map, &mut used)
}

fn extend(
    host: &Molecule,
    pat: &Molecule,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    let anchor = pat.neighbors(v).iter().map(|&(w, _)| w).find(|&w| map[w] != usize::MAX);
    let candidates: Vec<usize> = match anchor {
        Some(w) => host.neighbors(map[w]).iter().map(|&(x, _)| x).collect(),
        None => (0..host.atom_count()).collect(),
    };
    for c in candidates {
        if used[c] || atom_label(pat, v) != atom_label(host, c) {
            continue;
        }
        let ok = order[..depth]
            .iter()
            .all(|&u| bond_code(pat, v, u) == bond_code(host, c, map[u]));
        if !ok {
            continue;
        }
        map[v] = c;
        used[c] = true;
        if extend(host, pat, order, depth + 1, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[c] = false;
    }
    false
}

fn single_atom(z: u8, aromatic: bool) -> Molecule {
    let mut atom = crate::chem::Atom::new(z).aromatic(aromatic);
    atom.explicit_h = Some(0);
    Molecule::with_hydrogens(vec![atom], Vec::new(), vec![0]).expect("single atom is valid")
}

/// Folds [`mcs_pair`] across `mols`. If no common connected substructure
/// exists, the scaffold falls back to the single atom type present in the
/// most inputs, and coverage reflects that atom.
pub fn mcs<D: Deadline>(mols: &[Molecule], deadline: &mut D) -> ScaffoldResult {
    let mut exhausted = true;
    let mut scaffold = mols.first().cloned().unwrap_or_else(|| single_atom(6, false));
    for m in mols.iter().skip(1) {
        if scaffold.is_empty() {
            break;
        }
        let r = mcs_pair(&scaffold, m, deadline);
        exhausted &= r.exhausted;
        let keep: Vec<usize> = r.pairs.iter().map(|&(i, _)| i).collect();
        scaffold = scaffold.fragment(&keep);
    }
    if scaffold.is_empty() {
        let mut best: Option<((u8, bool), usize)> = None;
        let mut labels: Vec<(u8, bool)> = mols
            .iter()
            .flat_map(|m| (0..m.atom_count()).map(|i| atom_label(m, i)))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        for l in labels {
            let count = mols
                .iter()
                .filter(|m| (0..m.atom_count()).any(|i| atom_label(m, i) == l))
                .count();
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((l, count));
            }
        }
        let ((z, arom), _) = best.unwrap_or(((6, false), 0));
        scaffold = single_atom(z, arom);
    }
    let containing = mols.iter().filter(|m| contains_substructure(m, &scaffold)).count();
    let coverage = if mols.is_empty() {
        1.0
    } else {
        containing as f64 / mols.len() as f64
    };
    ScaffoldResult {
        scaffold,
        coverage,
        search_exhausted: exhausted,
    }
}

/// Bond order histogram, handy for comparing scaffolds in tests.
pub fn bond_orders(m: &Molecule) -> [usize; 4] {
    let mut h = [0; 4];
    for b in m.bonds() {
        let k = match b.order {
            BondOrder::Single => 0,
            BondOrder::Double => 1,
            BondOrder::Triple => 2,
            BondOrder::Aromatic => 3,
        };
        h[k] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{parse_smiles, standardize_molecule};

    fn mol(s: &str) -> Molecule {
        standardize_molecule(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene_toluene() {
        let r = mcs(&[mol("c1ccccc1"), mol("Cc1ccccc1")], &mut NoDeadline);
        assert_eq!(r.scaffold.atom_count(), 6);
        assert!(r.scaffold.atoms().iter().all(|a| a.aromatic && a.atomic_number == 6));
        assert_eq!(bond_orders(&r.scaffold), [0, 0, 0, 6]);
        assert_eq!(r.coverage, 1.0);
        assert!(r.search_exhausted);
    }

    #[test]
    fn identity() {
        let x = mol("CC(=O)Nc1ccc(O)cc1");
        let r = mcs(&[x.clone(), x.clone()], &mut NoDeadline);
        assert_eq!(r.scaffold.atom_count(), x.atom_count());
        assert_eq!(r.scaffold.bond_count(), x.bond_count());
    }

    #[test]
    fn methane_ethane() {
        let r = mcs(&[mol("C"), mol("CC")], &mut NoDeadline);
        assert_eq!(r.scaffold.atom_count(), 1);
    }

    #[test]
    fn disjoint_elements_fall_back_to_single_atom() {
        let r = mcs(&[mol("O"), mol("N"), mol("NN")], &mut NoDeadline);
        assert_eq!(r.scaffold.atom_count(), 1);
        assert_eq!(r.scaffold.atom(0).atomic_number, 7);
        assert!((r.coverage - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn result_is_connected_and_contained() {
        let a = mol("OCCc1ccccc1CCN");
        let b = mol("NCCc1ccccc1");
        let r = mcs(&[a.clone(), b.clone()], &mut NoDeadline);
        assert_eq!(r.scaffold.components().len(), 1);
        assert!(contains_substructure(&a, &r.scaffold));
        assert!(contains_substructure(&b, &r.scaffold));
        assert_eq!(r.scaffold.atom_count(), 9);
    }

    #[test]
    fn pair_sizes_symmetric() {
        let a = mol("CC(C)Cc1ccc(cc1)C(C)C(=O)O");
        let b = mol("COc1ccc2cc(ccc2c1)C(C)C(=O)O");
        let ab = mcs_pair(&a, &b, &mut NoDeadline).pairs.len();
        let ba = mcs_pair(&b, &a, &mut NoDeadline).pairs.len();
        assert_eq!(ab, ba);
    }

    #[test]
    fn budget_expiry_is_reported() {
        let a = mol("c1ccc2ccccc2c1");
        let r = mcs(&[a.clone(), a], &mut NodeBudget(3));
        assert!(!r.search_exhausted);
        assert!(r.coverage > 0.0);
    }
}
