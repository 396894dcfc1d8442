use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::element;

/// Bond multiplicity. Aromatic bonds only join aromatic atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the valence sum used by the implicit hydrogen model.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Small stable code used in hashes and canonical keys.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub atomic_number: u8,
    pub formal_charge: i8,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    /// Hydrogen count written inside brackets; `None` means derived from the
    /// valence model.
    pub explicit_h: Option<u8>,
    pub index: usize,
}

impl Atom {
    pub fn new(atomic_number: u8) -> Self {
        Self {
            atomic_number,
            formal_charge: 0,
            isotope: None,
            aromatic: false,
            explicit_h: None,
            index: 0,
        }
    }

    pub fn aromatic(mut self, aromatic: bool) -> Self {
        self.aromatic = aromatic;
        self
    }

    pub fn symbol(&self) -> &'static str {
        element::symbol(self.atomic_number)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Self { a, b, order }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// A stereo mark seen while parsing. Marks never take part in graph identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StereoMark {
    /// `/` or `\` bond at the given byte offset.
    Directional(usize),
    /// `@`-style chirality at the given byte offset.
    Chirality(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MoleculeError {
    #[error("atomic number {0} outside 1..=118")]
    AtomicNumber(u8),
    #[error("formal charge {0} outside -4..=4")]
    Charge(i8),
    #[error("bond {0} references a missing atom")]
    DanglingBond(usize),
    #[error("bond {0} joins an atom to itself")]
    SelfBond(usize),
    #[error("atoms {0} and {1} are bonded twice")]
    DuplicateBond(usize, usize),
    #[error("aromatic bond {0} joins a non-aromatic atom")]
    AromaticBond(usize),
}

/// Attributed molecular graph. Immutable once built; hydrogen counts are
/// resolved at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    hydrogens: Vec<u8>,
    adjacency: Vec<Vec<(usize, usize)>>,
    stereo: Vec<StereoMark>,
}

impl Molecule {
    /// Builds a molecule, deriving hydrogens for atoms without `explicit_h`.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, MoleculeError> {
        let mut m = Self::assemble(atoms, bonds, Vec::new())?;
        m.hydrogens = (0..m.atoms.len()).map(|i| m.derived_hydrogens(i)).collect();
        Ok(m)
    }

    /// Builds a molecule with hydrogen totals given per atom.
    pub fn with_hydrogens(atoms: Vec<Atom>, bonds: Vec<Bond>, hydrogens: Vec<u8>) -> Result<Self, MoleculeError> {
        assert_eq!(atoms.len(), hydrogens.len(), "one hydrogen count per atom");
        Self::assemble(atoms, bonds, hydrogens)
    }

    fn assemble(mut atoms: Vec<Atom>, bonds: Vec<Bond>, hydrogens: Vec<u8>) -> Result<Self, MoleculeError> {
        let n = atoms.len();
        for (i, atom) in atoms.iter_mut().enumerate() {
            if !(1..=118).contains(&atom.atomic_number) {
                return Err(MoleculeError::AtomicNumber(atom.atomic_number));
            }
            if !(-4..=4).contains(&atom.formal_charge) {
                return Err(MoleculeError::Charge(atom.formal_charge));
            }
            atom.index = i;
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(MoleculeError::DanglingBond(k));
            }
            if bond.a == bond.b {
                return Err(MoleculeError::SelfBond(k));
            }
            if adjacency[bond.a].iter().any(|&(nb, _)| nb == bond.b) {
                return Err(MoleculeError::DuplicateBond(bond.a, bond.b));
            }
            if bond.order == BondOrder::Aromatic && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic) {
                return Err(MoleculeError::AromaticBond(k));
            }
            adjacency[bond.a].push((bond.b, k));
            adjacency[bond.b].push((bond.a, k));
        }
        Ok(Self {
            atoms,
            bonds,
            hydrogens,
            adjacency,
            stereo: Vec::new(),
        })
    }

    pub(crate) fn set_stereo(&mut self, marks: Vec<StereoMark>) {
        self.stereo = marks;
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Stereo annotations recorded by the parser.
    pub fn stereo_marks(&self) -> &[StereoMark] {
        &self.stereo
    }

    /// Total attached hydrogens (bracket count or valence-derived).
    pub fn hydrogens(&self, i: usize) -> u8 {
        self.hydrogens[i]
    }

    pub fn hydrogen_counts(&self) -> &[u8] {
        &self.hydrogens
    }

    /// `(neighbor, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Neighbors that are not hydrogen atoms.
    pub fn heavy_degree(&self, i: usize) -> usize {
        self.adjacency[i]
            .iter()
            .filter(|&&(nb, _)| self.atoms[nb].atomic_number != 1)
            .count()
    }

    pub fn bond_between(&self, i: usize, j: usize) -> Option<&Bond> {
        self.adjacency[i]
            .iter()
            .find(|&&(nb, _)| nb == j)
            .map(|&(_, k)| &self.bonds[k])
    }

    /// Hydrogens the valence model assigns to atom `i` given its current
    /// bonds. Bracket atoms return their written count.
    pub fn derived_hydrogens(&self, i: usize) -> u8 {
        let atom = &self.atoms[i];
        if let Some(h) = atom.explicit_h {
            return h;
        }
        implicit_hydrogens(atom, self.adjacency[i].iter().map(|&(_, k)| self.bonds[k].order))
    }

    /// Connected components, each sorted ascending, ordered by smallest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(nb, _) in &self.adjacency[v] {
                    if !seen[nb] {
                        seen[nb] = true;
                        comp.push(nb);
                        stack.push(nb);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Relabels atoms so that new atom `k` is old atom `order[k]`.
    /// `order` must be a permutation of `0..atom_count()`.
    pub fn permuted(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len());
        let mut inverse = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let atoms = order.iter().map(|&old| self.atoms[old].clone()).collect();
        let hydrogens = order.iter().map(|&old| self.hydrogens[old]).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(inverse[b.a], inverse[b.b], b.order))
            .collect();
        let mut m = Self::with_hydrogens(atoms, bonds, hydrogens).expect("permutation of a valid molecule");
        m.stereo = self.stereo.clone();
        m
    }

    /// Induced subgraph on `subset`, in the given order. Hydrogen totals are
    /// copied from the parent, so the result describes a fragment.
    pub fn fragment(&self, subset: &[usize]) -> Molecule {
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in subset.iter().enumerate() {
            map[old] = new;
        }
        let atoms = subset.iter().map(|&old| self.atoms[old].clone()).collect();
        let hydrogens = subset.iter().map(|&old| self.hydrogens[old]).collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
            .map(|b| Bond::new(map[b.a], map[b.b], b.order))
            .collect();
        Self::with_hydrogens(atoms, bonds, hydrogens).expect("subgraph of a valid molecule")
    }
}

/// Daylight-style implicit hydrogen count for an unbracketed atom.
///
/// Aliphatic atoms take the lowest default valence that accommodates the
/// bond sum. Aromatic atoms use only their lowest valence and reserve one
/// unit for the ring pi bond unless they already carry an explicit double
/// bond.
pub fn implicit_hydrogens(atom: &Atom, orders: impl Iterator<Item = BondOrder>) -> u8 {
    let table = element::valences(atom.atomic_number);
    if table.is_empty() || atom.formal_charge != 0 {
        return 0;
    }
    let mut sum: u32 = 0;
    let mut has_double = false;
    for order in orders {
        sum += u32::from(order.valence());
        if order == BondOrder::Double {
            has_double = true;
        }
    }
    if atom.aromatic {
        if !has_double {
            sum += 1;
        }
        return u32::from(table[0]).saturating_sub(sum) as u8;
    }
    table
        .iter()
        .map(|&v| u32::from(v))
        .find(|&v| v >= sum)
        .map_or(0, |v| (v - sum) as u8)
}
