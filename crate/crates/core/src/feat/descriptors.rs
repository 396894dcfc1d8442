//! Graph-derived physicochemical descriptors.

use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chem::{aromatic_ring_count, element, rings, Molecule};

/// Nine cheap descriptors computable from the molecular graph alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub molecular_weight: f64,
    pub heavy_atom_count: usize,
    /// Cyclomatic number |bonds| - |atoms| + components.
    pub ring_count: usize,
    pub aromatic_ring_count: usize,
    /// N or O atoms carrying at least one hydrogen.
    pub hbd: usize,
    /// N or O atoms.
    pub hba: usize,
    /// Single, acyclic bonds whose ends both have heavy degree >= 2.
    pub rotatable_bonds: usize,
    pub formal_charge_sum: i32,
    pub fraction_aromatic_atoms: f64,
}

impl DescriptorVector {
    pub const NAMES: [&'static str; 9] = [
        "molecular_weight",
        "heavy_atom_count",
        "ring_count",
        "aromatic_ring_count",
        "hbd",
        "hba",
        "rotatable_bonds",
        "formal_charge_sum",
        "fraction_aromatic_atoms",
    ];

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.molecular_weight,
            self.heavy_atom_count as f64,
            self.ring_count as f64,
            self.aromatic_ring_count as f64,
            self.hbd as f64,
            self.hba as f64,
            self.rotatable_bonds as f64,
            f64::from(self.formal_charge_sum),
            self.fraction_aromatic_atoms,
        ]
    }
}

pub fn descriptors(m: &Molecule) -> DescriptorVector {
    let ring_bond = rings::ring_bonds(m);
    // per-mass counts summed in a fixed order keep the weight independent
    // of atom order
    let mut masses: BTreeMap<u64, u64> = BTreeMap::new();
    let mut hydrogens = 0u64;
    let mut heavy = 0;
    let mut aromatic_atoms = 0;
    let mut hbd = 0;
    let mut hba = 0;
    let mut charge = 0i32;
    for (i, a) in m.atoms().iter().enumerate() {
        let mass = match a.isotope {
            Some(iso) => f64::from(iso),
            None => element::weight(a.atomic_number),
        };
        *masses.entry(mass.to_bits()).or_default() += 1;
        hydrogens += u64::from(m.hydrogens(i));
        if a.atomic_number != 1 {
            heavy += 1;
        }
        if a.aromatic {
            aromatic_atoms += 1;
        }
        if matches!(a.atomic_number, 7 | 8) {
            hba += 1;
            if m.hydrogens(i) > 0 {
                hbd += 1;
            }
        }
        charge += i32::from(a.formal_charge);
    }
    let mw = masses
        .iter()
        .map(|(&bits, &k)| f64::from_bits(bits) * k as f64)
        .sum::<f64>()
        + hydrogens as f64 * element::HYDROGEN_WEIGHT;
    let rotatable_bonds = m
        .bonds()
        .iter()
        .enumerate()
        .filter(|(k, b)| {
            b.order == crate::chem::BondOrder::Single
                && !ring_bond[*k]
                && m.heavy_degree(b.a) >= 2
                && m.heavy_degree(b.b) >= 2
        })
        .count();
    DescriptorVector {
        molecular_weight: mw,
        heavy_atom_count: heavy,
        ring_count: rings::cyclomatic_number(m),
        aromatic_ring_count: aromatic_ring_count(m),
        hbd,
        hba,
        rotatable_bonds,
        formal_charge_sum: charge,
        fraction_aromatic_atoms: if heavy == 0 {
            0.0
        } else {
            f64::from(aromatic_atoms) / heavy as f64
        },
    }
}
