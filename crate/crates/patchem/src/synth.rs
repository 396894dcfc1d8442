//! Synthetic patent generator.
//!
//! A patent is built around one core compound: a scaffold with three
//! substituents. Analogs vary one or two of those substituents, and decoys
//! are decorated scaffolds of other series. The core is therefore the
//! compound closest to the most analogs, which is the structure the network
//! features are meant to expose.

use std::collections::HashSet;

use patchem_core::coreid::CompoundRecord;
use patchem_core::hash::derive_seed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::PatentBundle;

/// Scaffolds with three substituent slots.
pub const SCAFFOLDS: [&str; 7] = [
    "c1cc({0})c({1})cc1C(=O)NC{2}",
    "O=C(NC{2})c1nc2cc({0})ccc2n1C{1}",
    "c1cc(C{2})cc2c1c({0})c({1})[nH]2",
    "C1CN(C{2})CCN1c1ccc({0})cc1{1}",
    "O=C1N(C{2})c2ccc({0})cc2C1{1}",
    "Cc1sc(C(=O)NC{2})c({0})c1{1}",
    "c1ccc2ncc({0})c(N{2})c2c1{1}",
];

/// Substituents, written to follow an atom directly.
pub const SUBSTITUENTS: [&str; 22] = [
    "C",
    "CC",
    "C(C)C",
    "OC",
    "OCC",
    "F",
    "Cl",
    "Br",
    "C(F)(F)F",
    "C#N",
    "N",
    "N(C)C",
    "O",
    "C(=O)O",
    "C(=O)N",
    "C(=O)C",
    "S(C)(=O)=O",
    "c9ccccc9",
    "C9CC9",
    "N9CCOCC9",
    "C9CCCC9",
    "OC(F)(F)F",
];

pub fn decorate(scaffold: &str, subs: [usize; 3]) -> String {
    scaffold
        .replace("{0}", SUBSTITUENTS[subs[0]])
        .replace("{1}", SUBSTITUENTS[subs[1]])
        .replace("{2}", SUBSTITUENTS[subs[2]])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_compounds: usize,
    /// Share of non-core compounds that are analogs of the core.
    pub analog_fraction: f64,
    /// Share of analogs that change two substituents instead of one.
    pub double_change_fraction: f64,
}

impl SynthConfig {
    pub fn with_compounds(n_compounds: usize) -> Self {
        Self {
            n_compounds,
            analog_fraction: 0.7,
            double_change_fraction: 0.3,
        }
    }
}

fn other_sub(rng: &mut ChaCha8Rng, current: usize) -> usize {
    loop {
        let s = rng.gen_range(0..SUBSTITUENTS.len());
        if s != current {
            return s;
        }
    }
}

/// Generates patent `index` of the stream `seed`. Compound ids are assigned
/// after shuffling, so the core's id carries no information.
pub fn synth_patent(seed: u64, index: usize, cfg: &SynthConfig) -> PatentBundle {
    assert!(cfg.n_compounds >= 2, "a patent needs at least two compounds");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    let patent_id = format!("SYN{index:03}");
    let scaffold = rng.gen_range(0..SCAFFOLDS.len());
    let core_subs = [
        rng.gen_range(0..SUBSTITUENTS.len()),
        rng.gen_range(0..SUBSTITUENTS.len()),
        rng.gen_range(0..SUBSTITUENTS.len()),
    ];
    let core = decorate(SCAFFOLDS[scaffold], core_subs);
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(patchem_core::standardize(&core).expect("generated SMILES parse"));
    let mut compounds: Vec<(String, bool)> = vec![(core, true)];

    let others = cfg.n_compounds - 1;
    let n_analogs = ((others as f64) * cfg.analog_fraction).round() as usize;
    let mut attempts = 0;
    while compounds.len() < 1 + n_analogs && attempts < 10_000 {
        attempts += 1;
        let mut subs = core_subs;
        let changes = if rng.gen_bool(cfg.double_change_fraction) { 2 } else { 1 };
        let mut slots = [0usize, 1, 2];
        slots.shuffle(&mut rng);
        for &slot in &slots[..changes] {
            subs[slot] = other_sub(&mut rng, core_subs[slot]);
        }
        let smi = decorate(SCAFFOLDS[scaffold], subs);
        if seen.insert(patchem_core::standardize(&smi).expect("generated SMILES parse")) {
            compounds.push((smi, false));
        }
    }
    while compounds.len() < cfg.n_compounds && attempts < 20_000 {
        attempts += 1;
        let mut other = rng.gen_range(0..SCAFFOLDS.len() - 1);
        if other >= scaffold {
            other += 1;
        }
        let subs = [
            rng.gen_range(0..SUBSTITUENTS.len()),
            rng.gen_range(0..SUBSTITUENTS.len()),
            rng.gen_range(0..SUBSTITUENTS.len()),
        ];
        let smi = decorate(SCAFFOLDS[other], subs);
        if seen.insert(patchem_core::standardize(&smi).expect("generated SMILES parse")) {
            compounds.push((smi, false));
        }
    }
    compounds.shuffle(&mut rng);
    let records = compounds
        .iter()
        .enumerate()
        .map(|(k, (smi, is_core))| {
            CompoundRecord::new(&patent_id, &format!("{patent_id}-C{k:03}"), smi, Some(*is_core))
                .expect("generated SMILES parse")
        })
        .collect();
    PatentBundle {
        patent_id,
        compounds: records,
        provenance: vec![format!("synthetic: seed {seed}, index {index}, scaffold {scaffold}")],
    }
}

pub fn synth_corpus(seed: u64, n_patents: usize, cfg: &SynthConfig) -> Vec<PatentBundle> {
    (0..n_patents).map(|i| synth_patent(seed, i, cfg)).collect()
}

/// Eight patents of fourteen compounds: 112 labeled rows.
pub fn mini_train(seed: u64) -> Vec<PatentBundle> {
    synth_corpus(seed, 8, &SynthConfig::with_compounds(14))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_decoration_parses() {
        for s in SCAFFOLDS {
            for a in 0..SUBSTITUENTS.len() {
                for b in [0, 9, 17, 19] {
                    let smi = decorate(s, [a, b, (a + b) % SUBSTITUENTS.len()]);
                    assert!(patchem_core::parse_smiles(&smi).is_ok(), "{smi}");
                }
            }
        }
    }

    #[test]
    fn mini_train_has_112_rows_and_one_core_each() {
        let m = mini_train(5);
        assert_eq!(m.iter().map(|b| b.compounds.len()).sum::<usize>(), 112);
        assert!(m
            .iter()
            .all(|b| b.compounds.iter().filter(|c| c.is_core == Some(true)).count() == 1));
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::with_compounds(50);
        assert_eq!(synth_patent(3, 1, &cfg), synth_patent(3, 1, &cfg));
        assert_eq!(synth_patent(3, 1, &cfg).compounds.len(), 50);
    }
}
