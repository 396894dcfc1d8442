use std::collections::{BTreeSet, VecDeque};

use patchem_core::feat::{descriptors, environment_codes, DEFAULT_RADIUS, DEFAULT_WIDTH};
use patchem_core::{ecfp, parse_smiles, tanimoto, Fingerprint, Molecule};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../data/corpus.smi");

fn corpus() -> Vec<Molecule> {
    CORPUS
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_smiles(l.split_whitespace().next().unwrap()).unwrap())
        .collect()
}

fn ring_atoms(m: &Molecule) -> Vec<bool> {
    // a bond is cyclic when its ends stay connected without it
    let mut out = vec![false; m.atom_count()];
    for (k, b) in m.bonds().iter().enumerate() {
        let mut seen = vec![false; m.atom_count()];
        let mut queue = VecDeque::from([b.a]);
        seen[b.a] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, kk) in m.neighbors(v) {
                if kk != k && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen[b.b] {
            out[b.a] = true;
            out[b.b] = true;
        }
    }
    out
}

fn ball(m: &Molecule, root: usize, r: usize) -> BTreeSet<usize> {
    let mut dist = vec![usize::MAX; m.atom_count()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        if dist[v] == r {
            continue;
        }
        for &(w, _) in m.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    (0..m.atom_count()).filter(|&i| dist[i] != usize::MAX).collect()
}

/// Depth-`r` unfolding of the neighborhood of `a`, written out as text.
fn unfolding(m: &Molecule, ring: &[bool], a: usize, r: usize) -> String {
    let at = m.atom(a);
    let base = format!(
        "{}/{}/{}/{}/{}",
        at.atomic_number,
        at.formal_charge,
        m.degree(a),
        m.hydrogens(a),
        ring[a]
    );
    if r == 0 {
        return base;
    }
    let mut parts: Vec<String> = m
        .neighbors(a)
        .iter()
        .map(|&(w, k)| format!("{}:{}", m.bonds()[k].order.code(), unfolding(m, ring, w, r - 1)))
        .collect();
    parts.sort();
    format!("{}[{}]", unfolding(m, ring, a, r - 1), parts.join(","))
}

/// Distinct environments up to `radius`, dropping any whose atom set was
/// already covered.
fn brute_force_environments(m: &Molecule, radius: usize) -> usize {
    let ring = ring_atoms(m);
    let mut seen_sets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut envs: BTreeSet<String> = BTreeSet::new();
    for r in 0..=radius {
        let mut layer: Vec<(BTreeSet<usize>, String)> = (0..m.atom_count())
            .map(|a| (ball(m, a, r), unfolding(m, &ring, a, r)))
            .filter(|(s, _)| !seen_sets.contains(s))
            .collect();
        layer.sort();
        layer.dedup_by(|x, y| x.0 == y.0);
        for (s, e) in layer {
            seen_sets.insert(s);
            envs.insert(e);
        }
    }
    envs.len()
}

fn fp(s: &str) -> Fingerprint {
    ecfp(&parse_smiles(s).unwrap(), DEFAULT_RADIUS, DEFAULT_WIDTH).unwrap()
}

#[test]
fn ethanol_popcount_matches_enumeration() {
    let m = parse_smiles("CCO").unwrap();
    assert_eq!(brute_force_environments(&m, 2), 6);
    assert_eq!(fp("CCO").popcount(), 6);
}

#[test]
fn acetamide_popcount_matches_enumeration() {
    let m = parse_smiles("CC(=O)N").unwrap();
    assert_eq!(brute_force_environments(&m, 2), 8);
    assert_eq!(fp("CC(=O)N").popcount(), 8);
}

#[test]
fn small_molecules_match_enumeration() {
    for s in [
        "C",
        "CC",
        "CCC",
        "CC(C)C",
        "OCCO",
        "CCN",
        "C=CC#N",
        "c1ccccc1",
        "C1CC1",
        "CC(=O)O",
        "c1ccncc1O",
    ] {
        let m = parse_smiles(s).unwrap();
        assert_eq!(fp(s).popcount() as usize, brute_force_environments(&m, 2), "{s}");
    }
}

#[test]
fn relabeling_preserves_fingerprints() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in corpus().iter().take(50) {
        let expect = ecfp(m, 2, 2048).unwrap();
        for _ in 0..20 {
            let mut order: Vec<usize> = (0..m.atom_count()).collect();
            order.shuffle(&mut rng);
            assert_eq!(ecfp(&m.permuted(&order), 2, 2048).unwrap(), expect);
        }
    }
}

#[test]
fn every_corpus_molecule_survives_a_thousand_relabelings() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in corpus() {
        let expect = ecfp(&m, 2, 2048).unwrap();
        let mut order: Vec<usize> = (0..m.atom_count()).collect();
        for _ in 0..1000 {
            order.shuffle(&mut rng);
            assert_eq!(ecfp(&m.permuted(&order), 2, 2048).unwrap(), expect);
        }
    }
}

#[test]
fn environment_counts_grow_with_radius() {
    for m in corpus() {
        let counts: Vec<usize> = (0..4)
            .map(|r| environment_codes(&m, r).into_iter().collect::<BTreeSet<_>>().len())
            .collect();
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
    }
}

#[test]
fn descriptor_examples() {
    let water = descriptors(&parse_smiles("O").unwrap());
    assert!((water.molecular_weight - 18.02).abs() <= 0.01);
    assert_eq!((water.hbd, water.hba), (1, 1));
    let benzene = descriptors(&parse_smiles("c1ccccc1").unwrap());
    assert_eq!(
        (benzene.ring_count, benzene.aromatic_ring_count, benzene.rotatable_bonds),
        (1, 1, 0)
    );
    assert_eq!(descriptors(&parse_smiles("CCO").unwrap()).rotatable_bonds, 0);
}

proptest! {
    #[test]
    fn tanimoto_is_the_set_formula(
        a in prop::collection::btree_set(0usize..256, 0..60),
        b in prop::collection::btree_set(0usize..256, 0..60),
    ) {
        let fa = Fingerprint::from_bits(256, 2, a.iter().copied()).unwrap();
        let fb = Fingerprint::from_bits(256, 2, b.iter().copied()).unwrap();
        let inter = a.intersection(&b).count();
        let union = a.union(&b).count();
        let expect = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
        prop_assert_eq!(tanimoto(&fa, &fb).unwrap(), expect);
        prop_assert_eq!(tanimoto(&fb, &fa).unwrap(), expect);
    }
}
