use patchem_core::chem::{canonical_ranks, parse_smiles, standardize, write_smiles, DiagnosticKind, Molecule};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../data/corpus.smi");

type AtomLabel = dyn Fn(&Molecule, usize) -> (u8, i8, Option<u16>, bool, u8, usize);

fn corpus() -> Vec<&'static str> {
    CORPUS.lines().filter(|l| !l.trim().is_empty()).collect()
}

/// Brute-force isomorphism test: BFS atom order on `a`, candidates drawn from
/// neighbors of already-mapped images in `b`.
fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    if a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let label = |m: &Molecule, i: usize| {
        let at = m.atom(i);
        (
            at.atomic_number,
            at.formal_charge,
            at.isotope,
            at.aromatic,
            m.hydrogens(i),
            m.degree(i),
        )
    };
    let n = a.atom_count();
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &(w, _) in a.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        a: &Molecule,
        b: &Molecule,
        order: &[usize],
        depth: usize,
        map: &mut [usize],
        used: &mut [bool],
        label: &AtomLabel,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        let anchor = a.neighbors(v).iter().map(|&(w, _)| w).find(|&w| map[w] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(w) => b.neighbors(map[w]).iter().map(|&(x, _)| x).collect(),
            None => (0..b.atom_count()).collect(),
        };
        for c in candidates {
            if used[c] || label(a, v) != label(b, c) {
                continue;
            }
            let consistent = a.neighbors(v).iter().all(|&(w, k)| {
                map[w] == usize::MAX
                    || b.bond_between(c, map[w])
                        .is_some_and(|bb| bb.order == a.bonds()[k].order)
            });
            if !consistent {
                continue;
            }
            map[v] = c;
            used[c] = true;
            if go(a, b, order, depth + 1, map, used, label) {
                return true;
            }
            map[v] = usize::MAX;
            used[c] = false;
        }
        false
    }
    go(a, b, &order, 0, &mut map, &mut used, &label)
}

#[test]
fn corpus_is_large_enough() {
    assert!(corpus().len() >= 500);
}

#[test]
fn every_corpus_molecule_round_trips() {
    for s in corpus() {
        let m = parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        let written = write_smiles(&m);
        let back = parse_smiles(&written).unwrap_or_else(|e| panic!("{s} -> {written}: {e}"));
        assert!(isomorphic(&m, &back), "{s} -> {written} is not isomorphic");
        assert_eq!(write_smiles(&back), written, "{s}");
    }
}

#[test]
fn standardize_is_idempotent_on_corpus() {
    for s in corpus() {
        let once = standardize(s).unwrap();
        assert_eq!(standardize(&once).unwrap(), once, "{s}");
    }
}

#[test]
fn kekule_forms_standardize_like_aromatic_forms() {
    let pairs = [
        ("C1=CC=CC=C1", "c1ccccc1"),
        ("C1=CC=NC=C1", "c1ccncc1"),
        ("C1=CNC=C1", "c1cc[nH]c1"),
        ("O=C1C=CC=CN1", "O=c1cccc[nH]1"),
        ("CN1C=NC2=C1C(=O)N(C)C(=O)N2C", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
        ("C1=CC=C2C=CC=CC2=C1", "c1ccc2ccccc2c1"),
        ("CC(=O)OC1=CC=CC=C1C(=O)O", "CC(=O)Oc1ccccc1C(=O)O"),
        ("C[N+]1=CC=CC=C1", "c1cc[n+](C)cc1"),
    ];
    for (k, a) in pairs {
        assert_eq!(standardize(k).unwrap(), standardize(a).unwrap(), "{k} vs {a}");
    }
}

#[test]
fn relabeling_leaves_canonical_output_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in corpus().iter().step_by(7) {
        let m = parse_smiles(s).unwrap();
        let reference = write_smiles(&m);
        let ranks = canonical_ranks(&m);
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..m.atom_count()).collect();
            order.shuffle(&mut rng);
            let p = m.permuted(&order);
            assert_eq!(write_smiles(&p), reference, "{s}");
            let pr = canonical_ranks(&p);
            for (new, &old) in order.iter().enumerate() {
                assert_eq!(pr[new], ranks[old], "{s}");
            }
        }
    }
}

#[test]
fn equal_canonical_strings_imply_isomorphism_across_corpus() {
    let mut by_string: std::collections::BTreeMap<String, Vec<&str>> = Default::default();
    for s in corpus() {
        by_string.entry(standardize(s).unwrap()).or_default().push(s);
    }
    for group in by_string.values().filter(|g| g.len() > 1) {
        let first = patchem_core::chem::perceive_aromaticity(&parse_smiles(group[0]).unwrap());
        for other in &group[1..] {
            let m = patchem_core::chem::perceive_aromaticity(&parse_smiles(other).unwrap());
            assert!(isomorphic(&first, &m), "{} vs {}", group[0], other);
        }
    }
}

proptest! {
    #[test]
    fn parser_never_panics(s in "[CNOcnos()=#%0-9\\[\\]+@H/\\\\.:Clr*-]{0,24}") {
        match parse_smiles(&s) {
            Ok(m) => {
                let w = write_smiles(&m);
                prop_assert!(parse_smiles(&w).is_ok(), "{} -> {}", s, w);
            }
            Err(d) => prop_assert!(d.byte_offset <= s.len()),
        }
    }

    #[test]
    fn parser_never_panics_on_arbitrary_text(s in "\\PC{0,16}") {
        if let Err(d) = parse_smiles(&s) {
            prop_assert!(d.byte_offset <= s.len());
            prop_assert!(!s.is_empty() || d.kind == DiagnosticKind::EmptyInput);
        }
    }
}
